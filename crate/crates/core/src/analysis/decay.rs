use nalgebra::{Matrix2, Matrix3, Vector2};
use serde::{Deserialize, Serialize};

use super::{median, AnalysisError, FitMethod, FitResult, TimeSeries};
use crate::numerics::linear_fit;
use crate::numerics::roots::brent_min;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayOptions {
    /// Fraction of the window at its end whose median seeds u₀.
    pub tail_fraction: f64,
    /// More sign changes of u − u₀ (above the tail level) than this fraction of the retained
    /// samples, and at least three, make the series oscillation-dominated.
    pub max_sign_change_fraction: f64,
    /// Samples with |u − u₀| below this multiple of the tail spread are left out of the seed regression.
    pub noise_multiple: f64,
    /// Refit (u₀, A, α) jointly after the seed.
    pub joint_refit: bool,
}

impl Default for DecayOptions {
    fn default() -> Self {
        Self { tail_fraction: 0.1, max_sign_change_fraction: 0.02, noise_multiple: 3.0, joint_refit: true }
    }
}

/// Fits u ≈ u₀ + A e^{−αt} on the window (whole series if `None`).
pub fn fit_decay(series: &TimeSeries, window: Option<(f64, f64)>, opts: &DecayOptions) -> Result<FitResult, AnalysisError> {
    let s = match window {
        Some((lo, hi)) => series.window(lo, hi),
        None => series.clone(),
    };
    let n = s.len();
    if n < 10 {
        return Err(AnalysisError::TooShort(n));
    }
    let tail = ((n as f64 * opts.tail_fraction).ceil() as usize).clamp(3, n);
    let mut tail_values: Vec<f64> = s.u[n - tail..].to_vec();
    let u0_seed = median(&mut tail_values);
    let mut dev: Vec<f64> = tail_values.iter().map(|u| (u - u0_seed).abs()).collect();
    let spread = 1.4826 * median(&mut dev);

    let d: Vec<f64> = s.u.iter().map(|u| u - u0_seed).collect();
    let peak = d.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let scale = u0_seed.abs().max(peak);
    let floor = (opts.noise_multiple * spread).max(1e-13 * scale);
    if !(peak > floor) {
        return Err(AnalysisError::IllConditioned("no dynamic range above the tail level".into()));
    }
    let (mut ts, mut ls, mut signs) = (Vec::new(), Vec::new(), Vec::new());
    for (t, x) in s.t.iter().zip(&d).filter(|(_, x)| x.abs() > floor) {
        ts.push(*t);
        ls.push(x.abs().ln());
        signs.push(x.signum());
    }
    if ts.len() < 5 {
        return Err(AnalysisError::IllConditioned(format!("{} samples above the tail level", ts.len())));
    }
    let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    if changes >= 3 && changes as f64 > opts.max_sign_change_fraction * ts.len() as f64 {
        return Err(AnalysisError::IllConditioned(format!("oscillation-dominated: {changes} sign changes")));
    }
    let (_, slope, _) = linear_fit(&ts, &ls).ok_or_else(|| AnalysisError::IllConditioned("degenerate abscissae".into()))?;
    let alpha_seed = -slope;
    if !(alpha_seed > 0.0) || !alpha_seed.is_finite() {
        return Err(AnalysisError::IllConditioned(format!("seed rate {alpha_seed} is not a decay")));
    }

    let t0 = s.t[0];
    let mut out = FitResult::empty(FitMethod::LogLinear, &s);
    let (u0, amp, alpha) = if opts.joint_refit {
        let rss = |a: f64| project(&s, t0, a).map(|p| p.2).unwrap_or(f64::INFINITY);
        let (alpha, _) = brent_min(rss, 0.25 * alpha_seed, 4.0 * alpha_seed, 1e-12);
        let (u0, amp, _) = project(&s, t0, alpha).ok_or_else(|| AnalysisError::IllConditioned("singular projection".into()))?;
        (u0, amp, alpha)
    } else {
        let amp = d[0].signum() * (ls[0] + alpha_seed * (ts[0] - t0)).exp();
        (u0_seed, amp, alpha_seed)
    };
    if !alpha.is_finite() || !u0.is_finite() {
        return Err(AnalysisError::IllConditioned("non-finite fit".into()));
    }

    let residuals: Vec<f64> = s.t.iter().zip(&s.u).map(|(t, u)| u - u0 - amp * (-alpha * (t - t0)).exp()).collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    out.u0 = u0;
    out.alpha = alpha;
    out.amplitude = amp * (alpha * t0).exp();
    out.residual_rms = (rss / n as f64).sqrt();
    out.residual_max = residuals.iter().fold(0.0, |m, r| m.max(r.abs()));
    out.alpha_stderr = stderr(&s, t0, amp, alpha, rss);
    Ok(out)
}

/// Least-squares (u₀, A) for a fixed rate and the residual sum of squares.
fn project(s: &TimeSeries, t0: f64, alpha: f64) -> Option<(f64, f64, f64)> {
    let mut m = Matrix2::<f64>::zeros();
    let mut b = Vector2::<f64>::zeros();
    for (t, u) in s.t.iter().zip(&s.u) {
        let e = (-alpha * (t - t0)).exp();
        m[(0, 0)] += 1.0;
        m[(0, 1)] += e;
        m[(1, 1)] += e * e;
        b[0] += u;
        b[1] += u * e;
    }
    m[(1, 0)] = m[(0, 1)];
    let x = m.lu().solve(&b)?;
    let rss: f64 = s.t.iter().zip(&s.u).map(|(t, u)| (u - x[0] - x[1] * (-alpha * (t - t0)).exp()).powi(2)).sum();
    Some((x[0], x[1], rss))
}

fn stderr(s: &TimeSeries, t0: f64, amp: f64, alpha: f64, rss: f64) -> Option<f64> {
    let n = s.len();
    if n <= 3 {
        return None;
    }
    let mut jtj = Matrix3::<f64>::zeros();
    for t in &s.t {
        let e = (-alpha * (t - t0)).exp();
        let row = [1.0, e, -amp * (t - t0) * e];
        for i in 0..3 {
            for j in 0..3 {
                jtj[(i, j)] += row[i] * row[j];
            }
        }
    }
    let cov = jtj.try_inverse()?;
    let var: f64 = rss / (n - 3) as f64 * cov[(2, 2)];
    (var >= 0.0).then(|| var.sqrt())
}
