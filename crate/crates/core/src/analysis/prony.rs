use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{AnalysisError, FitMethod, FitResult, TimeSeries};

const MAX_MODES: usize = 4;
const MAX_ORDER: usize = 8;
const TARGET_SAMPLES: usize = 400;

/// One damped oscillation A e^{−rate t} cos(frequency t + phase); a conjugate pair of
/// roots is one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PronyMode {
    pub rate: f64,
    pub frequency: f64,
    pub amplitude: f64,
    pub phase: f64,
}

struct Candidate {
    rss: f64,
    modes: Vec<PronyMode>,
}

/// Multi-exponential fit on a uniformly sampled window; poles from the matrix pencil of the
/// Hankel matrix, amplitudes by least squares. The order is the smallest whose residual is
/// within a factor 10 of the best over orders 1..=8, with at most four modes.
pub fn fit_prony(series: &TimeSeries, window: Option<(f64, f64)>) -> Result<FitResult, AnalysisError> {
    let s = match window {
        Some((lo, hi)) => series.window(lo, hi),
        None => series.clone(),
    };
    if s.len() < 10 {
        return Err(AnalysisError::TooShort(s.len()));
    }
    let dt0 = s.t[1] - s.t[0];
    if s.t.windows(2).any(|w| ((w[1] - w[0]) - dt0).abs() > 1e-6 * dt0) {
        return Err(AnalysisError::Malformed("Prony needs uniform sampling".into()));
    }
    let stride = (s.len() / TARGET_SAMPLES).max(1);
    let y: Vec<f64> = s.u.iter().step_by(stride).cloned().collect();
    let dt = dt0 * stride as f64;
    let t0 = s.t[0];
    let n = y.len();
    let energy: f64 = y.iter().map(|v| v * v).sum();
    if !(energy > 0.0) {
        return Err(AnalysisError::IllConditioned("identically zero series".into()));
    }

    let pencil = Pencil::new(&y);
    let mut candidates = Vec::new();
    for order in 1..=MAX_ORDER.min(pencil.rank_limit()) {
        if let Some(c) = fit_order(&y, &pencil, dt, order) {
            if c.modes.len() <= MAX_MODES && c.rss.is_finite() {
                candidates.push(c);
            }
        }
    }
    let best = candidates.iter().map(|c| c.rss).fold(f64::INFINITY, f64::min);
    let floor = 1e-24 * energy;
    let chosen = candidates
        .into_iter()
        .find(|c| c.rss <= 10.0 * best.max(floor))
        .ok_or_else(|| AnalysisError::IllConditioned("no admissible model order".into()))?;

    let span = dt * (n - 1) as f64;
    let is_constant = |m: &PronyMode| m.frequency == 0.0 && m.rate.abs() * span < 1e-3;
    let u0: f64 = chosen.modes.iter().filter(|m| is_constant(m)).map(|m| m.amplitude * m.phase.cos()).sum();
    let dynamic: Vec<&PronyMode> = chosen.modes.iter().filter(|m| !is_constant(m)).collect();
    let peak = dynamic.iter().map(|m| m.amplitude).fold(0.0, f64::max);
    let slowest = dynamic
        .iter()
        .filter(|m| m.amplitude > 1e-3 * peak)
        .min_by(|a, b| a.rate.total_cmp(&b.rate))
        .ok_or_else(|| AnalysisError::IllConditioned("no decaying component".into()))?;

    let mut out = FitResult::empty(FitMethod::Prony, &s);
    out.u0 = u0;
    out.alpha = slowest.rate;
    out.frequency = Some(slowest.frequency);
    out.amplitude = slowest.amplitude;
    out.residual_rms = (chosen.rss / n as f64).sqrt();
    let model = |t: f64| -> f64 {
        chosen
            .modes
            .iter()
            .map(|m| m.amplitude * (-m.rate * (t - t0)).exp() * (m.frequency * (t - t0) + m.phase).cos())
            .sum()
    };
    out.residual_max = s.t.iter().zip(&s.u).fold(0.0, |acc, (t, u)| f64::max(acc, (u - model(*t)).abs()));
    out.modes = chosen.modes;
    out.modes.sort_by(|a, b| a.rate.total_cmp(&b.rate));
    Ok(out)
}

/// Right singular vectors of the Hankel matrix of the samples with pencil parameter n/3.
struct Pencil {
    v: DMatrix<f64>,
}

impl Pencil {
    fn new(y: &[f64]) -> Self {
        let n = y.len();
        let l = n / 3;
        let hankel = DMatrix::from_fn(n - l, l + 1, |i, j| y[i + j]);
        let svd = hankel.svd(false, true);
        let v = svd.v_t.expect("requested").transpose();
        Pencil { v }
    }

    fn rank_limit(&self) -> usize {
        self.v.ncols().min(self.v.nrows() - 1)
    }

    /// Signal poles for rank p: eigenvalues of V₁⁺V₂ from the leading p singular vectors.
    fn poles(&self, p: usize) -> Option<Vec<Complex<f64>>> {
        let rows = self.v.nrows();
        let vp = self.v.columns(0, p);
        let v1 = vp.rows(0, rows - 1).into_owned();
        let v2 = vp.rows(1, rows - 1).into_owned();
        let m = v1.pseudo_inverse(1e-14).ok()? * v2;
        Some(m.complex_eigenvalues().iter().cloned().collect())
    }
}

fn fit_order(y: &[f64], pencil: &Pencil, dt: f64, p: usize) -> Option<Candidate> {
    let n = y.len();
    let roots = pencil.poles(p)?;
    if roots.iter().any(|z| !(z.norm() > 0.0) || !z.re.is_finite()) {
        return None;
    }
    let v = DMatrix::from_fn(n, p, |k, j| roots[j].powu(k as u32));
    let yc = DVector::from_fn(n, |k, _| Complex::new(y[k], 0.0));
    let h = v.clone().svd(true, true).solve(&yc, 1e-14).ok()?;
    let fit = &v * &h;
    let rss: f64 = (0..n).map(|k| (y[k] - fit[k].re).powi(2)).sum();

    let mut modes = Vec::new();
    for (z, amp) in roots.iter().zip(h.iter()) {
        if z.im < 0.0 {
            continue;
        }
        let rate = -z.norm().ln() / dt;
        let (frequency, amplitude) = if z.im > 0.0 { (z.arg() / dt, 2.0 * amp.norm()) } else { (0.0, amp.re.abs()) };
        let phase = if z.im > 0.0 {
            amp.arg()
        } else if z.re > 0.0 {
            if amp.re < 0.0 { std::f64::consts::PI } else { 0.0 }
        } else {
            // a negative real root alternates sign every sample: Nyquist frequency
            return None;
        };
        modes.push(PronyMode { rate, frequency, amplitude, phase });
    }
    Some(Candidate { rss, modes })
}
