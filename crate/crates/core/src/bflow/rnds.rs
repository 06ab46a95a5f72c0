use serde::{Deserialize, Serialize};

use super::{BPhasePoint, CompactifiedPoint, Component, FlowError};
use crate::numerics::ode::{integrate as ode_integrate, Control, OdeError, StepControl};
use crate::numerics::smooth::step5;
use crate::spacetime::{ChartData, ChartPoint, MetricBlock};

const NORM_LO: f64 = 1e-6;
const NORM_HI: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    /// Signed affine length; negative integrates backwards.
    pub span: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Stop when r leaves [lo, hi].
    pub band: Option<(f64, f64)>,
    /// (index, radius) of the horizons used for endpoint classification.
    pub horizons: Vec<(u8, f64)>,
    /// Affine length for which a trajectory must stay near 𝓛_j before it is declared radial.
    pub radial_window: f64,
    /// Keep every n-th accepted step.
    pub stride: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            span: 100.0,
            rtol: 1e-10,
            atol: 1e-12,
            band: None,
            horizons: Vec::new(),
            radial_window: 5.0,
            stride: 1,
        }
    }
}

impl FlowOptions {
    pub fn step_control(&self) -> StepControl {
        StepControl { rtol: self.rtol, atol: self.atol, ..StepControl::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Terminal {
    SpanCompleted,
    TendsToRadialSet { horizon: u8 },
    ExitedBand { r: f64 },
    StepUnderflow { at: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub s: f64,
    /// State in the current fiber normalization.
    pub point: BPhasePoint,
    /// ln τ₀, kept separately since τ₀ itself over- or underflows near radial sets.
    pub log_tau0: f64,
    /// ln k, where the current covector is k times the initial-normalization covector.
    pub log_scale: f64,
    /// G in the current normalization.
    pub g: f64,
}

impl TrajectorySample {
    pub fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    /// σ in the initial normalization.
    pub fn sigma0(&self) -> f64 {
        self.point.sigma * (-self.log_scale).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub terminal: Terminal,
    pub renormalizations: usize,
}

impl Trajectory {
    /// max |G(s) − G(0)k(s)²| over the largest |ζ|² reached up to s, in the current normalization.
    pub fn max_g_drift(&self) -> f64 {
        drift_against_peak(self.samples.iter().map(|x| (x.g, x.log_scale, x.point.fiber_norm())))
    }

    /// max |σ(s) − σ(0)k(s)| / |ζ(s)|, in the current normalization.
    pub fn max_sigma_drift(&self) -> f64 {
        let first = &self.samples[0];
        let s0 = first.sigma0();
        self.samples
            .iter()
            .map(|x| (x.point.sigma - s0 * x.scale()).abs() / x.point.fiber_norm())
            .fold(0.0, f64::max)
    }

    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory has at least one sample")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,log_tau0,r,angle,sigma,xi,eta,log_scale,g\n");
        for x in &self.samples {
            let p = &x.point;
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                x.s, x.log_tau0, p.r, p.angle, p.sigma, p.xi, p.eta, x.log_scale, x.g
            ));
        }
        out
    }
}

/// max over samples (q, ln k, |ζ|) of |q − q₀k²| / m, where m is the running maximum of |ζ|²
/// carried into the current normalization. q is any quadratic conserved quantity.
pub(crate) fn drift_against_peak(samples: impl Iterator<Item = (f64, f64, f64)>) -> f64 {
    let mut first = None;
    let mut peak = 0.0_f64;
    let mut prev = 0.0;
    let mut worst = 0.0_f64;
    for (q, ls, n) in samples {
        let (q0, l0) = *first.get_or_insert((q, ls));
        peak = (peak * (2.0 * (ls - prev)).exp()).max(n * n);
        prev = ls;
        worst = worst.max((q - q0 * (2.0 * (ls - l0)).exp()).abs() / peak);
    }
    worst
}

/// ⟨a, b⟩ for the (σ, ξ) parts of two covectors at a chart point.
pub(crate) fn pairing(p: &ChartPoint, a: (f64, f64), b: (f64, f64)) -> f64 {
    -p.e * a.0 * b.0 - p.phi * (a.0 * b.1 + a.1 * b.0) - p.mu * a.1 * b.1
}

/// Hamilton flow of the reduced dual metric function in a chart `C`.
#[derive(Clone)]
pub struct RadialFlow<C> {
    chart: C,
}

impl<C: MetricBlock> RadialFlow<C> {
    pub fn new(chart: C) -> Self {
        Self { chart }
    }

    pub fn chart(&self) -> &C {
        &self.chart
    }

    fn check(&self, r: f64) -> Result<ChartPoint, FlowError> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(FlowError::OutsideChart(format!("r = {r}")));
        }
        Ok(self.chart.block(r))
    }

    pub fn dual_metric(&self, p: &BPhasePoint) -> Result<f64, FlowError> {
        let c = self.check(p.r)?;
        Ok(pairing(&c, (p.sigma, p.xi), (p.sigma, p.xi)) - p.eta * p.eta / (p.r * p.r))
    }

    /// Ĝ = ρ̂² G, smooth up to fiber infinity.
    pub fn rescaled_dual_metric(&self, q: &CompactifiedPoint) -> Result<f64, FlowError> {
        let c = self.check(q.r)?;
        Ok(pairing(&c, (q.sigma_hat, q.xi_sign), (q.sigma_hat, q.xi_sign)) - q.eta_hat * q.eta_hat / (q.r * q.r))
    }

    /// H_G on [τ₀, r, ψ, σ, ξ, L].
    pub fn hamiltonian_rhs(&self, y: &[f64; 6]) -> [f64; 6] {
        let [tau0, r, _, sigma, xi, l] = *y;
        let c = self.chart.block(r);
        let r2 = r * r;
        [
            tau0 * (-2.0 * c.e * sigma - 2.0 * c.phi * xi),
            -2.0 * c.phi * sigma - 2.0 * c.mu * xi,
            -2.0 * l / r2,
            0.0,
            c.de * sigma * sigma + 2.0 * c.dphi * sigma * xi + c.dmu * xi * xi - 2.0 * l * l / (r2 * r),
            0.0,
        ]
    }

    /// ρ̂ H_G on [τ₀, r, ψ, ρ̂, σ̂, η̂] in the component ±ξ > 0 (`xi_sign` = ±1).
    pub fn rescaled_rhs(&self, y: &[f64; 6], xi_sign: f64) -> [f64; 6] {
        let [tau0, r, _, rho, sh, eh] = *y;
        let c = self.chart.block(r);
        let r2 = r * r;
        let q = c.de * sh * sh + 2.0 * xi_sign * c.dphi * sh + c.dmu - 2.0 * eh * eh / (r2 * r);
        [
            tau0 * (-2.0 * c.e * sh - 2.0 * xi_sign * c.phi),
            -2.0 * c.phi * sh - 2.0 * xi_sign * c.mu,
            -2.0 * eh / r2,
            -xi_sign * rho * q,
            -xi_sign * sh * q,
            -xi_sign * eh * q,
        ]
    }

    /// H_G r = ∂G/∂ξ.
    pub fn radial_velocity(&self, p: &BPhasePoint) -> f64 {
        let c = self.chart.block(p.r);
        -2.0 * c.phi * p.sigma - 2.0 * c.mu * p.xi
    }

    pub fn integrate(&self, p0: BPhasePoint, opts: &FlowOptions) -> Result<Trajectory, FlowError> {
        let g0 = self.dual_metric(&p0)?;
        // τ₀ is evolved as ln τ₀; τ₀ = 0 is invariant
        let boundary = p0.tau0 == 0.0;
        let log0 = if boundary { f64::NEG_INFINITY } else { p0.tau0.ln() };
        let mut samples = vec![TrajectorySample { s: 0.0, point: p0, log_tau0: log0, log_scale: 0.0, g: g0 }];
        let mut terminal = Terminal::SpanCompleted;
        let mut log_scale = 0.0;
        let mut renormalizations = 0;
        let mut near: Option<(u8, f64)> = None;
        let mut count = 0usize;
        let stride = opts.stride.max(1);
        let rhs = |_: f64, y: &[f64; 6]| {
            let mut v = self.hamiltonian_rhs(&[1.0, y[1], y[2], y[3], y[4], y[5]]);
            if boundary {
                v[0] = 0.0;
            }
            v
        };
        let mut y0 = p0.to_array();
        y0[0] = if boundary { 0.0 } else { log0 };
        let result = ode_integrate(&rhs, 0.0, y0, opts.span, &opts.step_control(), |s, y| {
            if s == 0.0 {
                return Control::Continue;
            }
            let mut p = BPhasePoint::from_array(y);
            let log_tau0 = if boundary { f64::NEG_INFINITY } else { y[0] };
            p.tau0 = log_tau0.exp();
            count += 1;
            let g = self.dual_metric(&p).unwrap_or(f64::NAN);
            let sample = TrajectorySample { s, point: p, log_tau0, log_scale, g };
            let out_of_band = opts.band.is_some_and(|(lo, hi)| p.r < lo || p.r > hi) || !(p.r > 0.0);
            if out_of_band {
                samples.push(sample);
                terminal = Terminal::ExitedBand { r: p.r };
                return Control::Stop;
            }
            if count.is_multiple_of(stride) {
                samples.push(sample);
            }
            let rho0 = if p.xi != 0.0 { (p.sigma * p.sigma + p.eta * p.eta) / (p.xi * p.xi) } else { f64::INFINITY };
            let close = opts.horizons.iter().find(|(_, rj)| (p.r - rj).abs() < 1e-6).map(|h| h.0);
            match (close, near) {
                (Some(j), Some((k, s0))) if j == k && rho0 < 1e-8 => {
                    if (s - s0).abs() >= opts.radial_window {
                        if !count.is_multiple_of(stride) {
                            samples.push(sample);
                        }
                        terminal = Terminal::TendsToRadialSet { horizon: j };
                        return Control::Stop;
                    }
                }
                (Some(j), _) if rho0 < 1e-8 => near = Some((j, s)),
                _ => near = None,
            }
            let n = p.fiber_norm();
            if !(NORM_LO..=NORM_HI).contains(&n) {
                let k = 1.0 / n;
                log_scale -= n.ln();
                renormalizations += 1;
                let mut z = *y;
                z[3] *= k;
                z[4] *= k;
                z[5] *= k;
                return Control::Replace(z);
            }
            Control::Continue
        });
        match result {
            Ok(_) => {}
            Err(OdeError::StepUnderflow { at, .. }) => terminal = Terminal::StepUnderflow { at },
            Err(e) => return Err(e.into()),
        }
        Ok(Trajectory { samples, terminal, renormalizations })
    }

    /// Integrate the rescaled field; returns (s, point) pairs. Stops early if r leaves `band`.
    pub fn integrate_compactified(
        &self,
        q0: CompactifiedPoint,
        opts: &FlowOptions,
    ) -> Result<Vec<(f64, CompactifiedPoint)>, FlowError> {
        self.check(q0.r)?;
        let sign = q0.xi_sign;
        let mut out = vec![(0.0, q0)];
        let rhs = |_: f64, y: &[f64; 6]| self.rescaled_rhs(y, sign);
        ode_integrate(&rhs, 0.0, q0.to_array(), opts.span, &opts.step_control(), |s, y| {
            if s == 0.0 {
                return Control::Continue;
            }
            let q = CompactifiedPoint::from_array(y, sign);
            out.push((s, q));
            if opts.band.is_some_and(|(lo, hi)| q.r < lo || q.r > hi) {
                return Control::Stop;
            }
            Control::Continue
        })?;
        Ok(out)
    }
}

/// Splits the characteristic set with a future timelike covector ϖ glued from
/// −dt_* near the Cauchy side, −dr in the trapped band and +dt_* near the exterior.
#[derive(Clone, Debug)]
pub struct Classifier {
    chart: ChartData,
    low: Option<f64>,
    high: Option<f64>,
}

impl Classifier {
    pub fn new(chart: ChartData) -> Self {
        let low = chart.horizon(1).map(|h| h.radius);
        let high = chart.horizon(2).map(|h| h.radius);
        Self { chart, low, high }
    }

    pub fn chart(&self) -> &ChartData {
        &self.chart
    }

    /// (w_low, w_mid, w_high), a partition of unity.
    pub fn weights(&self, r: f64) -> (f64, f64, f64) {
        let d = self.chart.delta;
        let w_low = self.low.map_or(0.0, |r1| 1.0 - step5((r - r1 - d) / d).0);
        let w_high = match self.high {
            Some(r2) => step5((r - (r2 - 2.0 * d)) / d).0,
            None => 1.0,
        };
        (w_low, 1.0 - w_low - w_high, w_high)
    }

    /// (σ, ξ) of ϖ at r.
    pub fn time_covector(&self, r: f64) -> (f64, f64) {
        let (lo, mid, hi) = self.weights(r);
        // −dt_* = (1, 0), −dr = (0, −1), +dt_* = (−1, 0)
        (lo - hi, -mid)
    }

    pub fn pairing(&self, p: &BPhasePoint) -> f64 {
        let c = self.chart.block(p.r);
        pairing(&c, (p.sigma, p.xi), self.time_covector(p.r))
    }

    pub fn classify(&self, p: &BPhasePoint) -> Result<Component, FlowError> {
        let v = self.pairing(p);
        let scale = p.fiber_norm() * (1.0 + self.chart.block(p.r).e.abs() + 1.0 / p.r);
        if !(v.abs() > 1e-13 * scale) {
            return Err(FlowError::AmbiguousComponent(v));
        }
        Ok(if v < 0.0 { Component::Plus } else { Component::Minus })
    }
}
