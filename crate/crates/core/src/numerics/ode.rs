//! Dormand–Prince 5(4) with a PI step-size controller.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at s = {at} (h = {step:e})")]
    StepUnderflow { at: f64, step: f64 },
    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),
    #[error("non-finite state at s = {0}")]
    NonFinite(f64),
}

/// Right-hand side of an autonomous or non-autonomous system `y' = f(s, y)`.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, s: f64, y: &[f64; N]) -> [f64; N];
}

impl<const N: usize, F> OdeSystem<N> for F
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    fn rhs(&self, s: f64, y: &[f64; N]) -> [f64; N] {
        self(s, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 1e-3,
            h_max: f64::INFINITY,
            h_min: 1e-14,
            max_steps: 2_000_000,
        }
    }
}

/// Returned by an observer after every accepted step.
pub enum Control<const N: usize> {
    Continue,
    Stop,
    /// Replace the state (e.g. a rescaling) and restart the controller history.
    Replace([f64; N]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSummary {
    pub s_end: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub stopped_early: bool,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn combo<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates from `s0` towards `s_end` (either direction). The observer sees the
/// initial state and every accepted step.
pub fn integrate<const N: usize, S, O>(
    system: &S,
    s0: f64,
    y0: [f64; N],
    s_end: f64,
    ctl: &StepControl,
    mut observer: O,
) -> Result<OdeSummary, OdeError>
where
    S: OdeSystem<N> + ?Sized,
    O: FnMut(f64, &[f64; N]) -> Control<N>,
{
    let dir = if s_end >= s0 { 1.0 } else { -1.0 };
    let mut s = s0;
    let mut y = y0;
    let mut summary = OdeSummary { s_end: s0, accepted: 0, rejected: 0, stopped_early: false };
    match observer(s, &y) {
        Control::Stop => {
            summary.stopped_early = true;
            return Ok(summary);
        }
        Control::Replace(ny) => y = ny,
        Control::Continue => {}
    }
    if s == s_end {
        return Ok(summary);
    }

    const SAFETY: f64 = 0.9;
    const BETA: f64 = 0.04;
    const EXPO: f64 = 0.2 - BETA * 0.75;
    const FAC_MIN: f64 = 0.2;
    const FAC_MAX: f64 = 10.0;

    let mut h = ctl.h_init.min(ctl.h_max).min((s_end - s0).abs());
    let mut err_old = 1e-4_f64;
    let mut k1 = system.rhs(s, &y);
    let mut last_rejected = false;

    while (s_end - s) * dir > 0.0 {
        if summary.accepted + summary.rejected >= ctl.max_steps {
            return Err(OdeError::TooManySteps(ctl.max_steps));
        }
        let remaining = (s_end - s).abs();
        let mut step = h.min(remaining);
        if remaining - step < 1e-12 * remaining.max(1.0) {
            step = remaining;
        }
        let hs = dir * step;

        let k2 = system.rhs(s + C2 * hs, &combo(&y, hs, &[(A21, &k1)]));
        let k3 = system.rhs(s + C3 * hs, &combo(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = system.rhs(s + C4 * hs, &combo(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = system.rhs(
            s + C5 * hs,
            &combo(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = system.rhs(
            s + hs,
            &combo(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = combo(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = system.rhs(s + hs, &y_new);

        let mut err = 0.0;
        let mut finite = true;
        for i in 0..N {
            if !y_new[i].is_finite() {
                finite = false;
                break;
            }
            let e = hs
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = ctl.atol + ctl.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        if !finite {
            // shrink hard and retry; treat as a rejection
            summary.rejected += 1;
            h = step * FAC_MIN;
            if h < ctl.h_min {
                return Err(OdeError::NonFinite(s));
            }
            last_rejected = true;
            continue;
        }
        let err = (err / N as f64).sqrt();

        if err <= 1.0 {
            let mut fac = err.max(1e-10).powf(EXPO) / err_old.powf(BETA);
            fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = step / fac;
            if last_rejected {
                h_new = h_new.min(step);
            }
            err_old = err.max(1e-4);
            s += hs;
            y = y_new;
            k1 = k7;
            summary.accepted += 1;
            last_rejected = false;
            h = h_new.min(ctl.h_max);
            match observer(s, &y) {
                Control::Continue => {}
                Control::Stop => {
                    summary.stopped_early = true;
                    break;
                }
                Control::Replace(ny) => {
                    y = ny;
                    k1 = system.rhs(s, &y);
                    err_old = 1e-4;
                }
            }
        } else {
            let fac = (err.powf(EXPO) / SAFETY).min(1.0 / FAC_MIN);
            h = step / fac;
            summary.rejected += 1;
            last_rejected = true;
        }
        if h < ctl.h_min {
            return Err(OdeError::StepUnderflow { at: s, step: h });
        }
    }
    summary.s_end = s;
    Ok(summary)
}
