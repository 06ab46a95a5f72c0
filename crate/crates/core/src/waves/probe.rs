use serde::{Deserialize, Serialize};

use super::{ModeField, NullBlockField, WaveError};
use crate::analysis::TimeSeries;
use crate::numerics::interp::lagrange;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Derivative {
    Value,
    /// ∂_{t_*}
    T,
    /// ∂_r
    R,
    /// ∂_u
    U,
    /// ∂_v
    V,
    /// ∂_V with V = −e^{−κ_1 v}/κ_1, i.e. e^{κ_1 v}∂_v; overflows for large κ_1 v.
    BigV,
}

/// Series of a mode field at radius r across its snapshots, by Lagrange interpolation of
/// the given order.
pub fn probe(field: &ModeField, r: f64, derivative: Derivative, order: usize) -> Result<TimeSeries, WaveError> {
    let (lo, hi) = field.meta.domain;
    if !(r >= lo && r <= hi) {
        return Err(WaveError::OutOfDomain(format!("r = {r} outside [{lo}, {hi}]")));
    }
    let mut t = Vec::with_capacity(field.snapshots.len());
    let mut u = Vec::with_capacity(field.snapshots.len());
    for s in &field.snapshots {
        let data = match derivative {
            Derivative::Value => &s.u,
            Derivative::T => &s.pi,
            Derivative::R => &s.phi,
            other => return Err(WaveError::Config(format!("{other:?} is not defined on the t_* foliation"))),
        };
        t.push(s.t);
        u.push(lagrange(&field.r, data, r, order).ok_or_else(|| WaveError::OutOfDomain(format!("stencil of order {order} at r = {r}")))?);
    }
    Ok(TimeSeries { t, u })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NullLocation {
    /// A recorded outgoing ray u = const, as a series in v.
    Ray { u: f64 },
    /// The last slice v = const, as a series in u.
    FinalSlice,
}

/// Second-order differences on a uniform grid, one-sided at the ends.
fn differentiate(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    if n < 3 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|j| {
            if j == 0 {
                (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h)
            } else if j == n - 1 {
                (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h)
            } else {
                (y[j + 1] - y[j - 1]) / (2.0 * h)
            }
        })
        .collect()
}

pub fn probe_null(field: &NullBlockField, at: NullLocation, derivative: Derivative) -> Result<TimeSeries, WaveError> {
    let g = &field.geometry;
    match at {
        NullLocation::Ray { u } => {
            let ray = field.ray_near(u).filter(|r| (r.u - u).abs() <= 0.5 * g.h).ok_or_else(|| WaveError::OutOfDomain(format!("no recorded ray at u = {u}")))?;
            let v: Vec<f64> = (0..ray.value.len()).map(|j| g.v(j)).collect();
            let values = match derivative {
                Derivative::Value => ray.value.clone(),
                Derivative::V => differentiate(&ray.value, g.h),
                Derivative::BigV => differentiate(&ray.value, g.h).iter().zip(&v).map(|(d, v)| d * (g.kappa1 * v).exp()).collect(),
                other => return Err(WaveError::Config(format!("{other:?} is not available along an outgoing ray"))),
            };
            Ok(TimeSeries { t: v, u: values })
        }
        NullLocation::FinalSlice => {
            let u: Vec<f64> = (0..field.final_slice.len()).map(|i| g.u(i)).collect();
            let values = match derivative {
                Derivative::Value => field.final_slice.clone(),
                Derivative::U => differentiate(&field.final_slice, g.h),
                other => return Err(WaveError::Config(format!("{other:?} is not available along the final slice"))),
            };
            Ok(TimeSeries { t: u, u: values })
        }
    }
}

/// (ln|V|, ln|∂_V u|) along the recorded ray nearest to u, computed in logarithms so that
/// e^{κ_1 v} never has to be formed.
pub fn transversal_log(field: &NullBlockField, u: f64) -> Result<(Vec<f64>, Vec<f64>), WaveError> {
    let dv = probe_null(field, NullLocation::Ray { u }, Derivative::V)?;
    let g = &field.geometry;
    let mut lv = Vec::with_capacity(dv.len());
    let mut lf = Vec::with_capacity(dv.len());
    for (v, d) in dv.t.iter().zip(&dv.u) {
        if *d != 0.0 {
            lv.push(g.ln_abs_big_v(*v));
            lf.push(d.abs().ln() + g.kappa1 * v);
        }
    }
    Ok((lv, lf))
}
