use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::{CompactifiedPoint, Component, FlowError, FlowOptions, RadialFlow};
use crate::numerics::linear_fit;
use crate::numerics::roots::newton_bisect;
use crate::spacetime::MetricBlock;

/// Component containing L_{j,±} (`xi_sign` = ±1).
pub fn radial_component(index: u8, xi_sign: f64) -> Component {
    let plus = matches!(index, 1 | 2) == (xi_sign > 0.0);
    if plus {
        Component::Plus
    } else {
        Component::Minus
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialLinearization {
    pub radius: f64,
    pub xi_sign: f64,
    /// Real eigenvalues of the Jacobian in the (r, σ̂, η̂) directions, by increasing modulus.
    pub eigenvalues: [f64; 3],
    /// Mean of the two boundary-tangent rates.
    pub tangent_rate: f64,
    pub normal_rate: f64,
    /// τ₀⁻¹𝖧τ₀ at L_j.
    pub tau_rate: f64,
    /// ρ̂⁻¹𝖧ρ̂ at L_j.
    pub rho_rate: f64,
}

impl RadialLinearization {
    pub fn ratio(&self) -> f64 {
        self.normal_rate / self.tangent_rate
    }

    /// −(τ₀⁻¹𝖧τ₀)/(ρ̂⁻¹𝖧ρ̂).
    pub fn beta(&self) -> f64 {
        -self.tau_rate / self.rho_rate
    }
}

/// Central-difference Jacobian of the rescaled field at ∂L_{j,±} = {τ₀ = ρ̂ = σ̂ = η̂ = 0, r = r_j}.
pub fn linearize_radial<C: MetricBlock>(
    flow: &RadialFlow<C>,
    radius: f64,
    xi_sign: f64,
) -> Result<RadialLinearization, FlowError> {
    let base = [0.0, radius, 0.0, 0.0, 0.0, 0.0];
    let slots = [1usize, 4, 5];
    // the fiber directions enter at most quadratically, so a tiny step is exact there
    let steps = [1e-6 * radius.max(1.0), 1e-9, 1e-9];
    let mut jac = Matrix3::zeros();
    for (col, &k) in slots.iter().enumerate() {
        let h = steps[col];
        let mut yp = base;
        let mut ym = base;
        yp[k] += h;
        ym[k] -= h;
        let fp = flow.rescaled_rhs(&yp, xi_sign);
        let fm = flow.rescaled_rhs(&ym, xi_sign);
        for (row, &i) in slots.iter().enumerate() {
            jac[(row, col)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    if jac.iter().any(|v| !v.is_finite()) {
        return Err(FlowError::Linearization("non-finite Jacobian".into()));
    }
    let eig = jac.complex_eigenvalues();
    let scale = jac.norm();
    let mut ev = [0.0; 3];
    for (slot, z) in ev.iter_mut().zip(eig.iter()) {
        if z.im.abs() > 1e-8 * scale {
            return Err(FlowError::Linearization(format!("complex eigenvalue {z}")));
        }
        *slot = z.re;
    }
    ev.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    if ev[0].abs() < 1e-12 * scale {
        return Err(FlowError::Linearization("singular Jacobian".into()));
    }

    let mut at = base;
    at[0] = 1.0;
    at[3] = 1.0;
    let f = flow.rescaled_rhs(&at, xi_sign);
    Ok(RadialLinearization {
        radius,
        xi_sign,
        eigenvalues: ev,
        tangent_rate: 0.5 * (ev[0] + ev[1]),
        normal_rate: ev[2],
        tau_rate: f[0],
        rho_rate: f[3],
    })
}

/// Ratio of fitted e-folding rates of τ₀ and ρ̂ along the flow started on 𝓛_{j,±}.
pub fn measure_beta<C: MetricBlock>(
    flow: &RadialFlow<C>,
    radius: f64,
    xi_sign: f64,
    span: f64,
) -> Result<f64, FlowError> {
    let q0 = CompactifiedPoint { tau0: 1.0, r: radius, angle: 0.0, rho_hat: 1.0, sigma_hat: 0.0, eta_hat: 0.0, xi_sign };
    let opts = FlowOptions { span, ..FlowOptions::default() };
    let path = flow.integrate_compactified(q0, &opts)?;
    let s: Vec<f64> = path.iter().map(|x| x.0).collect();
    let lt: Vec<f64> = path.iter().map(|x| x.1.tau0.ln()).collect();
    let lr: Vec<f64> = path.iter().map(|x| x.1.rho_hat.ln()).collect();
    let fit = |ys: &[f64]| linear_fit(&s, ys).map(|f| f.1).ok_or_else(|| FlowError::Linearization("fit failed".into()));
    let (kt, kr) = (fit(&lt)?, fit(&lr)?);
    Ok(-kt / kr)
}

/// Rate of ρ₀ = σ̂² + η̂² along a fiber-infinity trajectory converging to ∂L_{j,±}.
/// Starts on-shell at the given (σ̂, η̂) with r solved near r_j.
pub fn quadratic_defining_rate<C: MetricBlock>(
    flow: &RadialFlow<C>,
    radius: f64,
    xi_sign: f64,
    sigma_hat: f64,
    eta_hat: f64,
) -> Result<f64, FlowError> {
    let shell = |r: f64| {
        let c = flow.chart().block(r);
        let g = -c.e * sigma_hat * sigma_hat - 2.0 * xi_sign * c.phi * sigma_hat - c.mu - eta_hat * eta_hat / (r * r);
        let dg = -c.de * sigma_hat * sigma_hat - 2.0 * xi_sign * c.dphi * sigma_hat - c.dmu
            + 2.0 * eta_hat * eta_hat / (r * r * r);
        (g, dg)
    };
    let w = 0.05 * radius;
    let r0 = newton_bisect(shell, radius - w, radius + w)
        .map_err(|e| FlowError::Linearization(format!("no on-shell radius: {e}")))?;
    let dmu = flow.chart().block(radius).dmu;
    let dir = if -xi_sign * dmu < 0.0 { 1.0 } else { -1.0 };
    let q0 = CompactifiedPoint { tau0: 0.0, r: r0, angle: 0.0, rho_hat: 0.0, sigma_hat, eta_hat, xi_sign };
    let rho_start = q0.rho0();
    let span = dir * 40.0 / dmu.abs();
    let opts = FlowOptions { span, rtol: 1e-12, atol: 1e-30, ..FlowOptions::default() };
    let path = flow.integrate_compactified(q0, &opts)?;
    // fit where ρ₀ has dropped by 10⁴–10¹² from its start, past the transient
    let (s, l): (Vec<f64>, Vec<f64>) = path
        .iter()
        .filter(|(_, q)| {
            let ratio = q.rho0() / rho_start;
            ratio < 1e-4 && ratio > 1e-12
        })
        .map(|(s, q)| (s.abs(), q.rho0().ln()))
        .unzip();
    let (_, k, _) = linear_fit(&s, &l).ok_or_else(|| FlowError::Linearization("too few samples".into()))?;
    Ok(k.abs())
}
