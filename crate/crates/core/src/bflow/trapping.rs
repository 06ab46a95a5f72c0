use std::sync::Arc;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use super::{BPhasePoint, FlowError, FlowOptions, RadialFlow, StaticChart};
use crate::numerics::linear_fit;
use crate::spacetime::{photon_sphere, MetricBlock, SpacetimeParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrappingLinearization {
    pub r_p: f64,
    /// Jacobian of (ṙ, ξ̇) in (r, ξ) at the trapped point, σ = 1.
    pub jacobian: [[f64; 2]; 2],
    pub eigenvalues: [f64; 2],
    /// Positive eigenvalue.
    pub rate: f64,
    /// Closed-form ν_min for comparison.
    pub nu_min: f64,
}

fn static_flow(params: &SpacetimeParams) -> RadialFlow<StaticChart> {
    RadialFlow::new(StaticChart::new(Arc::new(*params)))
}

/// |L| making (r, ξ = 0, σ) null in static coordinates.
fn shell_momentum(flow: &RadialFlow<StaticChart>, r: f64, sigma: f64) -> f64 {
    let mu = flow.chart().block(r).mu;
    r * sigma.abs() / mu.sqrt()
}

/// Linearization of the flow at (r_P, ξ = 0) with σ = 1 and on-shell L.
pub fn linearize_trapping(params: &SpacetimeParams) -> Result<TrappingLinearization, FlowError> {
    let t = photon_sphere(params)?;
    let flow = static_flow(params);
    let l = shell_momentum(&flow, t.r_p, 1.0);
    let base = [1.0, t.r_p, 0.0, 1.0, 0.0, l];
    let h = 1e-5 * t.r_p;
    let mut jac = Matrix2::zeros();
    for (col, k) in [1usize, 4].into_iter().enumerate() {
        let mut yp = base;
        let mut ym = base;
        yp[k] += h;
        ym[k] -= h;
        let fp = flow.hamiltonian_rhs(&yp);
        let fm = flow.hamiltonian_rhs(&ym);
        for (row, i) in [1usize, 4].into_iter().enumerate() {
            jac[(row, col)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    let eig = jac.complex_eigenvalues();
    if eig.iter().any(|z| z.im.abs() > 1e-8 * jac.norm()) {
        return Err(FlowError::Linearization(format!("trapping is not hyperbolic: {eig}")));
    }
    let mut ev = [eig[0].re, eig[1].re];
    ev.sort_by(f64::total_cmp);
    Ok(TrappingLinearization {
        r_p: t.r_p,
        jacobian: [[jac[(0, 0)], jac[(0, 1)]], [jac[(1, 0)], jac[(1, 1)]]],
        eigenvalues: ev,
        rate: ev[1],
        nu_min: t.nu_min,
    })
}

/// A null point at r_P, ξ = 0, σ = 1 (static chart) that is an exact fixed point of the
/// discrete (r, ξ) dynamics: L is chosen among neighbouring floats so that ξ̇ evaluates to
/// zero, otherwise rounding would be amplified like e^{ν_min s}.
pub fn trapped_datum(params: &SpacetimeParams) -> Result<BPhasePoint, FlowError> {
    let t = photon_sphere(params)?;
    let flow = static_flow(params);
    let mut best = shell_momentum(&flow, t.r_p, 1.0);
    let xi_dot = |l: f64| flow.hamiltonian_rhs(&[1.0, t.r_p, 0.0, 1.0, 0.0, l])[4];
    let mut best_v = xi_dot(best).abs();
    let mut l = best;
    let mut down = best;
    for _ in 0..256 {
        if best_v == 0.0 {
            break;
        }
        l = l.next_up();
        down = down.next_down();
        for cand in [l, down] {
            let v = xi_dot(cand).abs();
            if v < best_v {
                best = cand;
                best_v = v;
            }
        }
    }
    Ok(BPhasePoint { tau0: 1.0, r: t.r_p, angle: 0.0, sigma: 1.0, xi: 0.0, eta: best })
}

/// Growth rate of |r − r_P| for a null orbit released at r_P + `offset` with ξ = 0.
pub fn measure_trapping_growth(params: &SpacetimeParams, offset: f64) -> Result<f64, FlowError> {
    let t = photon_sphere(params)?;
    let flow = static_flow(params);
    let r0 = t.r_p + offset;
    let l = shell_momentum(&flow, r0, 1.0);
    let p0 = BPhasePoint { tau0: 1.0, r: r0, angle: 0.0, sigma: 1.0, xi: 0.0, eta: l };
    let hi = 1e-3_f64.max(1e3 * offset.abs());
    let lo = 20.0 * offset.abs();
    let span = 4.0 * (hi / offset.abs()).ln() / t.nu_min;
    let band = (t.r_p - 10.0 * hi, t.r_p + 10.0 * hi);
    let traj = flow.integrate(p0, &FlowOptions { span, band: Some(band), ..FlowOptions::default() })?;
    let (s, y): (Vec<f64>, Vec<f64>) = traj
        .samples
        .iter()
        .filter(|x| {
            let d = (x.point.r - t.r_p).abs();
            d > lo && d < hi
        })
        .map(|x| (x.s, (x.point.r - t.r_p).abs().ln()))
        .unzip();
    let (_, k, _) = linear_fit(&s, &y).ok_or_else(|| FlowError::Linearization("orbit did not leave r_P".into()))?;
    Ok(k)
}

/// (H_G² r by the chain rule, −2r²μ⁻¹σ²(r⁻²μ)') at a null point with ξ = 0 in static coordinates.
pub fn second_derivative_check(params: &SpacetimeParams, r: f64, sigma: f64) -> Result<(f64, f64), FlowError> {
    let flow = static_flow(params);
    let c = flow.chart().block(r);
    if !(c.mu > 0.0) {
        return Err(FlowError::OutsideChart(format!("r = {r} is not in a static region")));
    }
    let l = shell_momentum(&flow, r, sigma);
    let y = [1.0, r, 0.0, sigma, 0.0, l];
    let f = flow.hamiltonian_rhs(&y);
    let xi = y[4];
    // ṙ = −2φσ − 2μξ
    let drdot_dr = -2.0 * c.dphi * sigma - 2.0 * c.dmu * xi;
    let drdot_dxi = -2.0 * c.mu;
    let drdot_dsigma = -2.0 * c.phi;
    let chain = drdot_dr * f[1] + drdot_dxi * f[4] + drdot_dsigma * f[3];
    let d_mu_r2 = (c.dmu - 2.0 * c.mu / r) / (r * r);
    let formula = -2.0 * r * r / c.mu * sigma * sigma * d_mu_r2;
    Ok((chain, formula))
}
