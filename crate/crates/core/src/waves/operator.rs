use serde::Serialize;

use super::WaveError;
use crate::spacetime::{ChartData, MetricBlock, SpacetimeParams};

/// P u = r⁻²∂_a(r²G^{ab}∂_b u) + (ℓ(ℓ+1)/r² + m²)u for a mode u(t_*, r) Y_ℓm, so that
/// (□_g − m²)(u Y_ℓm) = −(P u) Y_ℓm; here G^{tt} = −e, G^{tr} = φ, G^{rr} = −μ and
/// |g|^{1/2} = r² sin θ.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    charts: ChartData,
    pub ell: u32,
    pub mass2: f64,
}

/// P u = tt·u_tt + tr·u_tr + t·u_t + rr·u_rr + r·u_r + zero·u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeCoefficients {
    pub tt: f64,
    pub tr: f64,
    pub t: f64,
    pub rr: f64,
    pub r: f64,
    pub zero: f64,
}

impl ModeCoefficients {
    /// Applies P to derivative data [u, u_t, u_r, u_tt, u_tr, u_rr].
    pub fn apply(&self, d: [f64; 6]) -> f64 {
        self.tt * d[3] + self.tr * d[4] + self.t * d[1] + self.rr * d[5] + self.r * d[2] + self.zero * d[0]
    }
}

pub fn mode_reduce(params: &SpacetimeParams, charts: &ChartData, ell: u32, mass2: f64) -> Result<ModeOperator, WaveError> {
    params.validate()?;
    if !(mass2 >= 0.0) || !mass2.is_finite() {
        return Err(WaveError::Config(format!("m² must be non-negative, got {mass2}")));
    }
    Ok(ModeOperator { charts: charts.clone(), ell, mass2 })
}

impl ModeOperator {
    pub fn charts(&self) -> &ChartData {
        &self.charts
    }

    /// (G^{tt}, G^{tr}, G^{rr}) at r.
    pub fn dual(&self, r: f64) -> Result<[f64; 3], WaveError> {
        let p = self.point(r)?;
        Ok([-p.e, p.phi, -p.mu])
    }

    pub fn potential(&self, r: f64) -> f64 {
        let l = f64::from(self.ell);
        l * (l + 1.0) / (r * r) + self.mass2
    }

    pub fn coefficients(&self, r: f64) -> Result<ModeCoefficients, WaveError> {
        let p = self.point(r)?;
        Ok(ModeCoefficients {
            tt: -p.e,
            tr: 2.0 * p.phi,
            t: p.dphi + 2.0 * p.phi / r,
            rr: -p.mu,
            r: -(p.dmu + 2.0 * p.mu / r),
            zero: self.potential(r),
        })
    }

    fn point(&self, r: f64) -> Result<crate::spacetime::ChartPoint, WaveError> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(WaveError::OutOfDomain(format!("r = {r} outside the chart")));
        }
        Ok(self.charts.block(r))
    }
}
