//! Continuation of μ below the Cauchy horizon with one artificial horizon at r0.
//!
//! Work with f = r^{-p} μ (p = 2 for the static families, p = 0 for KdS). Below
//! r_g = r1 − 2δ the derivative f' is blended over [r_g − δ, r_g] into the linear
//! function −A (r − r_c) by a degree-9 smoothstep, and f_* is the matching
//! downward parabola below the blend. A is fixed by f_*(r0) = 0, so f_* has a
//! single maximum at r_c and a single simple zero at r0.

use serde::Serialize;

use super::horizons::{horizon_data, HorizonData, HorizonOptions};
use super::params::{Family, MuValue, RadialProfile, SpacetimeParams};
use super::SpacetimeError;
use crate::numerics::quad::GaussLegendre;
use crate::numerics::smooth::step9;

#[derive(Debug, Clone, Serialize)]
pub struct ExtendedProfile {
    pub base: SpacetimeParams,
    pub horizons: HorizonData,
    pub r0: f64,
    /// Critical point of r^{-2} μ_* in (r0, r1).
    pub r_p_star: f64,
    pub delta: f64,
    pub r_glue: f64,
    pub r_blend: f64,
    pub curvature: f64,
    power: i32,
    f_at_blend: f64,
    #[serde(skip)]
    gl: GaussLegendre,
}

const APEX_FRACTIONS: [f64; 4] = [0.75, 0.85, 0.92, 0.96];

/// δ = 0.05 · min(r1, r2 − r1, r3 − r2).
pub(crate) fn default_delta(h: &HorizonData) -> f64 {
    let mut radii: Vec<f64> = h.roots.iter().map(|r| r.radius).collect();
    radii.insert(0, 0.0);
    let gap = radii.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    0.05 * gap
}

pub fn extend_mu(
    params: &SpacetimeParams,
    r0: Option<f64>,
    delta: Option<f64>,
) -> Result<ExtendedProfile, SpacetimeError> {
    if !matches!(params.family, Family::Rnds | Family::Kds) {
        return Err(SpacetimeError::Extension(format!(
            "{} has no Cauchy horizon to extend past",
            params.family.name()
        )));
    }
    let horizons = horizon_data(params, &HorizonOptions::default())?;
    let r1 = horizons
        .radius(1)
        .ok_or_else(|| SpacetimeError::Extension("no Cauchy horizon (charge or spin is zero)".into()))?;
    let delta = delta.unwrap_or_else(|| default_delta(&horizons));
    if !(delta > 0.0) {
        return Err(SpacetimeError::Extension(format!("delta must be positive, got {delta}")));
    }
    let r0 = r0.unwrap_or(0.5 * r1);
    if !(r0 > 0.0 && r0 < r1 - 3.0 * delta) {
        return Err(SpacetimeError::Extension(format!(
            "need 0 < r0 < r1 − 3δ, got r0 = {r0}, r1 = {r1}, δ = {delta}"
        )));
    }
    let power = if params.family == Family::Kds { 0 } else { 2 };
    let r_glue = r1 - 2.0 * delta;
    let r_blend = r_glue - delta;
    let gl = GaussLegendre::new(24);

    let mut prof = ExtendedProfile {
        base: *params,
        horizons,
        r0,
        r_p_star: f64::NAN,
        delta,
        r_glue,
        r_blend,
        curvature: 0.0,
        power,
        f_at_blend: 0.0,
        gl,
    };
    let f_glue = prof.base_f(r_glue).0;
    let chi_fprime = prof.gl.integrate(r_blend, r_glue, |s| prof.blend_weight(s).0 * prof.base_f(s).1);
    let c0 = f_glue - chi_fprime;
    for frac in APEX_FRACTIONS {
        let apex = r0 + frac * (r_blend - r0);
        let c1 = prof.gl.integrate(r_blend, r_glue, |s| (1.0 - prof.blend_weight(s).0) * (s - apex))
            + 0.5 * (r_blend - apex).powi(2);
        let d = apex - r0;
        let denom = 0.5 * d * d - c1;
        if denom > 0.05 * 0.5 * d * d {
            let a = c0 / denom;
            if a > 0.0 {
                prof.curvature = a;
                prof.r_p_star = apex;
                prof.f_at_blend = c0 + a * c1 - 0.5 * a * (r_blend - apex).powi(2);
                return Ok(prof);
            }
        }
    }
    Err(SpacetimeError::Extension(format!(
        "no admissible parabola between r0 = {r0} and the blend band starting at {r_blend}"
    )))
}

impl ExtendedProfile {
    fn base_f(&self, r: f64) -> (f64, f64, f64) {
        let m = self.base.profile(r);
        let p = self.power as f64;
        let rp = r.powi(-self.power);
        let f = rp * m.value;
        let f1 = rp * (m.d1 - p * m.value / r);
        let f2 = rp * (m.d2 - 2.0 * p * m.d1 / r + p * (p + 1.0) * m.value / (r * r));
        (f, f1, f2)
    }

    /// χ and dχ/dr; χ = 0 at r_blend, 1 at r_glue.
    fn blend_weight(&self, r: f64) -> (f64, f64) {
        let w = self.r_glue - self.r_blend;
        let (s, ds, _) = step9((r - self.r_blend) / w);
        (s, ds / w)
    }

    /// Blended derivative of f_* and its derivative on the blend band.
    fn blended(&self, r: f64) -> (f64, f64) {
        let (_, f1, f2) = self.base_f(r);
        let (chi, dchi) = self.blend_weight(r);
        let k = -self.curvature * (r - self.r_p_star);
        let g = chi * f1 + (1.0 - chi) * k;
        let dg = dchi * f1 + chi * f2 - dchi * k - (1.0 - chi) * self.curvature;
        (g, dg)
    }

    fn star_f(&self, r: f64) -> (f64, f64, f64) {
        if r >= self.r_glue {
            return self.base_f(r);
        }
        if r >= self.r_blend {
            let f_glue = self.base_f(self.r_glue).0;
            let tail = self.gl.integrate(r, self.r_glue, |s| self.blended(s).0);
            let (g, dg) = self.blended(r);
            return (f_glue - tail, g, dg);
        }
        let a = self.curvature;
        let x = r - self.r_p_star;
        let xb = self.r_blend - self.r_p_star;
        (self.f_at_blend + 0.5 * a * (xb * xb - x * x), -a * x, -a)
    }

    pub fn r1(&self) -> f64 {
        self.horizons.radius(1).expect("extension requires a Cauchy horizon")
    }

    /// Radii of all horizons of μ_*, with r0 first.
    pub fn horizon_radii(&self) -> Vec<f64> {
        std::iter::once(self.r0).chain(self.horizons.roots.iter().map(|h| h.radius)).collect()
    }

    pub fn mu_star(&self, r: f64) -> Result<MuValue, SpacetimeError> {
        if !(r > 0.0) {
            return Err(SpacetimeError::Domain(r));
        }
        Ok(self.profile(r))
    }
}

impl RadialProfile for ExtendedProfile {
    fn profile(&self, r: f64) -> MuValue {
        if r >= self.r_glue {
            return self.base.profile(r);
        }
        let (f, f1, f2) = self.star_f(r);
        let p = self.power as f64;
        let rp = r.powi(self.power);
        MuValue {
            value: rp * f,
            d1: rp * (f1 + p * f / r),
            d2: rp * (f2 + 2.0 * p * f1 / r + p * (p - 1.0) * f / (r * r)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile() -> ExtendedProfile {
        extend_mu(&SpacetimeParams::rnds(0.02, 1.0, 0.5), None, None).unwrap()
    }

    #[test]
    fn identical_above_glue_point() {
        let p = profile();
        let r = p.r1() - p.delta;
        assert_eq!(p.profile(r), p.base.profile(r));
    }

    #[test]
    fn zero_at_r0() {
        let p = profile();
        let v = p.profile(p.r0);
        assert!(v.value.abs() < 1e-12, "{}", v.value);
        assert!(v.d1 > 0.0);
    }

    #[test]
    fn derivatives_consistent_across_pieces() {
        let p = profile();
        let h = 1e-7;
        let lo = p.r0 * 0.8;
        let hi = p.r1();
        for i in 0..200 {
            let r = lo + (hi - lo) * (i as f64 + 0.5) / 200.0;
            let fd = (p.profile(r + h).value - p.profile(r - h).value) / (2.0 * h);
            let fdd = (p.profile(r + h).d1 - p.profile(r - h).d1) / (2.0 * h);
            let v = p.profile(r);
            assert!((fd - v.d1).abs() < 1e-5 * (1.0 + v.d1.abs()), "r={r}: {fd} vs {}", v.d1);
            assert!((fdd - v.d2).abs() < 1e-4 * (1.0 + v.d2.abs()), "r={r}: {fdd} vs {}", v.d2);
        }
    }

    #[test]
    fn rejects_r0_too_close() {
        let p = SpacetimeParams::rnds(0.02, 1.0, 0.5);
        let base = profile();
        let r0 = base.r1() - 2.0 * base.delta;
        assert!(matches!(extend_mu(&p, Some(r0), None), Err(SpacetimeError::Extension(_))));
        assert!(extend_mu(&SpacetimeParams::rnds(0.02, 1.0, 0.0), None, None).is_err());
    }

    #[test]
    fn kds_extension_is_admissible() {
        let p = extend_mu(&SpacetimeParams::kds(0.02, 1.0, 0.3), None, None).unwrap();
        assert!(p.profile(p.r0).value.abs() < 1e-12);
        assert!(p.profile(0.5 * (p.r0 + p.r1())).value > 0.0);
        assert!(p.profile(0.9 * p.r0).value < 0.0);
    }
}
