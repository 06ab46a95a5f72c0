use serde::{Deserialize, Serialize};

use super::SpacetimeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Charged black hole with positive cosmological constant.
    #[serde(rename = "RNdS")]
    Rnds,
    /// Rotating black hole with positive cosmological constant.
    #[serde(rename = "KdS")]
    Kds,
    /// Charged black hole, no cosmological constant.
    #[serde(rename = "RN_flat")]
    RnFlat,
    /// Pure de Sitter space.
    #[serde(rename = "dS")]
    DeSitter,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Rnds => "RNdS",
            Family::Kds => "KdS",
            Family::RnFlat => "RN_flat",
            Family::DeSitter => "dS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpacetimeParams {
    pub family: Family,
    /// Cosmological constant Λ.
    pub lambda: f64,
    #[serde(default)]
    pub mass: f64,
    #[serde(default)]
    pub charge: f64,
    #[serde(default)]
    pub spin: f64,
}

/// Value of a radial profile with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuValue {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// A radial function μ(r) used to build the (t, r) block of the metric.
pub trait RadialProfile: Send + Sync {
    fn profile(&self, r: f64) -> MuValue;
}

impl SpacetimeParams {
    pub fn rnds(lambda: f64, mass: f64, charge: f64) -> Self {
        Self { family: Family::Rnds, lambda, mass, charge, spin: 0.0 }
    }

    pub fn kds(lambda: f64, mass: f64, spin: f64) -> Self {
        Self { family: Family::Kds, lambda, mass, charge: 0.0, spin }
    }

    pub fn rn_flat(mass: f64, charge: f64) -> Self {
        Self { family: Family::RnFlat, lambda: 0.0, mass, charge, spin: 0.0 }
    }

    pub fn de_sitter(lambda: f64) -> Self {
        Self { family: Family::DeSitter, lambda, mass: 0.0, charge: 0.0, spin: 0.0 }
    }

    /// λ = Λ/3.
    pub fn lambda_reduced(&self) -> f64 {
        self.lambda / 3.0
    }

    /// γ = Λa²/3.
    pub fn gamma(&self) -> f64 {
        self.lambda * self.spin * self.spin / 3.0
    }

    pub fn validate(&self) -> Result<(), SpacetimeError> {
        let bad = |m: &str| Err(SpacetimeError::InvalidParams(m.to_string()));
        if ![self.lambda, self.mass, self.charge, self.spin].iter().all(|v| v.is_finite()) {
            return bad("non-finite parameter");
        }
        if self.charge < 0.0 {
            return bad("charge must be non-negative");
        }
        match self.family {
            Family::Rnds | Family::Kds => {
                if self.lambda <= 0.0 {
                    return bad("cosmological constant must be positive");
                }
                if self.mass <= 0.0 {
                    return bad("mass must be positive");
                }
            }
            Family::RnFlat => {
                if self.lambda != 0.0 {
                    return bad("RN_flat requires lambda = 0");
                }
                if self.mass <= 0.0 {
                    return bad("mass must be positive");
                }
            }
            Family::DeSitter => {
                if self.lambda <= 0.0 {
                    return bad("cosmological constant must be positive");
                }
                if self.mass != 0.0 || self.charge != 0.0 {
                    return bad("dS requires mass = charge = 0");
                }
            }
        }
        if self.family == Family::Kds && self.charge != 0.0 {
            return bad("KdS carries no charge");
        }
        if self.family != Family::Kds && self.spin != 0.0 {
            return bad("spin is only meaningful for KdS");
        }
        Ok(())
    }

    /// Coefficients (c, b) of Δ(r) = −λr⁴ + b r² − 2M r + c, whose positive roots
    /// are the horizons. Δ = r²μ for the static families and Δ = μ̃ for KdS.
    pub(crate) fn quartic(&self) -> (f64, f64) {
        let lam = self.lambda_reduced();
        match self.family {
            Family::Kds => (self.spin * self.spin, 1.0 - lam * self.spin * self.spin),
            _ => (self.charge * self.charge, 1.0),
        }
    }

    /// Δ, Δ', Δ''.
    pub(crate) fn delta(&self, r: f64) -> (f64, f64, f64) {
        let lam = self.lambda_reduced();
        let (c, b) = self.quartic();
        let m = self.mass;
        let r2 = r * r;
        (
            -lam * r2 * r2 + b * r2 - 2.0 * m * r + c,
            -4.0 * lam * r2 * r + 2.0 * b * r - 2.0 * m,
            -12.0 * lam * r2 + 2.0 * b,
        )
    }

    /// Sum of absolute values of the terms of μ at r: the floating-point scale of μ(r).
    pub fn mu_scale(&self, r: f64) -> f64 {
        let lam = self.lambda_reduced();
        match self.family {
            Family::Kds => {
                let a2 = self.spin * self.spin;
                r * r + lam * r.powi(4) + a2 + lam * a2 * r * r + 2.0 * self.mass * r
            }
            _ => {
                1.0 + 2.0 * self.mass / r + self.charge * self.charge / (r * r) + lam * r * r
            }
        }
    }

    fn eval_unchecked(&self, r: f64) -> MuValue {
        let lam = self.lambda_reduced();
        let m = self.mass;
        match self.family {
            Family::Kds => {
                let (value, d1, d2) = self.delta(r);
                MuValue { value, d1, d2 }
            }
            _ => {
                let q2 = self.charge * self.charge;
                let r2 = r * r;
                let r3 = r2 * r;
                MuValue {
                    value: 1.0 - 2.0 * m / r + q2 / r2 - lam * r2,
                    d1: 2.0 * m / r2 - 2.0 * q2 / r3 - 2.0 * lam * r,
                    d2: -4.0 * m / r3 + 6.0 * q2 / (r2 * r2) - 2.0 * lam,
                }
            }
        }
    }
}

impl RadialProfile for SpacetimeParams {
    fn profile(&self, r: f64) -> MuValue {
        self.eval_unchecked(r)
    }
}

/// μ(r) for the static families, μ̃(r) for KdS, with two derivatives.
pub fn mu(params: &SpacetimeParams, r: f64) -> Result<MuValue, SpacetimeError> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(SpacetimeError::Domain(r));
    }
    Ok(params.eval_unchecked(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_space_is_one() {
        let p = SpacetimeParams { family: Family::RnFlat, lambda: 0.0, mass: 0.0, charge: 0.0, spin: 0.0 };
        assert_eq!(mu(&p, 1.0).unwrap().value, 1.0);
    }

    #[test]
    fn extremal_rn_vanishes_at_one() {
        let p = SpacetimeParams::rn_flat(1.0, 1.0);
        let v = mu(&p, 1.0).unwrap();
        assert_eq!(v.value, 0.0);
        assert_eq!(v.d1, 0.0);
    }

    #[test]
    fn direct_substitution() {
        // 1 - 2/2 + 0.25/4 - 0.02*4 with λ = 0.06/3
        let p = SpacetimeParams::rnds(0.06, 1.0, 0.5);
        let expected = 1.0 - 1.0 + 0.0625 - 0.08;
        assert!((mu(&p, 2.0).unwrap().value - expected).abs() < 1e-14);
    }

    #[test]
    fn domain_error() {
        let p = SpacetimeParams::rnds(0.06, 1.0, 0.5);
        assert!(matches!(mu(&p, 0.0), Err(SpacetimeError::Domain(_))));
        assert!(matches!(mu(&p, -1.0), Err(SpacetimeError::Domain(_))));
    }

    #[test]
    fn kds_matches_product_form() {
        let p = SpacetimeParams::kds(0.03, 1.0, 0.4);
        for r in [0.1, 0.7, 2.0, 9.0] {
            let direct = (r * r + 0.16) * (1.0 - 0.03 * r * r / 3.0) - 2.0 * r;
            assert!((mu(&p, r).unwrap().value - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for p in [SpacetimeParams::rnds(0.02, 1.0, 0.5), SpacetimeParams::kds(0.02, 1.0, 0.3)] {
            for r in [0.3, 1.1, 4.0] {
                let h = 1e-5;
                let f = |x: f64| mu(&p, x).unwrap();
                let d1 = (f(r + h).value - f(r - h).value) / (2.0 * h);
                let d2 = (f(r + h).d1 - f(r - h).d1) / (2.0 * h);
                assert!((f(r).d1 - d1).abs() < 1e-6 * (1.0 + d1.abs()));
                assert!((f(r).d2 - d2).abs() < 1e-5 * (1.0 + d2.abs()));
            }
        }
    }

    #[test]
    fn validation() {
        assert!(SpacetimeParams::rnds(0.0, 1.0, 0.5).validate().is_err());
        assert!(SpacetimeParams::rnds(0.02, -1.0, 0.5).validate().is_err());
        assert!(SpacetimeParams::rn_flat(1.0, -0.1).validate().is_err());
        assert!(SpacetimeParams::de_sitter(3.0).validate().is_ok());
        let mut p = SpacetimeParams::kds(0.02, 1.0, 0.1);
        p.charge = 0.1;
        assert!(p.validate().is_err());
    }

    #[test]
    fn family_names_round_trip() {
        let p = SpacetimeParams::rn_flat(1.0, 0.8);
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"RN_flat\""));
        let back: SpacetimeParams = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
