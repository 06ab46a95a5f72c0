use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::spacetime::{check_nondegenerate, HorizonData, SpacetimeParams};

/// A predicted quantity that is expected rather than proved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conjecture {
    pub label: String,
    pub value: f64,
    pub statement: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub alpha: f64,
    pub k: u32,
    pub beta1: f64,
    /// 1/2 + αβ₁.
    pub sobolev_order: f64,
    /// Order for k-forms, s(α) − k.
    pub form_order: f64,
    /// 2κ₂ > κ₁: the local energy near the Cauchy horizon is finite.
    pub h1_criterion: bool,
    pub blowup_exponent: f64,
    pub conjectured_regularity: Conjecture,
}

/// Regularity predictions at the Cauchy horizon from κ₁, κ₂ (and κ₃ where present)
/// for a spectral gap α.
pub fn regularity_predictors(horizons: &HorizonData, alpha: f64, k: u32) -> RegularityReport {
    let k1 = horizons.kappa(1).unwrap_or(f64::NAN);
    let k2 = horizons.kappa(2).unwrap_or(f64::NAN);
    let k_min = match horizons.kappa(3) {
        Some(k3) => k2.min(k3),
        None => k2,
    };
    let beta1 = 1.0 / k1;
    let s = 0.5 + alpha * beta1;
    RegularityReport {
        alpha,
        k,
        beta1,
        sobolev_order: s,
        form_order: s - f64::from(k),
        h1_criterion: 2.0 * k2 > k1,
        blowup_exponent: k2 / k1 - 1.0,
        conjectured_regularity: Conjecture {
            label: "conjecture".into(),
            value: 0.5 + k_min / k1,
            statement: "no smoother than H^{1/2 + min(κ₂, κ₃)/κ₁} if shallow resonances sit near −iκ_j".into(),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearExtremalDesign {
    pub target: f64,
    pub mass: f64,
    /// Asymptotic seed from 1/2 + 1/(16√ε) = target.
    pub seed_epsilon: f64,
    /// Largest ε (to `tol`, relative) with 1/2 + γ₀β₁ > target; every smaller ε also qualifies.
    pub epsilon: f64,
    pub charge: f64,
    /// 1/2 + γ₀β₁ at ε.
    pub value: f64,
    /// (0, Λ_max): cosmological constants for which (M, Q) keeps three simple horizons.
    pub lambda_window: (f64, f64),
}

/// (γ₀, β₁) at Λ = 0 from the closed forms, Q = M(1 − ε).
pub fn gap_and_threshold(mass: f64, epsilon: f64) -> (f64, f64) {
    let q = mass * (1.0 - epsilon);
    let root = (mass * mass - q * q).max(0.0).sqrt();
    let r_minus = q * q / (mass + root);
    let r_plus = mass + root;
    let kappa1 = (r_plus - r_minus) / (2.0 * r_minus * r_minus);
    let r_p = 0.5 * (3.0 * mass + (9.0 * mass * mass - 8.0 * q * q).sqrt());
    let mu_p = 1.0 - 2.0 * mass / r_p + q * q / (r_p * r_p);
    let nu = (2.0 / r_p) * ((2.0 - 3.0 * mass / r_p) / mu_p).sqrt();
    (mu_p * nu / 4.0, 1.0 / kappa1)
}

fn design_value(mass: f64, epsilon: f64) -> f64 {
    let (g, b) = gap_and_threshold(mass, epsilon);
    0.5 + g * b
}

/// Near-extremal charge for which 1/2 + γ₀β₁ exceeds `target` at Λ = 0.
pub fn near_extremal_design(target: f64, mass: f64, tol: f64) -> Result<NearExtremalDesign, AnalysisError> {
    if !(target > 0.5) {
        return Err(AnalysisError::InvalidInput(format!("target {target} must exceed 1/2")));
    }
    let seed = (1.0 / (16.0 * (target - 0.5))).powi(2);
    let f = |e: f64| design_value(mass, e) - target;
    // the product grows without bound as ε → 0, so bracket from the seed downwards
    let mut lo = seed.min(0.5);
    while f(lo) <= 0.0 {
        lo *= 0.5;
    }
    let mut hi = seed.max(lo);
    while hi < 1.0 - 1e-12 && f(hi) > 0.0 {
        hi = (2.0 * hi).min(1.0 - 1e-12);
    }
    // keep f(lo) > 0 ≥ f(hi) and return the admissible end
    let epsilon = if f(hi) > 0.0 {
        hi
    } else {
        while hi - lo > tol * hi {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    // Λ > 0 lowers μ, so the two inner horizons merge at some Λ_max
    let charge = mass * (1.0 - epsilon);
    let ok = |l: f64| check_nondegenerate(&SpacetimeParams::rnds(l, mass, charge)).nondegenerate;
    let (mut l_lo, mut l_hi) = (0.0, 1.0 / (9.0 * mass * mass));
    for _ in 0..200 {
        let mid = 0.5 * (l_lo + l_hi);
        if ok(mid) {
            l_lo = mid;
        } else {
            l_hi = mid;
        }
        if l_hi - l_lo <= 1e-12 * l_hi {
            break;
        }
    }
    Ok(NearExtremalDesign {
        target,
        mass,
        seed_epsilon: seed,
        epsilon,
        charge,
        value: design_value(mass, epsilon),
        lambda_window: (0.0, l_lo),
    })
}
