use serde::{Deserialize, Serialize};

use super::params::{Family, SpacetimeParams};
use super::SpacetimeError;
use crate::numerics::roots::{bisect, newton_bisect};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NondegeneracyReport {
    pub nondegenerate: bool,
    pub reason: String,
    /// Intervals each containing exactly one sign change of μ.
    pub brackets: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonOptions {
    /// Residual tolerance relative to the floating-point scale of μ at the root.
    pub tol: f64,
    /// Minimum admissible distance between two roots.
    pub min_separation: f64,
    /// Roots with |μ'| below this are rejected as degenerate.
    pub slope_floor: f64,
}

impl Default for HorizonOptions {
    fn default() -> Self {
        Self { tol: 1e-12, min_separation: 1e-9, slope_floor: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonRoot {
    /// 1 = Cauchy, 2 = event, 3 = cosmological.
    pub index: u8,
    pub radius: f64,
    /// μ'(r_j), or μ̃'(r_j) for KdS.
    pub slope: f64,
    pub kappa: Option<f64>,
    pub beta: Option<f64>,
}

impl HorizonRoot {
    /// s_j = −sgn μ'(r_j).
    pub fn sign(&self) -> f64 {
        -self.slope.signum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trapping {
    pub r_p: f64,
    pub nu_min: f64,
    pub gamma0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonData {
    pub params: SpacetimeParams,
    pub roots: Vec<HorizonRoot>,
    pub trapping: Option<Trapping>,
}

impl HorizonData {
    pub fn root(&self, index: u8) -> Option<&HorizonRoot> {
        self.roots.iter().find(|h| h.index == index)
    }

    pub fn radius(&self, index: u8) -> Option<f64> {
        self.root(index).map(|h| h.radius)
    }

    pub fn kappa(&self, index: u8) -> Option<f64> {
        self.root(index).and_then(|h| h.kappa)
    }

    pub fn beta(&self, index: u8) -> Option<f64> {
        self.root(index).and_then(|h| h.beta)
    }
}

fn expand_until_negative(params: &SpacetimeParams, start: f64, f: impl Fn(&SpacetimeParams, f64) -> f64) -> f64 {
    let mut r = start.max(1e-3);
    for _ in 0..200 {
        if f(params, r) < 0.0 {
            return r;
        }
        r *= 2.0;
    }
    r
}

/// True iff μ has three simple positive roots; for an uncharged (resp. non-rotating)
/// black hole this is the closed-form predicate 9ΛM² < 1.
pub fn check_nondegenerate(params: &SpacetimeParams) -> NondegeneracyReport {
    let fail = |reason: String| NondegeneracyReport { nondegenerate: false, reason, brackets: vec![] };
    if let Err(e) = params.validate() {
        return fail(e.to_string());
    }
    let m = params.mass;
    match params.family {
        Family::DeSitter => {
            let r3 = (1.0 / params.lambda_reduced()).sqrt();
            return NondegeneracyReport {
                nondegenerate: true,
                reason: "single cosmological horizon".into(),
                brackets: vec![(0.5 * r3, 2.0 * r3)],
            };
        }
        Family::RnFlat => {
            let q = params.charge;
            return if q == 0.0 {
                fail("inner root sits at r = 0".into())
            } else if q >= m {
                fail(if q == m { "extremal double root".into() } else { "no real roots".into() })
            } else {
                NondegeneracyReport {
                    nondegenerate: true,
                    reason: "two simple roots".into(),
                    brackets: vec![(0.0, m), (m, 2.0 * m)],
                }
            };
        }
        Family::Rnds | Family::Kds => {}
    }
    let lam = params.lambda_reduced();
    let (c, b) = params.quartic();
    if c == 0.0 {
        let ok = 9.0 * params.lambda * m * m < 1.0;
        if !ok {
            return fail(format!("9ΛM² = {} ≥ 1", 9.0 * params.lambda * m * m));
        }
        // Δ = r·(−λr³ + r − 2M); the cubic factor peaks at √(1/(3λ))
        let cubic = |_: &SpacetimeParams, r: f64| -lam * r * r * r + b * r - 2.0 * m;
        let rc = (b / (3.0 * lam)).sqrt();
        let hi = expand_until_negative(params, 2.0 * rc, cubic);
        return NondegeneracyReport {
            nondegenerate: true,
            reason: "9ΛM² < 1 (two positive roots, r = 0 is the third)".into(),
            brackets: vec![(0.0, rc), (rc, hi)],
        };
    }
    if b <= 0.0 {
        return fail("1 − λa² ≤ 0".into());
    }
    // Δ' is concave on r > 0 with its maximum at the inflection point of Δ
    let ddelta = |p: &SpacetimeParams, r: f64| p.delta(r).1;
    let rc = (b / (6.0 * lam)).sqrt();
    if ddelta(params, rc) <= 0.0 {
        return fail("Δ has no interior critical points: a single positive root".into());
    }
    let p1 = match bisect(|r| ddelta(params, r), 0.0, rc, 1e-15) {
        Ok(v) => v,
        Err(e) => return fail(e.to_string()),
    };
    let hi = expand_until_negative(params, 2.0 * rc, ddelta);
    let p2 = match bisect(|r| ddelta(params, r), rc, hi, 1e-15) {
        Ok(v) => v,
        Err(e) => return fail(e.to_string()),
    };
    let (d1, d2) = (params.delta(p1).0, params.delta(p2).0);
    if !(d1 < 0.0 && d2 > 0.0) {
        return fail(format!("critical values Δ(p1) = {d1:e}, Δ(p2) = {d2:e} do not straddle zero"));
    }
    let outer = expand_until_negative(params, 2.0 * p2, |p, r| p.delta(r).0);
    NondegeneracyReport {
        nondegenerate: true,
        reason: "three simple positive roots".into(),
        brackets: vec![(0.0, p1), (p1, p2), (p2, outer)],
    }
}

fn root_in(params: &SpacetimeParams, lo: f64, hi: f64) -> Result<f64, SpacetimeError> {
    let f = |r: f64| {
        let (v, d, _) = params.delta(r);
        (v, d)
    };
    newton_bisect(f, lo, hi).map_err(|e| SpacetimeError::NoBracket(e.to_string()))
}

/// Horizon radii, ascending, with μ' at each root. κ and β are left unset.
pub fn find_horizons(params: &SpacetimeParams, opts: &HorizonOptions) -> Result<HorizonData, SpacetimeError> {
    params.validate()?;
    let m = params.mass;
    let mut roots: Vec<(u8, f64)> = Vec::new();
    match params.family {
        Family::RnFlat => {
            let q = params.charge;
            if q == m {
                return Err(SpacetimeError::DegenerateRoots("extremal: M = Q".into()));
            }
            if q > m {
                return Err(SpacetimeError::NoBracket("Q > M: no horizons".into()));
            }
            if q == 0.0 {
                return Err(SpacetimeError::NoBracket("Q = 0: inner root at r = 0".into()));
            }
            let root = ((m - q) * (m + q)).sqrt();
            roots.push((1, q * q / (m + root)));
            roots.push((2, m + root));
        }
        Family::DeSitter => {
            roots.push((3, (1.0 / params.lambda_reduced()).sqrt()));
        }
        Family::Rnds | Family::Kds => {
            let report = check_nondegenerate(params);
            if !report.nondegenerate {
                let (c, _) = params.quartic();
                let boundary = c == 0.0 && 9.0 * params.lambda * m * m == 1.0;
                let close = report.reason.contains("straddle") || boundary;
                return Err(if close {
                    SpacetimeError::DegenerateRoots(report.reason)
                } else {
                    SpacetimeError::NoBracket(report.reason)
                });
            }
            let first = if report.brackets.len() == 3 { 1 } else { 2 };
            for (k, (lo, hi)) in report.brackets.iter().enumerate() {
                // r = 0 is a root of Δ when c = 0: start brackets slightly inside
                let lo = if *lo == 0.0 { hi * 1e-12 } else { *lo };
                roots.push((first + k as u8, root_in(params, lo, *hi)?));
            }
        }
    }
    for w in roots.windows(2) {
        if w[1].1 - w[0].1 < opts.min_separation {
            return Err(SpacetimeError::DegenerateRoots(format!(
                "roots {} and {} closer than {}",
                w[0].1, w[1].1, opts.min_separation
            )));
        }
    }
    let mut out = Vec::with_capacity(roots.len());
    for (index, radius) in roots {
        let v = super::mu(params, radius)?;
        let scale = params.mu_scale(radius).max(1.0);
        if v.value.abs() > opts.tol * scale {
            return Err(SpacetimeError::NoBracket(format!(
                "residual |μ({radius})| = {:e} above tolerance",
                v.value.abs()
            )));
        }
        if v.d1.abs() < opts.slope_floor {
            return Err(SpacetimeError::DegenerateRoots(format!("|μ'({radius})| = {:e}", v.d1.abs())));
        }
        out.push(HorizonRoot { index, radius, slope: v.d1, kappa: None, beta: None });
    }
    Ok(HorizonData { params: *params, roots: out, trapping: None })
}

/// Fills β_j (the ratio of temporal to fiber e-folding rates) and κ_j = 1/β_j.
pub fn thresholds(params: &SpacetimeParams, horizons: &HorizonData) -> Result<HorizonData, SpacetimeError> {
    let mut out = horizons.clone();
    let gamma = params.gamma();
    for h in &mut out.roots {
        if h.slope.abs() < f64::MIN_POSITIVE || !h.slope.is_finite() {
            return Err(SpacetimeError::DegenerateRoots(format!("μ'(r_{}) = 0", h.index)));
        }
        let beta = match params.family {
            Family::Kds => {
                2.0 * (1.0 + gamma) * (h.radius * h.radius + params.spin * params.spin) / h.slope.abs()
            }
            _ => 2.0 / h.slope.abs(),
        };
        h.beta = Some(beta);
        h.kappa = Some(1.0 / beta);
    }
    Ok(out)
}

/// Photon sphere radius (larger root of r² − 3Mr + 2Q²), the normal expansion
/// rate of the trapped set and the gap bound γ₀ = μ(r_P)ν_min/4.
pub fn photon_sphere(params: &SpacetimeParams) -> Result<Trapping, SpacetimeError> {
    params.validate()?;
    if !matches!(params.family, Family::Rnds | Family::RnFlat) {
        return Err(SpacetimeError::NoPhotonSphere(format!("not defined for {}", params.family.name())));
    }
    let m = params.mass;
    let q = params.charge;
    let disc = 9.0 * m * m - 8.0 * q * q;
    if disc < 0.0 {
        return Err(SpacetimeError::NoPhotonSphere("9M² < 8Q²".into()));
    }
    let r_p = 0.5 * (3.0 * m + disc.sqrt());
    let mu_p = super::mu(params, r_p)?.value;
    if mu_p <= 0.0 {
        return Err(SpacetimeError::NoPhotonSphere(format!("μ(r_P) = {mu_p} is not positive")));
    }
    let nu_min = (2.0 / r_p) * ((2.0 - 3.0 * m / r_p) / mu_p).sqrt();
    Ok(Trapping { r_p, nu_min, gamma0: mu_p * nu_min / 4.0 })
}

/// Horizons, thresholds and (where defined) the photon sphere in one call.
pub fn horizon_data(params: &SpacetimeParams, opts: &HorizonOptions) -> Result<HorizonData, SpacetimeError> {
    let h = find_horizons(params, opts)?;
    let mut h = thresholds(params, &h)?;
    if matches!(params.family, Family::Rnds | Family::RnFlat) {
        h.trapping = photon_sphere(params).ok();
    }
    Ok(h)
}
