//! Horizon-penetrating (t_*, r) charts.
//!
//! Near every horizon r_j the time function is t_* = t − F with
//! F' = s_j (μ⁻¹ + c_j). Everything is encoded by φ = s_j (1 + μ c_j) and
//! e = 2c_j + μ c_j² = (φ² − 1)/μ:
//!
//! ```text
//! g = μ dt_*² + 2φ dt_* dr + e dr² − r² dω²,   det(t_*, r block) = −1,
//! G = −e ∂_t² + 2φ ∂_t ∂_r − μ ∂_r² − r⁻² Δ_ω.
//! ```
//!
//! Regions, for half-width δ: static bands (c = −μ⁻¹, φ = 0) where μ > 0,
//! bands with c = μ⁻¹ (φ = 2s_j) just beyond a horizon where μ < 0, a smooth
//! blend of c_j in |r − r_j| ≤ δ, and inside a μ < 0 gap between two horizons
//! a transition of φ from 2s_a to 2s_b on which dr rather than dt_* is timelike.

use std::sync::Arc;

use serde::Serialize;

use super::extension::{default_delta, ExtendedProfile};
use super::horizons::{horizon_data, HorizonOptions};
use super::params::{RadialProfile, SpacetimeParams};
use super::SpacetimeError;
use crate::numerics::quad::GaussLegendre;
use crate::numerics::smooth::step5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionKind {
    Static,
    Blend { horizon: usize },
    Beyond { horizon: usize },
    Transition { from: usize, to: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Region {
    pub kind: RegionKind,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChartHorizon {
    /// 0 = artificial, 1 = Cauchy, 2 = event, 3 = cosmological.
    pub index: u8,
    pub radius: f64,
    pub sign: f64,
    pub slope: f64,
    /// Constant value of c_j on the core of the blend band.
    pub c_core: f64,
}

/// Metric data at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChartPoint {
    pub r: f64,
    pub mu: f64,
    pub dmu: f64,
    pub phi: f64,
    pub dphi: f64,
    pub e: f64,
    pub de: f64,
}

impl ChartPoint {
    /// (g_tt, g_tr, g_rr).
    pub fn metric(&self) -> [f64; 3] {
        [self.mu, self.phi, self.e]
    }

    /// (G^tt, G^tr, G^rr).
    pub fn dual(&self) -> [f64; 3] {
        [-self.e, self.phi, -self.mu]
    }

    pub fn det(&self) -> f64 {
        self.mu * self.e - self.phi * self.phi
    }
}

/// (t_*, r) block of a radial metric written with μ, φ and e.
pub trait MetricBlock: Send + Sync {
    fn block(&self, r: f64) -> ChartPoint;
}

/// One horizon chart describing the metric at a radius: F' = s (μ⁻¹ + c).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalForm {
    pub horizon: u8,
    pub sign: f64,
    pub c: f64,
}

impl LocalForm {
    pub fn f_prime(&self, mu: f64) -> f64 {
        self.sign * (1.0 / mu + self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CausalSample {
    pub r: f64,
    /// G(dt_*, dt_*).
    pub dt_norm: f64,
    /// G(dr, dr).
    pub dr_norm: f64,
}

impl CausalSample {
    pub fn dt_timelike(&self) -> bool {
        self.dt_norm > 0.0
    }

    pub fn dr_timelike(&self) -> bool {
        self.dr_norm > 0.0
    }
}

#[derive(Clone)]
pub struct ChartData {
    profile: Arc<dyn RadialProfile>,
    pub horizons: Vec<ChartHorizon>,
    pub delta: f64,
    pub regions: Vec<Region>,
    pub causal_report: Vec<CausalSample>,
    gl: GaussLegendre,
}

impl std::fmt::Debug for ChartData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChartData")
            .field("horizons", &self.horizons)
            .field("delta", &self.delta)
            .field("regions", &self.regions)
            .finish()
    }
}

/// Charts over the extended spacetime: horizons r0 < r1 < r2 < r3.
pub fn build_charts(profile: &ExtendedProfile, delta: Option<f64>) -> Result<ChartData, SpacetimeError> {
    let mut radii = vec![(0u8, profile.r0)];
    radii.extend(profile.horizons.roots.iter().map(|h| (h.index, h.radius)));
    let delta = delta.unwrap_or(profile.delta);
    ChartData::new(Arc::new(profile.clone()), &radii, delta)
}

/// Charts for the unextended background (all r > 0).
pub fn exterior_charts(params: &SpacetimeParams, delta: Option<f64>) -> Result<ChartData, SpacetimeError> {
    let h = horizon_data(params, &HorizonOptions::default())?;
    let radii: Vec<(u8, f64)> = h.roots.iter().map(|r| (r.index, r.radius)).collect();
    let delta = delta.unwrap_or_else(|| default_delta(&h));
    ChartData::new(Arc::new(*params), &radii, delta)
}

/// Charts built from the listed horizons only, valid from just inside the first of them
/// outwards. The default δ is 5% of the smallest gap among those radii and r = 0.
pub fn charts_from(params: &SpacetimeParams, indices: &[u8], delta: Option<f64>) -> Result<ChartData, SpacetimeError> {
    let h = horizon_data(params, &HorizonOptions::default())?;
    let radii: Vec<(u8, f64)> = h.roots.iter().filter(|r| indices.contains(&r.index)).map(|r| (r.index, r.radius)).collect();
    if radii.len() != indices.len() {
        return Err(SpacetimeError::Chart(format!("horizons {indices:?} not all present")));
    }
    let delta = delta.unwrap_or_else(|| {
        let mut prev = 0.0;
        radii.iter().fold(f64::INFINITY, |m, &(_, r)| {
            let gap = r - prev;
            prev = r;
            m.min(gap)
        }) * 0.05
    });
    ChartData::new(Arc::new(*params), &radii, delta)
}

impl ChartData {
    fn new(profile: Arc<dyn RadialProfile>, radii: &[(u8, f64)], delta: f64) -> Result<Self, SpacetimeError> {
        if !(delta > 0.0) {
            return Err(SpacetimeError::Chart(format!("delta must be positive, got {delta}")));
        }
        if radii.is_empty() {
            return Err(SpacetimeError::Chart("no horizons".into()));
        }
        if radii[0].1 <= 2.0 * delta {
            return Err(SpacetimeError::Chart("first horizon closer than 2δ to r = 0".into()));
        }
        let mut horizons = Vec::with_capacity(radii.len());
        for &(index, radius) in radii {
            let m = profile.profile(radius);
            if m.d1 == 0.0 {
                return Err(SpacetimeError::Chart(format!("degenerate horizon at {radius}")));
            }
            let mut peak: f64 = 0.0;
            for k in 0..=64 {
                let r = radius - delta + 2.0 * delta * k as f64 / 64.0;
                peak = peak.max(profile.profile(r).value.abs());
            }
            horizons.push(ChartHorizon { index, radius, sign: -m.d1.signum(), slope: m.d1, c_core: -1.0 / peak });
        }

        let mut regions = Vec::new();
        let sign_between = |a: f64, b: f64| profile.profile(0.5 * (a + b)).value;
        // below the first horizon
        let first = horizons[0].radius;
        let below = if profile.profile(first - delta).value > 0.0 {
            RegionKind::Static
        } else {
            RegionKind::Beyond { horizon: 0 }
        };
        regions.push(Region { kind: below, lo: 0.0, hi: first - delta });
        for i in 0..horizons.len() {
            let h = horizons[i];
            regions.push(Region { kind: RegionKind::Blend { horizon: i }, lo: h.radius - delta, hi: h.radius + delta });
            if i + 1 == horizons.len() {
                let kind = if profile.profile(h.radius + delta).value > 0.0 {
                    RegionKind::Static
                } else {
                    RegionKind::Beyond { horizon: i }
                };
                regions.push(Region { kind, lo: h.radius + delta, hi: f64::INFINITY });
                continue;
            }
            let next = horizons[i + 1];
            let gap = next.radius - h.radius;
            if sign_between(h.radius, next.radius) > 0.0 {
                if gap <= 2.0 * delta {
                    return Err(SpacetimeError::Chart(format!("horizons {} and {} closer than 2δ", h.radius, next.radius)));
                }
                regions.push(Region { kind: RegionKind::Static, lo: h.radius + delta, hi: next.radius - delta });
            } else {
                if gap <= 6.0 * delta {
                    return Err(SpacetimeError::Chart(format!(
                        "trapped gap ({}, {}) narrower than 6δ",
                        h.radius, next.radius
                    )));
                }
                if h.sign * next.sign >= 0.0 {
                    return Err(SpacetimeError::Chart("horizon signs do not alternate".into()));
                }
                regions.push(Region { kind: RegionKind::Beyond { horizon: i }, lo: h.radius + delta, hi: h.radius + 2.0 * delta });
                regions.push(Region {
                    kind: RegionKind::Transition { from: i, to: i + 1 },
                    lo: h.radius + 2.0 * delta,
                    hi: next.radius - 2.0 * delta,
                });
                regions.push(Region {
                    kind: RegionKind::Beyond { horizon: i + 1 },
                    lo: next.radius - 2.0 * delta,
                    hi: next.radius - delta,
                });
            }
        }

        let mut chart = Self { profile, horizons, delta, regions, causal_report: Vec::new(), gl: GaussLegendre::new(16) };
        chart.causal_report = chart.sample_causal(1000);
        for s in &chart.causal_report {
            let in_transition = matches!(chart.region_at(s.r).kind, RegionKind::Transition { .. });
            let ok = if in_transition { s.dr_timelike() } else { s.dt_timelike() };
            if !ok {
                return Err(SpacetimeError::Chart(format!(
                    "timelike condition violated at r = {} (G(dt,dt) = {:e}, G(dr,dr) = {:e})",
                    s.r, s.dt_norm, s.dr_norm
                )));
            }
        }
        Ok(chart)
    }

    fn sample_causal(&self, n: usize) -> Vec<CausalSample> {
        let (lo, hi) = self.sample_range();
        (0..n)
            .map(|k| {
                let r = lo + (hi - lo) * k as f64 / (n - 1) as f64;
                let p = self.block(r);
                CausalSample { r, dt_norm: -p.e, dr_norm: -p.mu }
            })
            .collect()
    }

    /// [first horizon − 4δ, last horizon + 4δ], clipped to r > 0.
    pub fn sample_range(&self) -> (f64, f64) {
        let lo = (self.horizons[0].radius - 4.0 * self.delta).max(0.5 * self.horizons[0].radius);
        let hi = self.horizons[self.horizons.len() - 1].radius + 4.0 * self.delta;
        (lo, hi)
    }

    pub fn horizon(&self, index: u8) -> Option<&ChartHorizon> {
        self.horizons.iter().find(|h| h.index == index)
    }

    pub fn profile(&self) -> &dyn RadialProfile {
        self.profile.as_ref()
    }

    pub fn region_at(&self, r: f64) -> Region {
        *self
            .regions
            .iter()
            .find(|reg| r >= reg.lo && r <= reg.hi)
            .unwrap_or(&self.regions[self.regions.len() - 1])
    }

    /// c_j on the blend band of horizon `i` (position in `horizons`), with derivative.
    fn blend_c(&self, i: usize, r: f64, mu: f64, dmu: f64) -> (f64, f64) {
        let h = &self.horizons[i];
        let d = (r - h.radius).abs();
        let core = 0.25 * self.delta;
        let width = self.delta - core;
        let (w, dw, _) = step5((d - core) / width);
        if w == 0.0 && dw == 0.0 {
            return (h.c_core, 0.0);
        }
        let dw = dw / width * (r - h.radius).signum();
        let outer = -1.0 / mu.abs();
        let d_outer = mu.signum() * dmu / (mu * mu);
        let c = w * outer + (1.0 - w) * h.c_core;
        let dc = dw * (outer - h.c_core) + w * d_outer;
        (c, dc)
    }

    /// c_j at r for horizon chart `i`, if r lies in its blend band.
    pub fn blend_value(&self, i: usize, r: f64) -> Option<f64> {
        let h = self.horizons.get(i)?;
        if (r - h.radius).abs() > self.delta {
            return None;
        }
        let m = self.profile.profile(r);
        Some(self.blend_c(i, r, m.value, m.d1).0)
    }

    /// Every horizon chart valid at r, each with its c.
    pub fn local_forms(&self, r: f64) -> Vec<LocalForm> {
        let m = self.profile.profile(r);
        let p = self.block(r);
        let form = |i: usize| {
            let h = &self.horizons[i];
            LocalForm { horizon: h.index, sign: h.sign, c: (p.phi / h.sign - 1.0) / m.value }
        };
        match self.region_at(r).kind {
            RegionKind::Blend { horizon } => {
                let h = &self.horizons[horizon];
                vec![LocalForm { horizon: h.index, sign: h.sign, c: self.blend_c(horizon, r, m.value, m.d1).0 }]
            }
            RegionKind::Transition { from, to } => vec![form(from), form(to)],
            _ => {
                let below = self.horizons.iter().rposition(|h| h.radius < r);
                let above = self.horizons.iter().position(|h| h.radius > r);
                below.into_iter().chain(above).map(form).collect()
            }
        }
    }

    /// Antiderivative F with F' = φ/μ, normalised per patch between horizons.
    pub fn tstar_shift(&self, r: f64) -> Result<f64, SpacetimeError> {
        let reference = self.patch_reference(r)?;
        self.shift_between(reference, r)
    }

    /// t_* = t − F(r).
    pub fn tstar_of_t(&self, t: f64, r: f64) -> Result<f64, SpacetimeError> {
        Ok(t - self.tstar_shift(r)?)
    }

    fn patch_reference(&self, r: f64) -> Result<f64, SpacetimeError> {
        if !(r > 0.0) {
            return Err(SpacetimeError::Domain(r));
        }
        let below = self.horizons.iter().rposition(|h| h.radius < r);
        let above = self.horizons.iter().position(|h| h.radius > r);
        let d = self.delta;
        match (below, above) {
            (Some(i), Some(j)) if j == i + 1 => {
                let (a, b) = (self.horizons[i].radius, self.horizons[j].radius);
                Ok(match self.region_at(0.5 * (a + b)).kind {
                    RegionKind::Static | RegionKind::Transition { .. } => 0.5 * (a + b),
                    _ => a + 2.0 * d,
                })
            }
            (None, Some(_)) => Ok(self.horizons[0].radius - 2.0 * d),
            (Some(i), None) => Ok(self.horizons[i].radius + 2.0 * d),
            _ => Err(SpacetimeError::Domain(r)),
        }
    }

    /// ∫_a^b φ/μ dr for a, b in one patch, subtracting the pole at nearby horizons.
    pub fn shift_between(&self, a: f64, b: f64) -> Result<f64, SpacetimeError> {
        if a == b {
            return Ok(0.0);
        }
        let (lo, hi, sgn) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        if self.horizons.iter().any(|h| h.radius >= lo && h.radius <= hi) {
            return Err(SpacetimeError::Chart(format!("[{lo}, {hi}] straddles a horizon")));
        }
        let mut cuts = vec![lo, hi];
        for reg in &self.regions {
            for c in [reg.lo, reg.hi] {
                if c > lo && c < hi {
                    cuts.push(c);
                }
            }
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (s0, s1) = (w[0], w[1]);
            let mid = 0.5 * (s0 + s1);
            let near = self.horizons.iter().find(|h| (mid - h.radius).abs() < self.delta);
            total += match near {
                Some(h) => {
                    let rj = h.radius;
                    let pole = |s: f64| 1.0 / (h.slope * (s - rj));
                    let smooth = |s: f64| {
                        let p = self.block(s);
                        p.phi / p.mu - h.sign * pole(s)
                    };
                    let log_part = h.sign / h.slope * ((s1 - rj).abs() / (s0 - rj).abs()).ln();
                    log_part + self.gl.integrate_composite(s0, s1, 8, smooth)
                }
                None => self.gl.integrate_composite(s0, s1, 8, |s| {
                    let p = self.block(s);
                    if p.phi == 0.0 {
                        0.0
                    } else {
                        p.phi / p.mu
                    }
                }),
            };
        }
        Ok(sgn * total)
    }
}

impl MetricBlock for ChartData {
    fn block(&self, r: f64) -> ChartPoint {
        let m = self.profile.profile(r);
        let (mu, dmu) = (m.value, m.d1);
        let from_c = |s: f64, c: f64, dc: f64| {
            let phi = s * (1.0 + mu * c);
            let dphi = s * (dmu * c + mu * dc);
            let e = 2.0 * c + mu * c * c;
            let de = 2.0 * dc + dmu * c * c + 2.0 * mu * c * dc;
            ChartPoint { r, mu, dmu, phi, dphi, e, de }
        };
        match self.region_at(r).kind {
            RegionKind::Static => {
                ChartPoint { r, mu, dmu, phi: 0.0, dphi: 0.0, e: -1.0 / mu, de: dmu / (mu * mu) }
            }
            RegionKind::Beyond { horizon } => ChartPoint {
                r,
                mu,
                dmu,
                phi: 2.0 * self.horizons[horizon].sign,
                dphi: 0.0,
                e: 3.0 / mu,
                de: -3.0 * dmu / (mu * mu),
            },
            RegionKind::Blend { horizon } => {
                let (c, dc) = self.blend_c(horizon, r, mu, dmu);
                from_c(self.horizons[horizon].sign, c, dc)
            }
            RegionKind::Transition { from, to } => {
                let reg = self.region_at(r);
                let width = reg.hi - reg.lo;
                let (w, dw, _) = step5((r - reg.lo) / width);
                let (sa, sb) = (self.horizons[from].sign, self.horizons[to].sign);
                let phi = 2.0 * sa + 2.0 * (sb - sa) * w;
                let dphi = 2.0 * (sb - sa) * dw / width;
                let e = (phi * phi - 1.0) / mu;
                let de = (2.0 * phi * dphi * mu - (phi * phi - 1.0) * dmu) / (mu * mu);
                ChartPoint { r, mu, dmu, phi, dphi, e, de }
            }
        }
    }
}
