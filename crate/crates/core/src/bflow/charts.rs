use std::sync::Arc;

use crate::spacetime::{ChartPoint, MetricBlock, RadialProfile};

/// The chart t₀ = t − F with F' = s/μ, i.e. c = 0: φ = s, e = 0.
/// Smooth across every horizon of the profile.
#[derive(Clone)]
pub struct HorizonChart {
    profile: Arc<dyn RadialProfile>,
    pub sign: f64,
}

impl HorizonChart {
    pub fn new(profile: Arc<dyn RadialProfile>, sign: f64) -> Self {
        Self { profile, sign }
    }
}

impl MetricBlock for HorizonChart {
    fn block(&self, r: f64) -> ChartPoint {
        let m = self.profile.profile(r);
        ChartPoint { r, mu: m.value, dmu: m.d1, phi: self.sign, dphi: 0.0, e: 0.0, de: 0.0 }
    }
}

/// Static coordinates (c = −1/μ): φ = 0, e = −1/μ. Singular at horizons.
#[derive(Clone)]
pub struct StaticChart {
    profile: Arc<dyn RadialProfile>,
}

impl StaticChart {
    pub fn new(profile: Arc<dyn RadialProfile>) -> Self {
        Self { profile }
    }
}

impl MetricBlock for StaticChart {
    fn block(&self, r: f64) -> ChartPoint {
        let m = self.profile.profile(r);
        ChartPoint {
            r,
            mu: m.value,
            dmu: m.d1,
            phi: 0.0,
            dphi: 0.0,
            e: -1.0 / m.value,
            de: m.d1 / (m.value * m.value),
        }
    }
}
