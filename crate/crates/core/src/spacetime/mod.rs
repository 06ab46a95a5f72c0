//! Black-hole backgrounds: metric functions, horizons, thresholds, the photon
//! sphere, the smooth continuation beyond the inner horizon and the
//! horizon-penetrating charts built on top of it.

mod chart;
mod extension;
mod horizons;
mod params;

pub use chart::{
    build_charts, charts_from, exterior_charts, CausalSample, ChartData, ChartHorizon, ChartPoint, LocalForm, MetricBlock,
    Region, RegionKind,
};
pub use extension::{extend_mu, ExtendedProfile};
pub use horizons::{
    check_nondegenerate, find_horizons, horizon_data, photon_sphere, thresholds, HorizonData,
    HorizonOptions, HorizonRoot, NondegeneracyReport, Trapping,
};
pub use params::{mu, Family, MuValue, RadialProfile, SpacetimeParams};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpacetimeError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("radius {0} outside the domain r > 0")]
    Domain(f64),
    #[error("degenerate horizons: {0}")]
    DegenerateRoots(String),
    #[error("horizon bracketing failed: {0}")]
    NoBracket(String),
    #[error("no photon sphere: {0}")]
    NoPhotonSphere(String),
    #[error("extension infeasible: {0}")]
    Extension(String),
    #[error("chart construction failed: {0}")]
    Chart(String),
}
