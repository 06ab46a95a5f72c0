//! Spherical-harmonic modes of (□_g − m²)u = 0 on RNdS: an exterior engine on the
//! horizon-penetrating t_* foliation and a double-null engine for the block between
//! the event and Cauchy horizons.

mod exterior;
mod interior;
pub mod io;
mod operator;
mod probe;

pub use exterior::{exterior_evolve, ExteriorConfig, ExteriorRun, ExteriorSolver, FieldMeta, FieldSnapshot, ModeField, ProbeSeries};
pub use interior::{interior_evolve, HorizonTail, InteriorConfig, InteriorGeometry, InteriorSolver, NullBlockField, NullRay};
pub use operator::{mode_reduce, ModeCoefficients, ModeOperator};
pub use probe::{probe, probe_null, transversal_log, Derivative, NullLocation};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spacetime::SpacetimeError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveError {
    #[error(transparent)]
    Spacetime(#[from] SpacetimeError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("time step {dt:e} exceeds the CFL limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },
    #[error("dt_* is not timelike at r = {r} (G(dt_*, dt_*) = {norm:e})")]
    Causality { r: f64, norm: f64 },
    #[error("non-finite field at t = {0}")]
    NonFinite(f64),
    #[error("r left (r_1, r_2) at r* = {0}")]
    BlockBreach(f64),
    #[error("outside the computed domain: {0}")]
    OutOfDomain(String),
}

/// Gaussian profile A exp(−((x − center)/width)²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pulse {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl Pulse {
    /// Value and first derivative.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let z = (x - self.center) / self.width;
        let g = self.amplitude * (-z * z).exp();
        (g, -2.0 * z / self.width * g)
    }

    fn validate(&self) -> Result<(), WaveError> {
        if !(self.width > 0.0) || !self.amplitude.is_finite() || !self.center.is_finite() {
            return Err(WaveError::Config(format!("bad pulse {self:?}")));
        }
        Ok(())
    }
}
