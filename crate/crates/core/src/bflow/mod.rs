//! Null-bicharacteristic flow on the b-cotangent bundle.
//!
//! Covectors are written σ dτ₀/τ₀ + ξ dr + η dω with τ₀ = e^{−t}. For the
//! spherically symmetric families the dual metric function in a chart with
//! (μ, φ, e) is
//!
//! ```text
//! G = −e σ² − 2φ σξ − μ ξ² − L²/r²,
//! ```
//!
//! and motion stays in a plane, so the sphere is reduced to an angle ψ with
//! conjugate momentum L. The rescaled field 𝖧 = ρ̂ H_G with ρ̂ = 1/|ξ| is
//! smooth up to fiber infinity and is what the radial-set analysis uses.

mod charts;
mod kds;
mod radial;
mod rnds;
mod trapping;

pub use charts::{HorizonChart, StaticChart};
pub use kds::{KdsFlow, KdsPoint, KdsSample, KdsTrajectory};
pub use radial::{
    linearize_radial, measure_beta, quadratic_defining_rate, radial_component, RadialLinearization,
};
pub use rnds::{Classifier, FlowOptions, RadialFlow, Terminal, Trajectory, TrajectorySample};
pub use trapping::{
    linearize_trapping, measure_trapping_growth, second_derivative_check, trapped_datum, TrappingLinearization,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::ode::OdeError;
use crate::spacetime::SpacetimeError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("point outside chart coverage: {0}")]
    OutsideChart(String),
    #[error("ambiguous component: pairing {0:e} with the time function vanishes")]
    AmbiguousComponent(f64),
    #[error("linearization failed: {0}")]
    Linearization(String),
    #[error(transparent)]
    Integration(#[from] OdeError),
    #[error(transparent)]
    Spacetime(#[from] SpacetimeError),
}

/// A b-covector over a point of the (t, r, planar angle) space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BPhasePoint {
    pub tau0: f64,
    pub r: f64,
    pub angle: f64,
    pub sigma: f64,
    pub xi: f64,
    /// Angular momentum L; |η|² = L².
    pub eta: f64,
}

impl BPhasePoint {
    pub(crate) fn to_array(self) -> [f64; 6] {
        [self.tau0, self.r, self.angle, self.sigma, self.xi, self.eta]
    }

    pub(crate) fn from_array(y: &[f64; 6]) -> Self {
        Self { tau0: y[0], r: y[1], angle: y[2], sigma: y[3], xi: y[4], eta: y[5] }
    }

    /// √(σ² + ξ² + L²).
    pub fn fiber_norm(&self) -> f64 {
        (self.sigma * self.sigma + self.xi * self.xi + self.eta * self.eta).sqrt()
    }

    /// (−σ, −ξ, −L).
    pub fn antipodal(&self) -> Self {
        Self { sigma: -self.sigma, xi: -self.xi, eta: -self.eta, ..*self }
    }

    pub fn compactify(&self) -> Option<CompactifiedPoint> {
        if self.xi == 0.0 {
            return None;
        }
        let rho = 1.0 / self.xi.abs();
        Some(CompactifiedPoint {
            tau0: self.tau0,
            r: self.r,
            angle: self.angle,
            rho_hat: rho,
            sigma_hat: self.sigma * rho,
            eta_hat: self.eta * rho,
            xi_sign: self.xi.signum(),
        })
    }
}

/// Fiber-compactified coordinates ρ̂ = 1/|ξ|, σ̂ = σρ̂, η̂ = Lρ̂ on {±ξ > 0}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompactifiedPoint {
    pub tau0: f64,
    pub r: f64,
    pub angle: f64,
    pub rho_hat: f64,
    pub sigma_hat: f64,
    pub eta_hat: f64,
    pub xi_sign: f64,
}

impl CompactifiedPoint {
    pub(crate) fn to_array(self) -> [f64; 6] {
        [self.tau0, self.r, self.angle, self.rho_hat, self.sigma_hat, self.eta_hat]
    }

    pub(crate) fn from_array(y: &[f64; 6], xi_sign: f64) -> Self {
        Self { tau0: y[0], r: y[1], angle: y[2], rho_hat: y[3], sigma_hat: y[4], eta_hat: y[5], xi_sign }
    }

    /// Inverse of [`BPhasePoint::compactify`]; `None` at fiber infinity.
    pub fn expand(&self) -> Option<BPhasePoint> {
        if !(self.rho_hat > 0.0) {
            return None;
        }
        Some(BPhasePoint {
            tau0: self.tau0,
            r: self.r,
            angle: self.angle,
            sigma: self.sigma_hat / self.rho_hat,
            xi: self.xi_sign / self.rho_hat,
            eta: self.eta_hat / self.rho_hat,
        })
    }

    /// ρ₀ = η̂² + σ̂², a quadratic defining function of the radial set inside fiber infinity.
    pub fn rho0(&self) -> f64 {
        self.eta_hat * self.eta_hat + self.sigma_hat * self.sigma_hat
    }
}

/// Past (Σ₊) or future (Σ₋) half of the characteristic set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    #[serde(rename = "sigma_plus")]
    Plus,
    #[serde(rename = "sigma_minus")]
    Minus,
}

impl Component {
    pub fn flip(self) -> Self {
        match self {
            Component::Plus => Component::Minus,
            Component::Minus => Component::Plus,
        }
    }
}
