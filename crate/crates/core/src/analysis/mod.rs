//! Decay and blow-up fits for probe series, and the regularity predictors
//! derived from surface gravities.

mod decay;
mod power;
mod predictors;
mod prony;

pub use decay::{fit_decay, DecayOptions};
pub use power::fit_power;
pub use predictors::{gap_and_threshold, near_extremal_design, regularity_predictors, Conjecture, NearExtremalDesign, RegularityReport};
pub use prony::{fit_prony, PronyMode};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("only {0} samples in the fit window, need at least 10")]
    TooShort(usize),
    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),
    #[error("malformed series: {0}")]
    Malformed(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// A sampled scalar series u(t); `t` is strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
}

impl TimeSeries {
    pub fn new(t: Vec<f64>, u: Vec<f64>) -> Result<Self, AnalysisError> {
        if t.len() != u.len() {
            return Err(AnalysisError::Malformed(format!("{} times, {} values", t.len(), u.len())));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(AnalysisError::Malformed("abscissae not strictly increasing".into()));
        }
        if t.iter().chain(&u).any(|x| !x.is_finite()) {
            return Err(AnalysisError::Malformed("non-finite sample".into()));
        }
        Ok(Self { t, u })
    }

    pub fn from_fn(t: Vec<f64>, f: impl Fn(f64) -> f64) -> Self {
        let u = t.iter().map(|&x| f(x)).collect();
        Self { t, u }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Samples with lo ≤ t ≤ hi.
    pub fn window(&self, lo: f64, hi: f64) -> TimeSeries {
        let (t, u) = self.t.iter().zip(&self.u).filter(|(t, _)| **t >= lo && **t <= hi).map(|(t, u)| (*t, *u)).unzip();
        TimeSeries { t, u }
    }

    /// Parses a CSV with a header row, taking the abscissa from the first column and
    /// the values from `column`.
    pub fn from_csv(text: &str, column: &str) -> Result<Self, AnalysisError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines.next().ok_or_else(|| AnalysisError::Malformed("empty CSV".into()))?.split(',').map(str::trim).collect();
        let k = header
            .iter()
            .position(|h| *h == column)
            .ok_or_else(|| AnalysisError::Malformed(format!("no column {column:?} in {header:?}")))?;
        let (mut t, mut u) = (Vec::new(), Vec::new());
        for (i, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            let parse = |j: usize| {
                cells
                    .get(j)
                    .and_then(|c| c.parse::<f64>().ok())
                    .ok_or_else(|| AnalysisError::Malformed(format!("row {}: bad cell {j}", i + 2)))
            };
            t.push(parse(0)?);
            u.push(parse(k)?);
        }
        Self::new(t, u)
    }

    pub fn to_csv(&self, name: &str) -> String {
        let mut out = format!("t,{name}\n");
        for (t, u) in self.t.iter().zip(&self.u) {
            out.push_str(&format!("{t:.16e},{u:.16e}\n"));
        }
        out
    }

    /// SHA-256 of the little-endian bytes of (t, u), hex encoded.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for x in self.t.iter().chain(&self.u) {
            h.update(x.to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    /// Constant from the tail median, log-linear rate, then a joint refit.
    LogLinear,
    Prony,
    /// Regression of ln|f| on ln|V|.
    PowerLaw,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub input_sha256: String,
    pub method: FitMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub method: FitMethod,
    /// Fitted constant term.
    pub u0: f64,
    /// Decay rate of the slowest non-constant component.
    pub alpha: f64,
    /// Standard error of `alpha` from the residuals, where available.
    pub alpha_stderr: Option<f64>,
    /// Angular frequency of the slowest component (Prony only).
    pub frequency: Option<f64>,
    /// Power-law index (power fits only).
    pub exponent: Option<f64>,
    pub exponent_stderr: Option<f64>,
    pub amplitude: f64,
    pub residual_rms: f64,
    pub residual_max: f64,
    pub window: (f64, f64),
    pub samples: usize,
    pub modes: Vec<PronyMode>,
    pub provenance: Provenance,
}

impl FitResult {
    pub(crate) fn empty(method: FitMethod, series: &TimeSeries) -> Self {
        FitResult {
            method,
            u0: 0.0,
            alpha: 0.0,
            alpha_stderr: None,
            frequency: None,
            exponent: None,
            exponent_stderr: None,
            amplitude: 0.0,
            residual_rms: 0.0,
            residual_max: 0.0,
            window: (series.t[0], *series.t.last().unwrap_or(&series.t[0])),
            samples: series.len(),
            modes: Vec::new(),
            provenance: Provenance { input_sha256: series.digest(), method },
        }
    }
}

pub(crate) fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
