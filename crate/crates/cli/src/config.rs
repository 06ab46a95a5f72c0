use std::fmt;
use std::path::{Path, PathBuf};

use horizonlab::analysis::FitMethod;
use horizonlab::spacetime::{HorizonOptions, SpacetimeParams};
use horizonlab::waves::{ExteriorConfig, HorizonTail, InteriorConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// Invalid input: malformed JSON, unknown keys, wrong types or inconsistent settings.
#[derive(Debug)]
pub struct ConfigError {
    pub path: Option<String>,
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self { path: None, message: message.into() }
    }

    pub fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: Some(path.into()), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.path {
            Some(p) => write!(f, "{p}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub params: SpacetimeParams,
    pub horizons: HorizonOptions,
    pub flow: FlowConfig,
    pub exterior: ExteriorConfig,
    pub interior: InteriorConfig,
    /// Event-horizon data for `evolve-interior`; `pipeline` replaces it by the exterior probe.
    pub tail: HorizonTail,
    pub fit: FitConfig,
    pub scan: ScanConfig,
    pub predictors: PredictorConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            params: SpacetimeParams::rnds(0.02, 1.0, 0.5),
            horizons: HorizonOptions::default(),
            flow: FlowConfig::default(),
            exterior: ExteriorConfig::default(),
            interior: InteriorConfig::default(),
            tail: HorizonTail::Model { u0: 1.0, amplitude: 1.0, rate: None },
            fit: FitConfig::default(),
            scan: ScanConfig::default(),
            predictors: PredictorConfig::default(),
        }
    }
}

/// Initial covector of a null ray: (r, σ, L) completed by the root of G = 0 picked by `branch`.
/// KdS rays start at a θ turning point with azimuthal momentum ζ instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub r: f64,
    pub sigma: f64,
    pub angular_momentum: f64,
    /// +1 or −1: which root ξ of the null condition.
    pub branch: f64,
    pub theta: f64,
    pub zeta: f64,
    pub span: f64,
    pub stride: usize,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { r: 4.0, sigma: 1.0, angular_momentum: 2.0, branch: 1.0, theta: 1.2, zeta: 0.3, span: 100.0, stride: 1, rtol: 1e-10, atol: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// CSV with the abscissa in the first column.
    pub input: Option<PathBuf>,
    pub column: String,
    pub window: Option<(f64, f64)>,
    pub method: FitMethod,
    /// Power-law fits use samples with |V| ≤ v_max.
    pub v_max: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { input: None, column: "u".into(), window: None, method: FitMethod::LogLinear, v_max: 1e-2 }
    }
}

/// Axes of a scan; an empty axis keeps the value from `params`. A non-empty `ell` axis runs
/// an exterior evolution per point and fits its decay.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub lambda: Vec<f64>,
    pub charge: Vec<f64>,
    pub spin: Vec<f64>,
    pub ell: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictorConfig {
    /// Spectral gap used for the regularity predictors; defaults to γ_0.
    pub alpha: Option<f64>,
    pub k: u32,
}

/// Reads a config file (or a manifest, whose `config` entry is used), applies dot-path
/// overrides and deserializes with field paths in the errors. Without a file the overrides
/// apply to the fully expanded default config.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut value = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| ConfigError::new(format!("cannot read {}: {e}", p.display())))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| ConfigError::new(format!("{}: {e}", p.display())))?;
            match v {
                Value::Object(mut m) if m.get("kind").and_then(Value::as_str) == Some("manifest") => {
                    m.remove("config").ok_or_else(|| ConfigError::new("manifest has no config entry"))?
                }
                other => other,
            }
        }
        None => serde_json::to_value(RunConfig::default()).expect("the default config serializes"),
    };
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    let cfg: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::at(path, e.into_inner().to_string())
    })?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(ConfigError::at("schema_version", format!("expected {SCHEMA_VERSION}, found {}", cfg.schema_version)));
    }
    Ok(cfg)
}

/// `a.b.c=value`; the value is read as JSON when it parses, as a string otherwise.
pub fn apply_override(root: &mut Value, spec: &str) -> Result<(), ConfigError> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| ConfigError::new(format!("override {spec:?} is not key=value")))?;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::new(format!("bad override path {key:?}")));
    }
    let new = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        node = match node {
            Value::Array(items) => {
                let k: usize = part.parse().map_err(|_| ConfigError::at(key, format!("{part:?} indexes an array")))?;
                items.get_mut(k).ok_or_else(|| ConfigError::at(key, format!("index {k} out of range")))?
            }
            other => {
                if !other.is_object() {
                    *other = Value::Object(Default::default());
                }
                let map = other.as_object_mut().expect("object");
                map.entry(part.to_string()).or_insert(Value::Null)
            }
        };
        if last {
            *node = new;
            return Ok(());
        }
    }
    Ok(())
}
