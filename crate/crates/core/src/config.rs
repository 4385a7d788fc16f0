//! Versioned TOML experiment configuration.
//!
//! ```toml
//! version = 1
//!
//! [data]
//! path = "../data/demand_temperature.csv"   # relative to this file
//! timestamp = "Datetime"
//! demand = "Demand"
//! exogenous = ["Temperature"]
//!
//! [window]
//! lags = 24
//! horizon = 5
//! features = ["Temperature", "week", "weekday", "hour"]
//!
//! [training]
//! rows = 477
//! refit = "online"        # or "frozen"
//!
//! [ridge]
//! grid = { min = 1e-4, max = 1e4, count = 25 }   # or `a = 1.0`
//!
//! [aci]
//! eps = [0.1, 0.1, 0.1, 0.1, 0.1]
//! gamma = [0.005, 0.005, 0.005, 0.005, 0.005]
//! clamp_floor = "conformal"   # "off" or a number
//! clamp_ceiling = 0.999999999 # "off" or a number
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::aci::{AciConfig, ClampFloor, DEFAULT_CEILING};
use crate::error::{Error, Result};
use crate::ridge::GcvGrid;
use crate::timeseries::{CsvSchema, WindowConfig};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    #[serde(default)]
    pub data: Option<DataSection>,
    pub window: WindowConfig,
    pub training: TrainingSection,
    #[serde(default)]
    pub ridge: RidgeSection,
    pub aci: AciSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub synthetic: SyntheticSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSection {
    pub path: PathBuf,
    #[serde(flatten)]
    pub schema: CsvSchema,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Refit {
    /// Absorb each pair once its full label has been observed.
    #[default]
    Online,
    /// Keep the model fitted on the initial training rows.
    Frozen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSection {
    /// Leading rows of the series treated as history before the online phase.
    pub rows: usize,
    #[serde(default)]
    pub refit: Refit,
    /// Optional cap on the number of online forecasts.
    #[serde(default)]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RidgeSection {
    /// Fixed ridge parameter; skips tuning.
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RidgeChoice {
    Fixed(f64),
    Tune(GcvGrid),
}

impl RidgeSection {
    pub fn choice(&self) -> Result<RidgeChoice> {
        match (&self.a, &self.grid, &self.values) {
            (Some(a), None, None) => {
                if *a >= 0.0 && a.is_finite() {
                    Ok(RidgeChoice::Fixed(*a))
                } else {
                    Err(Error::Config(format!("ridge.a = {a} must be >= 0")))
                }
            }
            (None, Some(g), None) => Ok(RidgeChoice::Tune(GcvGrid::log_spaced(g.min, g.max, g.count)?)),
            (None, None, Some(v)) => Ok(RidgeChoice::Tune(GcvGrid::new(v.clone())?)),
            (None, None, None) => Ok(RidgeChoice::Tune(GcvGrid::default())),
            _ => Err(Error::Config(
                "ridge: give at most one of `a`, `grid`, `values`".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Setting {
    Name(String),
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AciSection {
    pub eps: Vec<f64>,
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub clamp_floor: Option<Setting>,
    #[serde(default)]
    pub clamp_ceiling: Option<Setting>,
}

impl AciSection {
    pub fn to_config(&self) -> Result<AciConfig> {
        let mut cfg = AciConfig::new(self.eps.clone(), self.gamma.clone())?;
        cfg.clamp_floor = match &self.clamp_floor {
            None => ClampFloor::Conformal,
            Some(Setting::Name(s)) if s == "conformal" => ClampFloor::Conformal,
            Some(Setting::Name(s)) if s == "off" => ClampFloor::Off,
            Some(Setting::Value(v)) if *v >= 0.0 && *v < 1.0 => ClampFloor::Fixed(*v),
            Some(other) => return Err(Error::Config(format!("bad aci.clamp_floor {other:?}"))),
        };
        cfg.clamp_ceiling = match &self.clamp_ceiling {
            None => Some(DEFAULT_CEILING),
            Some(Setting::Name(s)) if s == "off" => None,
            Some(Setting::Value(v)) if *v > 0.0 && *v <= 1.0 => Some(*v),
            Some(other) => return Err(Error::Config(format!("bad aci.clamp_ceiling {other:?}"))),
        };
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSection {
    pub seed: u64,
    pub steps: usize,
}

impl Default for SyntheticSection {
    fn default() -> Self {
        Self { seed: 0, steps: 500 }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative data and output paths resolve against
    /// the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(data) = &mut cfg.data {
            if data.path.is_relative() {
                data.path = base.join(&data.path);
            }
        }
        if let Some(dir) = &mut cfg.output.dir {
            if dir.is_relative() {
                *dir = base.join(&*dir);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        self.window.validate()?;
        let h = self.window.horizon;
        if self.aci.eps.len() != h || self.aci.gamma.len() != h {
            return Err(Error::Config(format!(
                "aci.eps and aci.gamma need {h} entries (the horizon)"
            )));
        }
        if self.training.rows < self.window.lags + self.window.horizon {
            return Err(Error::Config(format!(
                "training.rows = {} is below lags + horizon = {}",
                self.training.rows,
                self.window.lags + self.window.horizon
            )));
        }
        self.aci.to_config()?;
        self.ridge.choice()?;
        Ok(())
    }

    pub fn aci_config(&self) -> AciConfig {
        self.aci.to_config().expect("validated")
    }
}
