use std::fs;
use std::path::Path;

use cyclic_dce::dynamics::{DissipationRates, DEFAULT_ROTATING_CUTOFF};
use cyclic_dce::presets::Preset;
use cyclic_dce::{Drive, Error, HilbertSpace, ModelParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Schrodinger,
    Effective,
    Lindblad,
}

/// Initial state: the bare vacuum |0,0> or the dressed ground state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Initial {
    #[default]
    Bare,
    Ground,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub n_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    /// Defaults to the integrator's own step bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_stride() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_timeseries")]
    pub timeseries: String,
    /// Unitary reference series written next to a Lindblad run.
    #[serde(default = "default_unitary")]
    pub unitary: String,
    /// Prefix of the per-snapshot photon distribution files.
    #[serde(default = "default_distribution")]
    pub distribution: String,
    /// Times at which P(n) is written.
    #[serde(default)]
    pub snapshots: Vec<f64>,
}

fn default_timeseries() -> String {
    "timeseries.csv".into()
}

fn default_unitary() -> String {
    "timeseries_unitary.csv".into()
}

fn default_distribution() -> String {
    "distribution".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            timeseries: default_timeseries(),
            unitary: default_unitary(),
            distribution: default_distribution(),
            snapshots: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default)]
    pub initial: Initial,
    /// Photons per modulation quantum (1 or 3), used by `rates` and `scan`.
    #[serde(default = "default_photons")]
    pub photons: usize,
    #[serde(default = "default_cutoff")]
    pub rotating_cutoff: f64,
    /// Also run the unitary evolution when `mode = "lindblad"`.
    #[serde(default)]
    pub compare_unitary: bool,
    pub model: ModelParams,
    pub drive: Drive,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dissipation: Option<DissipationRates>,
    pub space: SpaceConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

fn default_photons() -> usize {
    3
}

fn default_cutoff() -> f64 {
    DEFAULT_ROTATING_CUTOFF
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub eta: Option<f64>,
    pub n_max: Option<usize>,
    pub t_max: Option<f64>,
}

impl RunConfig {
    pub fn from_preset(preset: &Preset) -> Self {
        let lossy = preset.dissipation.is_some();
        RunConfig {
            mode: if lossy { Mode::Lindblad } else { Mode::Schrodinger },
            initial: Initial::Bare,
            photons: preset.photons,
            rotating_cutoff: DEFAULT_ROTATING_CUTOFF,
            compare_unitary: lossy,
            model: preset.params,
            drive: preset.drive,
            dissipation: preset.dissipation,
            space: SpaceConfig { n_max: preset.n_max },
            grid: GridConfig { t0: 0.0, t1: preset.horizon, dt: None, stride: default_stride() },
            outputs: OutputConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::io(path, source))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn apply(&mut self, overrides: &Overrides) -> Result<(), CliError> {
        if let Some(eta) = overrides.eta {
            self.drive.eta = eta;
        }
        if let Some(n) = overrides.n_max {
            self.space.n_max = n;
        }
        if let Some(t) = overrides.t_max {
            self.grid.t1 = t;
        }
        self.validate()
    }

    pub fn space(&self) -> HilbertSpace {
        HilbertSpace::new(self.space.n_max).expect("validated n_max")
    }

    pub fn rates(&self) -> DissipationRates {
        self.dissipation.unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.model.validate().map_err(|e| field_error("model", e))?;
        self.drive.validate().map_err(|e| field_error("drive", e))?;
        if let Some(rates) = &self.dissipation {
            rates.validate().map_err(|e| field_error("dissipation", e))?;
        }
        HilbertSpace::new(self.space.n_max).map_err(|e| field_error("space", e))?;
        if self.photons != 1 && self.photons != 3 {
            return Err(config_error("photons", format!("must be 1 or 3, got {}", self.photons)));
        }
        if !(self.rotating_cutoff.is_finite() && self.rotating_cutoff > 0.0) {
            return Err(config_error("rotating_cutoff", format!("must be positive, got {}", self.rotating_cutoff)));
        }
        let g = &self.grid;
        if !g.t0.is_finite() {
            return Err(config_error("grid.t0", format!("must be finite, got {}", g.t0)));
        }
        if !(g.t1.is_finite() && g.t1 > g.t0) {
            return Err(config_error("grid.t1", format!("must exceed t0 = {}, got {}", g.t0, g.t1)));
        }
        if let Some(dt) = g.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(config_error("grid.dt", format!("must be positive, got {dt}")));
            }
        }
        if g.stride == 0 {
            return Err(config_error("grid.stride", "must be at least 1".into()));
        }
        for &t in &self.outputs.snapshots {
            if !(t >= g.t0 && t <= g.t1) {
                return Err(config_error("outputs.snapshots", format!("time {t} outside [{}, {}]", g.t0, g.t1)));
            }
        }
        for (field, name) in [
            ("outputs.timeseries", &self.outputs.timeseries),
            ("outputs.unitary", &self.outputs.unitary),
            ("outputs.distribution", &self.outputs.distribution),
        ] {
            if name.is_empty() {
                return Err(config_error(field, "must not be empty".into()));
            }
        }
        Ok(())
    }
}

fn config_error(field: &str, reason: String) -> CliError {
    CliError::Config(format!("`{field}`: {reason}"))
}

fn field_error(section: &str, e: Error) -> CliError {
    match e {
        Error::InvalidParameter { field, reason } => config_error(&format!("{section}.{field}"), reason),
        other => CliError::Config(format!("[{section}] {other}")),
    }
}
