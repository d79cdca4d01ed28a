//! Run configuration: a TOML document with strict keys, resolved into core
//! types before any computation starts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use selfenergy_core::experiment::{linspace, logspace, Fig1Config, Fig2Config, Fig3Config, UncertaintyBudget};
use selfenergy_core::{CavityConfig, DielectricModel, ElectronState, ShiftSettings};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },
    #[error("{origin}{}: {message}", line.map(|l| format!(":{l}")).unwrap_or_default())]
    Invalid {
        origin: String,
        line: Option<usize>,
        message: String,
    },
}

/// Permittivity model block, selected by `kind`. Frequencies in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
#[derive(Default)]
pub enum ModelSpec {
    PerfectConductor,
    Plasma {
        plasma_frequency: f64,
    },
    Drude {
        plasma_frequency: f64,
        damping: f64,
    },
    DrudeLorentz {
        plasma_frequency: f64,
        resonance_frequency: f64,
        damping: f64,
    },
    /// Drude-Lorentz with gold's parameters.
    #[default]
    Gold,
    /// Plasma model with gold's plasma frequency.
    GoldPlasma,
}


impl ModelSpec {
    pub fn build(&self) -> selfenergy_core::Result<DielectricModel> {
        Ok(match *self {
            ModelSpec::PerfectConductor => DielectricModel::PerfectConductor,
            ModelSpec::Plasma { plasma_frequency } => DielectricModel::plasma(plasma_frequency)?,
            ModelSpec::Drude {
                plasma_frequency,
                damping,
            } => DielectricModel::drude(plasma_frequency, damping)?,
            ModelSpec::DrudeLorentz {
                plasma_frequency,
                resonance_frequency,
                damping,
            } => DielectricModel::drude_lorentz(plasma_frequency, resonance_frequency, damping)?,
            ModelSpec::Gold => DielectricModel::gold(),
            ModelSpec::GoldPlasma => DielectricModel::gold_plasma(),
        })
    }
}

/// Lengths in m. Give the position as `z` or as `zeta = z / d`, not both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Geometry {
    pub d: f64,
    pub z: Option<f64>,
    pub zeta: Option<f64>,
    pub r: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            d: 1e-5,
            z: None,
            zeta: None,
            r: 1e-3,
        }
    }
}

/// Either `beta` (sharp parallel momentum `m beta c`) or the momentum second
/// moments in (kg m/s)^2.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ElectronSpec {
    pub beta: Option<f64>,
    pub p_par_sq: Option<f64>,
    pub p_perp_sq: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub format: Format,
    pub dir: Option<PathBuf>,
    /// Significant digits of every emitted number.
    pub precision: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            format: Format::Csv,
            dir: None,
            precision: 12,
        }
    }
}

/// A grid as `"start:stop:count"`, `"start:stop:count:log"`, or an explicit
/// list of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Spec(String),
    Values(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>, String> {
        let v = match self {
            Grid::Values(v) => v.clone(),
            Grid::Spec(s) => parse_grid(s)?,
        };
        if v.is_empty() {
            return Err("empty grid".into());
        }
        if let Some(x) = v.iter().find(|x| !x.is_finite()) {
            return Err(format!("grid value {x} is not finite"));
        }
        Ok(v)
    }
}

/// Parses `start:stop:count[:log]`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let bad = || format!("grid `{spec}` is not start:stop:count or start:stop:count:log");
    let (log, parts) = match parts.as_slice() {
        [a, b, n] => (false, [*a, *b, *n]),
        [a, b, n, "log"] => (true, [*a, *b, *n]),
        _ => return Err(bad()),
    };
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    if count == 0 {
        return Err("empty grid".into());
    }
    if log {
        if !(start > 0.0 && stop > 0.0) {
            return Err(format!("log grid `{spec}` needs positive end points"));
        }
        Ok(logspace(start, stop, count))
    } else {
        Ok(linspace(start, stop, count))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub zeta_grid: Option<Grid>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig1Section {
    pub d: Option<f64>,
    pub beta: Option<f64>,
    pub zeta_grid: Option<Grid>,
    pub plasma: Option<ModelSpec>,
    pub drude: Option<ModelSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig2Section {
    pub d: Option<f64>,
    pub r: Option<f64>,
    pub positions: Option<Vec<f64>>,
    pub beta_grid: Option<Grid>,
    pub plasma: Option<ModelSpec>,
    pub drude: Option<ModelSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig3Section {
    pub z: Option<f64>,
    pub d: Option<f64>,
    pub r: Option<f64>,
    pub beta_grid: Option<Grid>,
    pub plasma: Option<ModelSpec>,
    pub drude: Option<ModelSpec>,
    pub inset_beta: Option<f64>,
    pub inset_samples_per_period: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FigureSection {
    pub fig1: Fig1Section,
    pub fig2: Fig2Section,
    pub fig3: Fig3Section,
}

/// The whole configuration document. Every block is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub geometry: Geometry,
    pub electron: ElectronSpec,
    pub numerics: ShiftSettings,
    pub uncertainty: UncertaintyBudget,
    pub output: OutputSpec,
    pub shift: GridSection,
    pub forces: GridSection,
    pub figure: FigureSection,
}

/// A parsed document together with its text, for line-numbered messages.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    origin: String,
    text: String,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

impl LoadedConfig {
    /// Built-in defaults, no document.
    pub fn defaults() -> Self {
        Self {
            config: RunConfig::default(),
            origin: "<defaults>".into(),
            text: String::new(),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            origin: origin.to_string(),
            line: e.span().map_or(1, |s| line_of(text, s.start)),
            message: e.message().trim().to_string(),
        })?;
        let loaded = Self {
            config,
            origin: origin.to_string(),
            text: text.to_string(),
        };
        loaded.validate()?;
        Ok(loaded)
    }

    /// Error pointing at the first line that assigns `key`, if any.
    pub fn invalid(&self, key: &str, message: impl Into<String>) -> ConfigError {
        let line = self.text.lines().position(|l| {
            l.trim_start()
                .strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        });
        ConfigError::Invalid {
            origin: self.origin.clone(),
            line: line.map(|i| i + 1),
            message: format!("`{key}`: {}", message.into()),
        }
    }

    /// Schema checks that need more than one key.
    fn validate(&self) -> Result<(), ConfigError> {
        let c = &self.config;
        c.model.build().map_err(|e| self.invalid("kind", e.to_string()))?;
        c.numerics.validate().map_err(|e| self.invalid("numerics", e.to_string()))?;
        c.uncertainty.validate().map_err(|e| self.invalid("uncertainty", e.to_string()))?;
        if !(1..=17).contains(&c.output.precision) {
            return Err(self.invalid("precision", "must be between 1 and 17 significant digits"));
        }
        self.electron()?;
        if c.geometry.z.is_some() && c.geometry.zeta.is_some() {
            return Err(self.invalid("zeta", "give either z or zeta, not both"));
        }
        Ok(())
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    pub fn model(&self) -> Result<DielectricModel, ConfigError> {
        self.config.model.build().map_err(|e| self.invalid("kind", e.to_string()))
    }

    pub fn electron(&self) -> Result<ElectronState, ConfigError> {
        let e = &self.config.electron;
        let moments = e.p_par_sq.is_some() || e.p_perp_sq.is_some();
        let state = match (e.beta, moments) {
            (Some(_), true) => return Err(self.invalid("beta", "give either beta or momentum moments, not both")),
            (Some(b), false) => ElectronState::from_beta(b),
            (None, true) => ElectronState::new(e.p_par_sq.unwrap_or(0.0), e.p_perp_sq.unwrap_or(0.0)),
            (None, false) => ElectronState::from_beta(0.01),
        };
        state.map_err(|err| self.invalid(if e.beta.is_some() { "beta" } else { "p_par_sq" }, err.to_string()))
    }

    pub fn d(&self) -> f64 {
        self.config.geometry.d
    }

    /// The configured position, if any.
    pub fn cavity(&self) -> Result<Option<CavityConfig>, ConfigError> {
        let g = &self.config.geometry;
        let r = match (g.z, g.zeta) {
            (Some(z), _) => CavityConfig::new(g.d, z).map_err(|e| self.invalid("z", e.to_string()))?,
            (None, Some(zeta)) => CavityConfig::from_zeta(g.d, zeta).map_err(|e| self.invalid("zeta", e.to_string()))?,
            (None, None) => return Ok(None),
        };
        Ok(Some(r))
    }

    pub fn grid(&self, key: &str, grid: &Grid) -> Result<Vec<f64>, ConfigError> {
        grid.values().map_err(|m| self.invalid(key, m))
    }

    fn model_or(&self, spec: &Option<ModelSpec>, fallback: DielectricModel) -> Result<DielectricModel, ConfigError> {
        match spec {
            Some(s) => s.build().map_err(|e| self.invalid("kind", e.to_string())),
            None => Ok(fallback),
        }
    }

    pub fn fig1(&self) -> Result<Fig1Config, ConfigError> {
        let s = &self.config.figure.fig1;
        let mut c = Fig1Config::default();
        c.d = s.d.unwrap_or(c.d);
        c.beta = s.beta.unwrap_or(c.beta);
        if let Some(g) = &s.zeta_grid {
            c.zeta_grid = self.grid("zeta_grid", g)?;
        }
        c.plasma = self.model_or(&s.plasma, c.plasma)?;
        c.drude = self.model_or(&s.drude, c.drude)?;
        Ok(c)
    }

    pub fn fig2(&self) -> Result<Fig2Config, ConfigError> {
        let s = &self.config.figure.fig2;
        let mut c = Fig2Config::default();
        c.d = s.d.unwrap_or(c.d);
        c.r = s.r.unwrap_or(c.r);
        if let Some(p) = &s.positions {
            if p.is_empty() {
                return Err(self.invalid("positions", "empty list"));
            }
            c.positions = p.clone();
        }
        if let Some(g) = &s.beta_grid {
            c.beta_grid = self.grid("beta_grid", g)?;
        }
        c.plasma = self.model_or(&s.plasma, c.plasma)?;
        c.drude = self.model_or(&s.drude, c.drude)?;
        c.budget = self.config.uncertainty;
        Ok(c)
    }

    pub fn fig3(&self) -> Result<Fig3Config, ConfigError> {
        let s = &self.config.figure.fig3;
        let mut c = Fig3Config::default();
        c.z = s.z.unwrap_or(c.z);
        c.d = s.d.unwrap_or(c.d);
        c.r = s.r.unwrap_or(c.r);
        if let Some(g) = &s.beta_grid {
            c.beta_grid = self.grid("beta_grid", g)?;
        }
        c.plasma = self.model_or(&s.plasma, c.plasma)?;
        c.drude = self.model_or(&s.drude, c.drude)?;
        c.inset_beta = s.inset_beta.unwrap_or(c.inset_beta);
        c.inset_samples_per_period = s.inset_samples_per_period.unwrap_or(c.inset_samples_per_period);
        c.budget = self.config.uncertainty;
        Ok(c)
    }
}
