//! Run configuration: the merged view of CLI flags and optional config
//! files. Config files are flat `key = value` text mirroring the flags
//! one-to-one; section headers like `[grid]` are purely organizational and
//! any flag given on the command line overrides the file.

use crate::models::{ModelError, OscillatorModel, ScarfModel, SolvableModel, Tower};
use crate::spectral::StencilOrder;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown model '{0}' (expected pt-oscillator or scarf2)")]
    UnknownModel(String),
    #[error("unknown tower '{0}' (expected + or -)")]
    UnknownTower(String),
    #[error("unknown stencil order {0} (expected 2 or 4)")]
    UnknownStencil(String),
    #[error("unknown output format '{0}' (expected csv or json)")]
    UnknownFormat(String),
    #[error("config file {path}: line {line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("could not read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid value for '{key}': '{value}'")]
    BadValue { key: String, value: String },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    PtOscillator,
    Scarf2,
}

impl ModelKind {
    pub fn parse(s: &str) -> Result<ModelKind, ConfigError> {
        match s {
            "pt-oscillator" | "oscillator" => Ok(ModelKind::PtOscillator),
            "scarf2" | "scarf" => Ok(ModelKind::Scarf2),
            other => Err(ConfigError::UnknownModel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<OutputFormat, ConfigError> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(ConfigError::UnknownFormat(other.to_string())),
        }
    }
}

pub fn parse_tower(s: &str) -> Result<Tower, ConfigError> {
    match s {
        "+" | "plus" => Ok(Tower::Plus),
        "-" | "minus" => Ok(Tower::Minus),
        other => Err(ConfigError::UnknownTower(other.to_string())),
    }
}

pub fn parse_stencil(s: &str) -> Result<StencilOrder, ConfigError> {
    match s {
        "2" => Ok(StencilOrder::Two),
        "4" => Ok(StencilOrder::Four),
        other => Err(ConfigError::UnknownStencil(other.to_string())),
    }
}

pub fn parse_indices(s: &str) -> Result<Vec<usize>, ConfigError> {
    s.split(',')
        .map(|part| {
            part.trim().parse::<usize>().map_err(|_| ConfigError::BadValue {
                key: "indices".into(),
                value: s.into(),
            })
        })
        .collect()
}

/// Fully resolved run settings; every field has a concrete value after
/// merging flags, file and defaults.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub model: ModelKind,
    pub alpha: f64,
    pub eps: f64,
    pub qp: i32,
    pub lambda: f64,
    pub mu: f64,
    pub tower: Tower,
    pub indices: Vec<usize>,
    pub grid_l: Option<f64>,
    pub grid_n: Option<usize>,
    pub stencil: StencilOrder,
    pub tol_spectrum: f64,
    pub levels: usize,
    pub refine: usize,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelKind::PtOscillator,
            alpha: 0.75,
            eps: 1.0,
            qp: 1,
            lambda: 30.0,
            mu: 5.0,
            tower: Tower::Plus,
            indices: vec![1, 2],
            grid_l: None,
            grid_n: None,
            stencil: StencilOrder::Four,
            tol_spectrum: 1e-3,
            levels: 6,
            refine: 0,
            out: None,
            format: OutputFormat::Json,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.tol_spectrum <= 0.0 {
            return Err(ConfigError::BadTolerance(self.tol_spectrum));
        }
        self.build_model()?;
        Ok(())
    }

    pub fn build_model(&self) -> Result<SolvableModel, ConfigError> {
        Ok(match self.model {
            ModelKind::PtOscillator => SolvableModel::Oscillator(OscillatorModel::new(
                self.alpha, self.eps, self.qp,
            )?),
            ModelKind::Scarf2 => {
                SolvableModel::Scarf(ScarfModel::new(self.lambda, self.mu, Some(self.tower))?)
            }
        })
    }

    /// Grid half-width and point count, falling back to the model defaults.
    pub fn grid_shape(&self) -> Result<(f64, usize), ConfigError> {
        let (dl, dn) = self.build_model()?.default_grid();
        Ok((self.grid_l.unwrap_or(dl), self.grid_n.unwrap_or(dn)))
    }

    /// Apply a parsed `key = value` map (from a config file); keys present
    /// in `overridden` keep their current (command line) value.
    pub fn apply_file_values(
        &mut self,
        values: &BTreeMap<String, String>,
        overridden: &[&str],
        path: &Path,
    ) -> Result<(), ConfigError> {
        let bad = |key: &str, value: &str| ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
        };
        for (key, value) in values {
            if overridden.contains(&key.as_str()) {
                continue;
            }
            match key.as_str() {
                "model" => self.model = ModelKind::parse(value)?,
                "alpha" => self.alpha = value.parse().map_err(|_| bad(key, value))?,
                "eps" => self.eps = value.parse().map_err(|_| bad(key, value))?,
                "qp" => {
                    self.qp = match value.as_str() {
                        "+1" | "+" => 1,
                        "-1" | "-" => -1,
                        other => other.parse().map_err(|_| bad(key, value))?,
                    }
                }
                "lambda" => self.lambda = value.parse().map_err(|_| bad(key, value))?,
                "mu" => self.mu = value.parse().map_err(|_| bad(key, value))?,
                "tower" => self.tower = parse_tower(value)?,
                "indices" => self.indices = parse_indices(value)?,
                "grid-l" => {
                    self.grid_l = Some(value.parse().map_err(|_| bad(key, value))?)
                }
                "grid-n" => {
                    self.grid_n = Some(value.parse().map_err(|_| bad(key, value))?)
                }
                "stencil" => self.stencil = parse_stencil(value)?,
                "tol-spectrum" => {
                    self.tol_spectrum = value.parse().map_err(|_| bad(key, value))?
                }
                "levels" => self.levels = value.parse().map_err(|_| bad(key, value))?,
                "refine" => self.refine = value.parse().map_err(|_| bad(key, value))?,
                "out" => self.out = Some(PathBuf::from(value)),
                "format" => self.format = OutputFormat::parse(value)?,
                other => {
                    return Err(ConfigError::Parse {
                        path: path.to_path_buf(),
                        line: 0,
                        reason: format!("unknown key '{other}'"),
                    })
                }
            }
        }
        Ok(())
    }
}

/// Parse flat `key = value` text. Section headers `[name]` and `#` comments
/// are allowed; keys are global.
pub fn parse_config_text(
    text: &str,
    path: &Path,
) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut values = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                reason: format!("expected 'key = value', got '{line}'"),
            });
        };
        values.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(values)
}

pub fn load_config_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_text(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_builds_the_oscillator() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let model = cfg.build_model().unwrap();
        assert_eq!(model.name(), "pt-oscillator");
        assert_eq!(cfg.grid_shape().unwrap(), (8.0, 1601));
    }

    #[test]
    fn config_text_round_trip() {
        let text = "\
[model]
model = scarf2
lambda = 30  # strength
mu = 5
tower = +

[grid]
grid-l = 18
grid-n = 1601

[output]
format = csv
";
        let values = parse_config_text(text, Path::new("test.cfg")).unwrap();
        let mut cfg = RunConfig::default();
        cfg.apply_file_values(&values, &[], Path::new("test.cfg")).unwrap();
        assert_eq!(cfg.model, ModelKind::Scarf2);
        assert_eq!(cfg.grid_l, Some(18.0));
        assert_eq!(cfg.grid_n, Some(1601));
        assert_eq!(cfg.format, OutputFormat::Csv);
        assert_eq!(cfg.build_model().unwrap().name(), "scarf2");
    }

    #[test]
    fn command_line_wins_over_file() {
        let values = parse_config_text("alpha = 0.3\neps = 2.0\n", Path::new("t.cfg")).unwrap();
        let mut cfg = RunConfig::default();
        cfg.apply_file_values(&values, &["alpha"], Path::new("t.cfg")).unwrap();
        assert_eq!(cfg.alpha, 0.75);
        assert_eq!(cfg.eps, 2.0);
    }

    #[test]
    fn unknown_keys_and_bad_lines_are_rejected() {
        let values = parse_config_text("bogus = 1\n", Path::new("t.cfg")).unwrap();
        let mut cfg = RunConfig::default();
        assert!(cfg.apply_file_values(&values, &[], Path::new("t.cfg")).is_err());
        assert!(parse_config_text("no equals here\n", Path::new("t.cfg")).is_err());
    }

    #[test]
    fn broken_pt_regime_is_a_config_error() {
        let mut cfg = RunConfig::default();
        cfg.model = ModelKind::Scarf2;
        cfg.mu = 40.0;
        cfg.lambda = 30.0;
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::Model(ModelError::BrokenPTRegime { .. }))
        ));
    }

    #[test]
    fn indices_parse_and_reject_garbage() {
        assert_eq!(parse_indices("0, 2").unwrap(), vec![0, 2]);
        assert!(parse_indices("1,x").is_err());
    }
}
