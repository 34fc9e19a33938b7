use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{Mixture, SyntheticConfig};
use crate::synthesis::{DEFAULT_BUDGET, DEFAULT_GAMMA, DEFAULT_MAX_DEPTH};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {msg}")]
    Parse { path: PathBuf, msg: String },
    #[error("config value out of range: {0}")]
    Range(String),
}

/// Synthetic corpus shape; its seed is `seeds.corpus`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    #[serde(default)]
    pub mixture: Mixture,
    #[serde(default = "default_per_table")]
    pub per_table: usize,
}

fn default_per_table() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Synthetic(SyntheticSpec),
    /// `tables_dir` holds one `<table_id>.csv` per table.
    Files { tables_dir: PathBuf, statements: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectorSettings {
    pub epochs: usize,
    pub lr: f64,
}

impl Default for SelectorSettings {
    fn default() -> Self {
        SelectorSettings { epochs: 30, lr: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionSettings {
    pub d: usize,
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
}

fn default_init_scale() -> f64 {
    0.1
}

impl Default for FusionSettings {
    fn default() -> Self {
        FusionSettings {
            d: crate::fusion::DEFAULT_DIM,
            lr: 0.05,
            epochs: 30,
            batch: 16,
            init_scale: default_init_scale(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub corpus: u64,
    pub selector: u64,
    pub augment: u64,
    pub fusion: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub output_dir: PathBuf,
    pub data: DataSource,
    pub seeds: Seeds,
    #[serde(default = "default_splits")]
    pub split_fractions: [f64; 3],
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    #[serde(default)]
    pub selector: SelectorSettings,
    #[serde(default)]
    pub fusion: FusionSettings,
    #[serde(default = "default_volume")]
    pub augment_volume: usize,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_splits() -> [f64; 3] {
    [0.7, 0.1, 0.2]
}
fn default_gamma() -> f64 {
    DEFAULT_GAMMA
}
fn default_budget() -> usize {
    DEFAULT_BUDGET
}
fn default_max_depth() -> usize {
    DEFAULT_MAX_DEPTH
}
fn default_volume() -> usize {
    1
}

fn positive(name: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::Range(format!("{name} must be positive and finite, got {v}")))
    }
}

fn within(name: &str, v: usize, lo: usize, hi: usize) -> Result<(), ConfigError> {
    if (lo..=hi).contains(&v) {
        Ok(())
    } else {
        Err(ConfigError::Range(format!("{name} must be in {lo}..={hi}, got {v}")))
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<PipelineConfig, ConfigError> {
        let mut cfg: PipelineConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<PipelineConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        PipelineConfig::from_json(&text, path)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("gamma", self.gamma)?;
        if self.gamma > 1.0 {
            return Err(ConfigError::Range(format!("gamma must be at most 1, got {}", self.gamma)));
        }
        within("budget", self.budget, 1, 100_000)?;
        within("max_depth", self.max_depth, 1, 8)?;
        within("selector.epochs", self.selector.epochs, 0, 10_000)?;
        positive("selector.lr", self.selector.lr)?;
        within("fusion.d", self.fusion.d, 1, 1024)?;
        within("fusion.epochs", self.fusion.epochs, 0, 10_000)?;
        within("fusion.batch", self.fusion.batch, 1, 100_000)?;
        positive("fusion.lr", self.fusion.lr)?;
        positive("fusion.init_scale", self.fusion.init_scale)?;
        within("augment_volume", self.augment_volume, 0, 10)?;
        let f = self.split_fractions;
        if f.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 || f[0] <= 0.0 {
            return Err(ConfigError::Range(format!(
                "split_fractions must be non-negative, sum to 1, and give train a positive share, got {f:?}"
            )));
        }
        if let DataSource::Synthetic(_) = &self.data {
            self.synthetic()
                .expect("synthetic source")
                .validate()
                .map_err(|e| ConfigError::Range(e.to_string()))?;
        }
        Ok(())
    }

    pub fn synthetic(&self) -> Option<SyntheticConfig> {
        match &self.data {
            DataSource::Synthetic(s) => Some(SyntheticConfig {
                n: s.n,
                rows: s.rows,
                cols: s.cols,
                seed: self.seeds.corpus,
                mixture: s.mixture,
                per_table: s.per_table,
            }),
            DataSource::Files { .. } => None,
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }
}
