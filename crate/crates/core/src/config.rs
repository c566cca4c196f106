//! Run configuration: a JSON file whose every key is optional. Command-line
//! flags are applied on top by the binary.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detect::{DetectorKind, DEFAULT_GRID, SWEEP_THRESHOLDS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    #[default]
    Words,
    Bpe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Mock,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub backend: BackendKind,
    pub endpoint: String,
    pub max_inflight: usize,
    /// Record fixtures here when set (live calls), or replay from here when
    /// `replay` is true.
    pub fixtures: Option<PathBuf>,
    pub replay: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            backend: BackendKind::Mock,
            endpoint: "http://127.0.0.1:8080/v1/completions".into(),
            max_inflight: 4,
            fixtures: None,
            replay: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub nb: Vec<f64>,
    pub lr: Vec<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            nb: DEFAULT_GRID.to_vec(),
            lr: DEFAULT_GRID.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmConfig {
    pub order: usize,
    pub k: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self { order: 3, k: 0.1 }
    }
}

/// Optional replacements for the bundled word lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ResourceConfig {
    pub dale_chall: Option<PathBuf>,
    pub sentiment_positive: Option<PathBuf>,
    pub sentiment_negative: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Input for `ingest`; `.csv` selects the CSV reader.
    pub corpus: PathBuf,
    pub cutoff_year: i32,
    pub train_fraction: f64,
    pub validation_fraction: f64,
    pub stratified: bool,
    pub folds: usize,
    pub grid: GridConfig,
    pub detector: DetectorKind,
    pub features: FeatureKind,
    pub bpe_merges: usize,
    pub sweep: Vec<f64>,
    pub lm: LmConfig,
    pub gen: GenConfig,
    pub resources: ResourceConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            out_dir: PathBuf::from("out"),
            corpus: PathBuf::from("data/reviews.jsonl"),
            cutoff_year: 2020,
            train_fraction: 0.8,
            validation_fraction: 0.2,
            stratified: false,
            folds: 5,
            grid: GridConfig::default(),
            detector: DetectorKind::LogisticRegression,
            features: FeatureKind::Words,
            bpe_merges: 400,
            sweep: SWEEP_THRESHOLDS.to_vec(),
            lm: LmConfig::default(),
            gen: GenConfig::default(),
            resources: ResourceConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&raw)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!(
                "train_fraction {} outside (0, 1)",
                self.train_fraction
            ));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad(format!(
                "validation_fraction {} outside (0, 1)",
                self.validation_fraction
            ));
        }
        if self.folds < 2 {
            return bad(format!("folds = {}; need at least 2", self.folds));
        }
        if self.sweep.iter().any(|t| !(*t > 0.0 && *t < 1.0))
            || self.sweep.windows(2).any(|w| w[0] >= w[1])
        {
            return bad(format!(
                "sweep {:?} must lie in (0, 1) and strictly increase",
                self.sweep
            ));
        }
        if self.grid.nb.is_empty() || self.grid.nb.iter().any(|a| a.is_nan() || *a <= 0.0) {
            return bad("naive Bayes grid must be non-empty with alpha > 0".into());
        }
        if self.grid.lr.is_empty() || self.grid.lr.iter().any(|l| l.is_nan() || *l < 0.0) {
            return bad("logistic regression grid must be non-empty with lambda >= 0".into());
        }
        if self.lm.order == 0 || self.lm.k.is_nan() || self.lm.k <= 0.0 {
            return bad("lm.order must be >= 1 and lm.k > 0".into());
        }
        if self.gen.max_inflight == 0 {
            return bad("gen.max_inflight must be >= 1".into());
        }
        Ok(())
    }
}
