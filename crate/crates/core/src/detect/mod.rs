//! Bag-of-words detectors, grid search, ROC analysis and threshold calibration.
//!
//! Scores are probabilities that a review is machine-generated; "fake" is the
//! positive class everywhere and a review is flagged when its score is at
//! least the threshold.

mod cv;
mod eval;
mod lr;
mod nb;
mod roc;

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::{DocTermMatrix, Vocabulary};

pub use cv::{cross_validate, kfold, CandidateScore, CvOutcome, Grid, DEFAULT_GRID};
pub use eval::{evaluate, EvalReport};
pub use lr::{train_lr, FitTrace, LogisticRegression, LrOptions, Objective, Schedule};
pub use nb::{train_nb, NaiveBayes};
pub use roc::{roc, youden_j, RocCurve, RocPoint};

/// Fixed part of the inference sweep; the calibrated threshold is appended.
pub const SWEEP_THRESHOLDS: [f64; 6] = [0.5, 0.6, 0.7, 0.8, 0.9, 0.99];

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    #[serde(alias = "nb")]
    NaiveBayes,
    #[serde(alias = "lr")]
    LogisticRegression,
}

impl DetectorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::NaiveBayes => "naive_bayes",
            DetectorKind::LogisticRegression => "logistic_regression",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            DetectorKind::NaiveBayes => "nb",
            DetectorKind::LogisticRegression => "lr",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive_bayes" | "nb" => Ok(DetectorKind::NaiveBayes),
            "logistic_regression" | "lr" => Ok(DetectorKind::LogisticRegression),
            other => Err(Error::InvalidArgument(format!(
                "unknown detector `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Detector {
    NaiveBayes(NaiveBayes),
    LogisticRegression(LogisticRegression),
}

impl Detector {
    pub fn kind(&self) -> DetectorKind {
        match self {
            Detector::NaiveBayes(_) => DetectorKind::NaiveBayes,
            Detector::LogisticRegression(_) => DetectorKind::LogisticRegression,
        }
    }

    pub fn score_row(&self, row: &[(u32, u32)]) -> f64 {
        match self {
            Detector::NaiveBayes(m) => m.score(row),
            Detector::LogisticRegression(m) => m.score(row),
        }
    }

    pub fn n_terms(&self) -> usize {
        match self {
            Detector::NaiveBayes(m) => m.n_terms(),
            Detector::LogisticRegression(m) => m.n_terms(),
        }
    }

    /// Alpha for naive Bayes, lambda for logistic regression.
    pub fn hyperparameter(&self) -> f64 {
        match self {
            Detector::NaiveBayes(m) => m.alpha,
            Detector::LogisticRegression(m) => m.lambda,
        }
    }
}

/// Train one detector of `kind` with hyperparameter `value`.
pub fn fit(
    kind: DetectorKind,
    matrix: &DocTermMatrix,
    labels: &[bool],
    value: f64,
    lr: &LrOptions,
) -> Result<Detector> {
    match kind {
        DetectorKind::NaiveBayes => train_nb(matrix, labels, value).map(Detector::NaiveBayes),
        DetectorKind::LogisticRegression => {
            train_lr(matrix, labels, value, lr).map(|(m, _)| Detector::LogisticRegression(m))
        }
    }
}

/// A trained detector bound to the vocabulary it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorModel {
    pub detector: Detector,
    pub vocab_fingerprint: String,
}

const MODEL_HEADER: &str = "#fakescope-detector v1";

impl DetectorModel {
    pub fn new(detector: Detector, vocab: &Vocabulary) -> Result<Self> {
        if detector.n_terms() != vocab.len() {
            return Err(Error::InvalidArgument(format!(
                "detector has {} terms, vocabulary {}",
                detector.n_terms(),
                vocab.len()
            )));
        }
        Ok(Self {
            detector,
            vocab_fingerprint: vocab.fingerprint(),
        })
    }

    pub fn check_vocabulary(&self, vocab: &Vocabulary) -> Result<()> {
        if vocab.fingerprint() != self.vocab_fingerprint || vocab.len() != self.detector.n_terms() {
            return Err(Error::Format(
                "detector was trained with a different vocabulary".into(),
            ));
        }
        Ok(())
    }

    pub fn score_row(&self, row: &[(u32, u32)]) -> f64 {
        self.detector.score_row(row)
    }

    pub fn score_matrix(&self, matrix: &DocTermMatrix) -> Vec<f64> {
        matrix.rows().iter().map(|r| self.score_row(r)).collect()
    }

    /// Header block (`key TAB value`) followed by one parameter row per term.
    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{MODEL_HEADER}")?;
        writeln!(w, "kind\t{}", self.detector.kind())?;
        writeln!(w, "vocab_hash\t{}", self.vocab_fingerprint)?;
        writeln!(w, "n_terms\t{}", self.detector.n_terms())?;
        match &self.detector {
            Detector::NaiveBayes(m) => {
                writeln!(w, "alpha\t{}", m.alpha)?;
                writeln!(w, "prior\t{}\t{}", m.log_prior[0], m.log_prior[1])?;
                for (t, (real, fake)) in m.log_likelihood[0]
                    .iter()
                    .zip(&m.log_likelihood[1])
                    .enumerate()
                {
                    writeln!(w, "term\t{t}\t{real}\t{fake}")?;
                }
            }
            Detector::LogisticRegression(m) => {
                writeln!(w, "lambda\t{}", m.lambda)?;
                writeln!(w, "bias\t{}", m.bias)?;
                for (t, weight) in m.weights.iter().enumerate() {
                    writeln!(w, "weight\t{t}\t{weight}")?;
                }
            }
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let bad = |m: String| Error::Format(format!("detector model: {m}"));
        let lines: Vec<String> = r
            .lines()
            .collect::<std::io::Result<_>>()
            .map_err(|e| bad(e.to_string()))?;
        let mut it = lines.iter();
        if it.next().map(String::as_str) != Some(MODEL_HEADER) {
            return Err(bad("missing header".into()));
        }
        let mut field = |key: &str| -> Result<String> {
            let line = it.next().ok_or_else(|| bad(format!("missing `{key}`")))?;
            match line.split_once('\t') {
                Some((k, v)) if k == key => Ok(v.to_string()),
                _ => Err(bad(format!("expected `{key}`, found {line:?}"))),
            }
        };
        let num =
            |s: &str| -> Result<f64> { s.parse().map_err(|_| bad(format!("bad number {s:?}"))) };
        let kind: DetectorKind = field("kind")?.parse()?;
        let vocab_fingerprint = field("vocab_hash")?;
        let n_terms: usize = field("n_terms")?
            .parse()
            .map_err(|_| bad("bad n_terms".into()))?;
        let detector = match kind {
            DetectorKind::NaiveBayes => {
                let alpha = num(&field("alpha")?)?;
                let prior = field("prior")?;
                let (p0, p1) = prior
                    .split_once('\t')
                    .ok_or_else(|| bad("bad prior".into()))?;
                let mut real = Vec::with_capacity(n_terms);
                let mut fake = Vec::with_capacity(n_terms);
                for t in 0..n_terms {
                    let row = field("term")?;
                    let cols: Vec<&str> = row.split('\t').collect();
                    match cols.as_slice() {
                        [idx, r, f] if idx.parse::<usize>().ok() == Some(t) => {
                            real.push(num(r)?);
                            fake.push(num(f)?);
                        }
                        _ => return Err(bad(format!("bad term row {t}"))),
                    }
                }
                Detector::NaiveBayes(NaiveBayes {
                    alpha,
                    log_prior: [num(p0)?, num(p1)?],
                    log_likelihood: [real, fake],
                })
            }
            DetectorKind::LogisticRegression => {
                let lambda = num(&field("lambda")?)?;
                let bias = num(&field("bias")?)?;
                let mut weights = Vec::with_capacity(n_terms);
                for t in 0..n_terms {
                    let row = field("weight")?;
                    match row.split_once('\t') {
                        Some((idx, w)) if idx.parse::<usize>().ok() == Some(t) => {
                            weights.push(num(w)?)
                        }
                        _ => return Err(bad(format!("bad weight row {t}"))),
                    }
                }
                Detector::LogisticRegression(LogisticRegression {
                    lambda,
                    weights,
                    bias,
                })
            }
        };
        if it.next().is_some() {
            return Err(bad("trailing rows".into()));
        }
        Ok(Self {
            detector,
            vocab_fingerprint,
        })
    }
}

/// Youden-optimal threshold plus the full inference sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    #[serde(rename = "j_star")]
    pub j_star_threshold: f64,
    pub j_value: f64,
    #[serde(rename = "sweep")]
    pub sweep_thresholds: Vec<f64>,
}

impl Calibration {
    pub fn from_curve(curve: &RocCurve) -> Result<Self> {
        let (threshold, j) = youden_j(curve);
        Self::new(threshold, j)
    }

    pub fn new(j_star_threshold: f64, j_value: f64) -> Result<Self> {
        Self::with_sweep(&SWEEP_THRESHOLDS, j_star_threshold, j_value)
    }

    /// Custom base thresholds; they must lie in (0, 1) and strictly increase.
    pub fn with_sweep(base: &[f64], j_star_threshold: f64, j_value: f64) -> Result<Self> {
        if base.iter().any(|t| !(*t > 0.0 && *t < 1.0)) || base.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "sweep thresholds {base:?} must lie in (0, 1) and strictly increase"
            )));
        }
        if !(0.0..=1.0).contains(&j_star_threshold) {
            return Err(Error::InvalidArgument(format!(
                "calibrated threshold {j_star_threshold} outside [0, 1]"
            )));
        }
        if !(0.0..=1.0).contains(&j_value) {
            return Err(Error::InvalidArgument(format!(
                "J = {j_value} outside [0, 1]"
            )));
        }
        let mut sweep_thresholds = base.to_vec();
        sweep_thresholds.push(j_star_threshold);
        Ok(Self {
            j_star_threshold,
            j_value,
            sweep_thresholds,
        })
    }

    /// Sweep entries with display labels; the calibrated one is labelled `J`.
    pub fn sweep(&self) -> Vec<SweepPoint> {
        let last = self.sweep_thresholds.len().saturating_sub(1);
        self.sweep_thresholds
            .iter()
            .enumerate()
            .map(|(i, &value)| SweepPoint {
                label: if i == last {
                    "J".to_string()
                } else {
                    format!("{value}")
                },
                value,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub label: String,
    pub value: f64,
}

/// Per-threshold flags over a list of scores.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFlags {
    pub points: Vec<SweepPoint>,
    /// `flags[t][i]`: review `i` flagged as fake at sweep point `t`.
    pub flags: Vec<Vec<bool>>,
}

impl SweepFlags {
    pub fn flagged_fraction(&self, t: usize) -> f64 {
        let f = &self.flags[t];
        if f.is_empty() {
            0.0
        } else {
            f.iter().filter(|&&x| x).count() as f64 / f.len() as f64
        }
    }
}

pub fn classify_sweep(scores: &[f64], calibration: &Calibration) -> Result<SweepFlags> {
    if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::InvalidArgument(format!("score {s} outside [0, 1]")));
    }
    let points = calibration.sweep();
    let flags = points
        .iter()
        .map(|p| scores.iter().map(|&s| s >= p.value).collect())
        .collect();
    Ok(SweepFlags { points, flags })
}
