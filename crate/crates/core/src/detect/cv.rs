//! Exhaustive grid search with seeded k-fold cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::error::{Error, Result};
use crate::textproc::DocTermMatrix;

use super::{fit, DetectorKind, LrOptions};

/// Search space from the original benchmark for both alpha and lambda.
pub const DEFAULT_GRID: [f64; 6] = [0.001, 0.01, 0.1, 1.0, 10.0, 100.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub kind: DetectorKind,
    /// Alpha values for naive Bayes, lambda values for logistic regression.
    pub values: Vec<f64>,
}

impl Grid {
    pub fn default_for(kind: DetectorKind) -> Self {
        Self {
            kind,
            values: DEFAULT_GRID.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub value: f64,
    pub mean_accuracy: f64,
    pub folds_scored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub kind: DetectorKind,
    pub best: f64,
    pub candidates: Vec<CandidateScore>,
}

/// Shuffle `0..n` with `seed` and deal the indices into `k` folds.
pub fn kfold(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (pos, i) in idx.into_iter().enumerate() {
        folds[pos % k].push(i);
    }
    folds
}

fn single_class(labels: &[bool], idx: &[usize]) -> bool {
    let fakes = idx.iter().filter(|&&i| labels[i]).count();
    fakes == 0 || fakes == idx.len()
}

fn fold_accuracy(
    matrix: &DocTermMatrix,
    labels: &[bool],
    kind: DetectorKind,
    value: f64,
    train_idx: &[usize],
    valid_idx: &[usize],
    lr: &LrOptions,
) -> Result<f64> {
    let train_labels: Vec<bool> = train_idx.iter().map(|&i| labels[i]).collect();
    let model = fit(kind, &matrix.select(train_idx), &train_labels, value, lr)?;
    let correct = valid_idx
        .iter()
        .filter(|&&i| (model.score_row(matrix.row(i)) >= 0.5) == labels[i])
        .count();
    Ok(correct as f64 / valid_idx.len() as f64)
}

/// Mean validation accuracy (at the 0.5 cut) for every grid value; the best
/// mean wins and ties go to the smaller value. Folds whose training or
/// validation part holds a single class are skipped, as are fits that fail
/// to converge.
pub fn cross_validate(
    matrix: &DocTermMatrix,
    labels: &[bool],
    grid: &Grid,
    k: usize,
    seed: u64,
    lr: &LrOptions,
) -> Result<CvOutcome> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "k = {k} folds; need at least 2"
        )));
    }
    if grid.values.is_empty() {
        return Err(Error::InvalidArgument("empty hyperparameter grid".into()));
    }
    if labels.len() != matrix.n_docs() {
        return Err(Error::InvalidArgument(
            "one label per document required".into(),
        ));
    }
    if labels.len() < k {
        return Err(Error::InvalidArgument(format!(
            "{} documents for {k} folds",
            labels.len()
        )));
    }
    let folds = kfold(labels.len(), k, seed);
    let splits: Vec<(Vec<usize>, &[usize])> = folds
        .iter()
        .enumerate()
        .filter_map(|(f, valid)| {
            let mut train: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|&(g, _)| g != f)
                .flat_map(|(_, idx)| idx.iter().copied())
                .collect();
            train.sort_unstable();
            if single_class(labels, &train) || single_class(labels, valid) {
                warn!(fold = f, "fold holds a single class; skipped");
                None
            } else {
                Some((train, valid.as_slice()))
            }
        })
        .collect();

    let candidates: Vec<CandidateScore> = grid
        .values
        .par_iter()
        .map(|&value| {
            let scores: Vec<f64> = splits
                .iter()
                .filter_map(|(train, valid)| {
                    match fold_accuracy(matrix, labels, grid.kind, value, train, valid, lr) {
                        Ok(acc) => Some(acc),
                        Err(e) => {
                            warn!(value, error = %e, "fold fit failed; skipped");
                            None
                        }
                    }
                })
                .collect();
            let mean = if scores.is_empty() {
                f64::NAN
            } else {
                scores.iter().sum::<f64>() / scores.len() as f64
            };
            CandidateScore {
                value,
                mean_accuracy: mean,
                folds_scored: scores.len(),
            }
        })
        .collect();

    let best = candidates
        .iter()
        .filter(|c| c.folds_scored > 0)
        .min_by(|a, b| {
            b.mean_accuracy
                .total_cmp(&a.mean_accuracy)
                .then(a.value.total_cmp(&b.value))
        })
        .ok_or_else(|| Error::Undefined("no grid candidate could be scored".into()))?;
    Ok(CvOutcome {
        kind: grid.kind,
        best: best.value,
        candidates,
    })
}
