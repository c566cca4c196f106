use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Classification report with fake as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    /// No positive predictions; precision reported as 0.
    pub precision_undefined: bool,
    /// No positive labels; recall reported as 0.
    pub recall_undefined: bool,
}

pub fn evaluate(predictions: &[bool], labels: &[bool]) -> Result<EvalReport> {
    if predictions.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::Undefined("evaluation of zero items".into()));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(EvalReport {
        accuracy: ratio(tp + tn, labels.len()),
        precision,
        recall,
        f1,
        tp,
        fp,
        tn,
        fn_,
        precision_undefined: tp + fp == 0,
        recall_undefined: tp + fn_ == 0,
    })
}
