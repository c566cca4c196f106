use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
}

/// Operating points sorted by ascending threshold. The classification rule
/// is `score >= threshold` means fake. The first point sits at the lowest
/// score (everything flagged); the last is a sentinel above every score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    points: Vec<RocPoint>,
}

impl RocCurve {
    pub fn points(&self) -> &[RocPoint] {
        &self.points
    }

    /// Trapezoidal area under the curve.
    pub fn auc(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[0].fpr - w[1].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
            .sum()
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let fail = |e: csv::Error| Error::Format(e.to_string());
        wtr.write_record(["threshold", "tpr", "fpr"])
            .map_err(fail)?;
        for p in &self.points {
            wtr.write_record([
                p.threshold.to_string(),
                p.tpr.to_string(),
                p.fpr.to_string(),
            ])
            .map_err(fail)?;
        }
        wtr.flush().map_err(|e| Error::io("<roc csv>", e))
    }
}

pub fn roc(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidArgument(
            "scores and labels differ in length".into(),
        ));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument("score is NaN".into()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    // Walk from the highest score down; each distinct score is a threshold.
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        tpr: 0.0,
        fpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold,
            tpr: tp as f64 / positives as f64,
            fpr: fp as f64 / negatives as f64,
        });
    }
    points.reverse();
    Ok(RocCurve { points })
}

/// Threshold maximizing `tpr - fpr`, ties going to the lower threshold.
pub fn youden_j(curve: &RocCurve) -> (f64, f64) {
    let mut best = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &curve.points {
        let j = p.tpr - p.fpr;
        if j > best.1 {
            best = (p.threshold, j);
        }
    }
    best
}
