use crate::error::{Error, Result};
use crate::textproc::DocTermMatrix;

use super::sigmoid;

/// Multinomial naive Bayes over term counts. Class 0 is real, class 1 fake.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayes {
    pub alpha: f64,
    pub log_prior: [f64; 2],
    /// Per class, log p(term | class) for every vocabulary term.
    pub log_likelihood: [Vec<f64>; 2],
}

pub fn train_nb(matrix: &DocTermMatrix, labels: &[bool], alpha: f64) -> Result<NaiveBayes> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "alpha {alpha} must be positive"
        )));
    }
    if labels.len() != matrix.n_docs() {
        return Err(Error::InvalidArgument(
            "one label per document required".into(),
        ));
    }
    let n_fake = labels.iter().filter(|&&l| l).count();
    if n_fake == 0 || n_fake == labels.len() {
        return Err(Error::SingleClass);
    }
    let v = matrix.n_terms();
    let mut counts = [vec![0.0f64; v], vec![0.0f64; v]];
    for (row, &label) in matrix.rows().iter().zip(labels) {
        let class = usize::from(label);
        for &(t, c) in row {
            counts[class][t as usize] += f64::from(c);
        }
    }
    let log_likelihood = counts.map(|class_counts| {
        let denom = (class_counts.iter().sum::<f64>() + alpha * v as f64).ln();
        class_counts
            .iter()
            .map(|&c| (c + alpha).ln() - denom)
            .collect()
    });
    let n = labels.len() as f64;
    Ok(NaiveBayes {
        alpha,
        log_prior: [((n - n_fake as f64) / n).ln(), (n_fake as f64 / n).ln()],
        log_likelihood,
    })
}

impl NaiveBayes {
    pub fn n_terms(&self) -> usize {
        self.log_likelihood[0].len()
    }

    /// log P(fake | doc) - log P(real | doc).
    pub fn log_odds(&self, row: &[(u32, u32)]) -> f64 {
        let mut lo = self.log_prior[1] - self.log_prior[0];
        for &(t, c) in row {
            let t = t as usize;
            lo += f64::from(c) * (self.log_likelihood[1][t] - self.log_likelihood[0][t]);
        }
        lo
    }

    pub fn score(&self, row: &[(u32, u32)]) -> f64 {
        sigmoid(self.log_odds(row))
    }
}
