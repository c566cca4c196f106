use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::dist::f_sf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub group_means: Vec<f64>,
    pub group_sizes: Vec<usize>,
    pub grand_mean: f64,
    pub ss_between: f64,
    pub ss_within: f64,
    pub df_between: u64,
    pub df_within: u64,
    pub f: f64,
    pub p: f64,
    /// Within-group variance vanished while the means differ.
    pub infinite_f: bool,
}

impl AnovaResult {
    pub fn ms_within(&self) -> f64 {
        self.ss_within / self.df_within as f64
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// One-way analysis of variance. With no within-group spread, differing
/// means give an infinite F (p = 0) and equal means give F = 0 (p = 1).
pub fn anova_oneway<G: AsRef<[f64]>>(groups: &[G]) -> Result<AnovaResult> {
    if groups.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "{} group(s); ANOVA needs two",
            groups.len()
        )));
    }
    if let Some(i) = groups.iter().position(|g| g.as_ref().is_empty()) {
        return Err(Error::InvalidArgument(format!("group {i} is empty")));
    }
    if groups
        .iter()
        .flat_map(|g| g.as_ref())
        .any(|v| !v.is_finite())
    {
        return Err(Error::InvalidArgument("non-finite observation".into()));
    }
    let n: usize = groups.iter().map(|g| g.as_ref().len()).sum();
    if n <= groups.len() {
        return Err(Error::InvalidArgument(format!(
            "{n} observations in {} groups leave no within-group degrees of freedom",
            groups.len()
        )));
    }
    let group_means: Vec<f64> = groups.iter().map(|g| mean(g.as_ref())).collect();
    let group_sizes: Vec<usize> = groups.iter().map(|g| g.as_ref().len()).collect();
    let grand_mean = groups.iter().flat_map(|g| g.as_ref()).sum::<f64>() / n as f64;
    let ss_between: f64 = group_means
        .iter()
        .zip(&group_sizes)
        .map(|(m, &k)| k as f64 * (m - grand_mean).powi(2))
        .sum();
    let ss_within: f64 = groups
        .iter()
        .zip(&group_means)
        .map(|(g, m)| g.as_ref().iter().map(|v| (v - m).powi(2)).sum::<f64>())
        .sum();
    let df_between = (groups.len() - 1) as u64;
    let df_within = (n - groups.len()) as u64;

    let ss_total = ss_between + ss_within;
    let (f, p, infinite_f) = if ss_total == 0.0 || ss_between <= 1e-14 * ss_total {
        (0.0, 1.0, false)
    } else if ss_within <= 1e-14 * ss_total {
        (f64::INFINITY, 0.0, true)
    } else {
        let f = (ss_between / df_between as f64) / (ss_within / df_within as f64);
        (f, f_sf(f, df_between, df_within)?, false)
    };
    Ok(AnovaResult {
        group_means,
        group_sizes,
        grand_mean,
        ss_between,
        ss_within,
        df_between,
        df_within,
        f,
        p,
        infinite_f,
    })
}
