use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::dist::ptukey;
use super::Significance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TukeyPair {
    pub group_a: String,
    pub group_b: String,
    pub mean_a: f64,
    pub mean_b: f64,
    /// mean_b - mean_a.
    pub mean_diff: f64,
    pub q: f64,
    pub p: f64,
    pub significance: Significance,
}

impl TukeyPair {
    /// The same comparison seen from the other side.
    pub fn reversed(&self) -> Self {
        Self {
            group_a: self.group_b.clone(),
            group_b: self.group_a.clone(),
            mean_a: self.mean_b,
            mean_b: self.mean_a,
            mean_diff: -self.mean_diff,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TukeyResult {
    pub pairs: Vec<TukeyPair>,
    pub ms_within: f64,
    pub df_within: u64,
    pub k: usize,
    /// Pooled within-group variance is zero; q is infinite for any nonzero
    /// difference and zero otherwise.
    pub degenerate: bool,
}

/// Tukey–Kramer studentized range statistic for one pair of groups.
pub fn tukey_kramer_q(mean_a: f64, mean_b: f64, n_a: usize, n_b: usize, ms_within: f64) -> f64 {
    let diff = (mean_a - mean_b).abs();
    let se = (ms_within / 2.0 * (1.0 / n_a as f64 + 1.0 / n_b as f64)).sqrt();
    if se == 0.0 {
        return if diff == 0.0 { 0.0 } else { f64::INFINITY };
    }
    diff / se
}

/// All-pairs comparison of group means. Pairs are emitted in input order
/// (0,1), (0,2), ..., (k-2,k-1).
pub fn tukey_hsd<S: AsRef<str>, G: AsRef<[f64]>>(groups: &[(S, G)]) -> Result<TukeyResult> {
    if groups.len() < 2 {
        return Err(Error::InvalidArgument(
            "Tukey HSD needs at least two groups".into(),
        ));
    }
    for (name, g) in groups {
        if g.as_ref().len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "group {} has fewer than two values",
                name.as_ref()
            )));
        }
        if g.as_ref().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "group {} has a non-finite value",
                name.as_ref()
            )));
        }
    }
    let k = groups.len();
    let means: Vec<f64> = groups
        .iter()
        .map(|(_, g)| g.as_ref().iter().sum::<f64>() / g.as_ref().len() as f64)
        .collect();
    let n: usize = groups.iter().map(|(_, g)| g.as_ref().len()).sum();
    let ss_within: f64 = groups
        .iter()
        .zip(&means)
        .map(|((_, g), m)| g.as_ref().iter().map(|v| (v - m).powi(2)).sum::<f64>())
        .sum();
    let df_within = (n - k) as u64;
    let ms_within = ss_within / df_within as f64;
    let degenerate = ms_within == 0.0;

    let mut pairs = Vec::with_capacity(k * (k - 1) / 2);
    for a in 0..k {
        for b in a + 1..k {
            let (na, nb) = (groups[a].1.as_ref().len(), groups[b].1.as_ref().len());
            let q = tukey_kramer_q(means[a], means[b], na, nb, ms_within);
            let p = if q.is_infinite() {
                0.0
            } else {
                1.0 - ptukey(q, k, df_within as f64)?
            };
            pairs.push(TukeyPair {
                group_a: groups[a].0.as_ref().to_string(),
                group_b: groups[b].0.as_ref().to_string(),
                mean_a: means[a],
                mean_b: means[b],
                mean_diff: means[b] - means[a],
                q,
                p,
                significance: Significance::from_p(p),
            });
        }
    }
    Ok(TukeyResult {
        pairs,
        ms_within,
        df_within,
        k,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_groups_nothing_significant() {
        let g = [1.0, 2.0, 3.0, 4.0];
        let r = tukey_hsd(&[("a", g), ("b", g), ("c", g)]).unwrap();
        assert_eq!(r.pairs.len(), 3);
        for p in &r.pairs {
            assert_eq!(p.mean_diff, 0.0);
            assert_eq!(p.significance, Significance::None);
        }
    }

    #[test]
    fn four_categories_give_six_rows() {
        let groups: Vec<(String, Vec<f64>)> = (0..4)
            .map(|i| {
                (
                    format!("c{i}"),
                    vec![i as f64, i as f64 + 1.0, i as f64 + 3.0],
                )
            })
            .collect();
        assert_eq!(tukey_hsd(&groups).unwrap().pairs.len(), 6);
    }

    /// Same formula written independently from raw sums.
    fn oracle_q(a: &[f64], b: &[f64], all: &[&[f64]]) -> f64 {
        let avg = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
        let mut ssw = 0.0;
        let mut n = 0;
        for g in all {
            let m = avg(g);
            for v in g.iter() {
                ssw += (v - m) * (v - m);
            }
            n += g.len();
        }
        let msw = ssw / (n - all.len()) as f64;
        (avg(a) - avg(b)).abs() / (msw * (1.0 / a.len() as f64 + 1.0 / b.len() as f64) / 2.0).sqrt()
    }

    #[test]
    fn textbook_three_groups() {
        let a = [24.5, 23.5, 26.4, 27.1, 29.9];
        let b = [28.4, 34.2, 29.5, 32.2, 30.1];
        let c = [26.1, 28.3, 24.3, 26.2, 27.8, 30.0];
        let all: [&[f64]; 3] = [&a, &b, &c];
        let r = tukey_hsd(&[("a", &a[..]), ("b", &b[..]), ("c", &c[..])]).unwrap();
        let expect = [
            oracle_q(&a, &b, &all),
            oracle_q(&a, &c, &all),
            oracle_q(&b, &c, &all),
        ];
        for (p, q) in r.pairs.iter().zip(expect) {
            assert!((p.q - q).abs() < 1e-9);
        }
        // a vs b is the clear difference here.
        assert!(r.pairs[0].p < 0.05);
        assert!(
            (r.pairs[0].mean_diff - (b.iter().sum::<f64>() / 5.0 - a.iter().sum::<f64>() / 5.0))
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn degenerate_variance_flagged() {
        let r = tukey_hsd(&[("a", [1.0, 1.0]), ("b", [2.0, 2.0])]).unwrap();
        assert!(r.degenerate);
        assert!(r.pairs[0].q.is_infinite());
        assert_eq!(r.pairs[0].significance, Significance::P001);
    }

    #[test]
    fn too_small_groups_rejected() {
        assert!(tukey_hsd(&[("a", vec![1.0]), ("b", vec![2.0, 3.0])]).is_err());
        assert!(tukey_hsd(&[("a", vec![1.0, 2.0])]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn antisymmetric_and_nested(groups in prop::collection::vec(prop::collection::vec(0.0f64..10.0, 2..8), 2..5)) {
            let named: Vec<(String, Vec<f64>)> = groups.iter().enumerate().map(|(i, g)| (format!("g{i}"), g.clone())).collect();
            let r = tukey_hsd(&named).unwrap();
            for p in &r.pairs {
                let rev = p.reversed();
                prop_assert_eq!(rev.mean_diff, -p.mean_diff);
                prop_assert_eq!(rev.q, p.q);
                let s = p.significance;
                prop_assert!(s.at(0.001) <= s.at(0.01) && s.at(0.01) <= s.at(0.05));
                prop_assert!((0.0..=1.0).contains(&p.p));
            }
        }
    }
}
