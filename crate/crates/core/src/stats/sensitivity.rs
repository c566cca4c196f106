use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Review;
use crate::detect::SweepFlags;
use crate::error::{Error, Result};
use crate::stylometrics::StyleMetricVector;

use super::anova::anova_oneway;
use super::dist::mean_ci;
use super::Significance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Category {
    Review,
    User,
    Restaurant,
    Writing,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Review => "Review",
            Self::User => "User",
            Self::Restaurant => "Restaurant",
            Self::Writing => "Writing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Variable {
    pub name: &'static str,
    pub category: Category,
}

const fn var(name: &'static str, category: Category) -> Variable {
    Variable { name, category }
}

/// The compared variables, in report order.
pub const VARIABLES: [Variable; 16] = [
    var("Rating", Category::Review),
    var("#Friends", Category::User),
    var("#Reviews", Category::User),
    var("#Photos", Category::User),
    var("AvgRating", Category::Restaurant),
    var("PriceLevel", Category::Restaurant),
    var("#RestReviews", Category::Restaurant),
    var("#Visits", Category::Restaurant),
    var("NormVisits", Category::Restaurant),
    var("ChainStatus", Category::Restaurant),
    var("Perplexity", Category::Writing),
    var("Coherence", Category::Writing),
    var("ARI", Category::Writing),
    var("#DW", Category::Writing),
    var("RTime", Category::Writing),
    var("Sentiment", Category::Writing),
];

/// One value per entry of [`VARIABLES`].
pub type Covariates = [f64; 16];

pub fn covariates(review: &Review, chain: bool, m: &StyleMetricVector) -> Covariates {
    [
        review.rating as f64,
        review.num_friends as f64,
        review.num_user_reviews as f64,
        review.num_user_photos as f64,
        review.avg_rating,
        review.price_level as f64,
        review.num_rest_reviews as f64,
        review.num_visits as f64,
        review.norm_visits,
        if chain { 1.0 } else { 0.0 },
        m.ppl,
        m.tc,
        m.ari,
        m.num_difficult_words as f64,
        m.rtime_seconds,
        m.sentiment,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub threshold_label: String,
    pub threshold: f64,
    pub variable: String,
    pub category: Category,
    pub n_human: usize,
    pub n_ai: usize,
    pub mean_human: Option<f64>,
    pub mean_ai: Option<f64>,
    /// Half-widths of the 95% t intervals.
    pub ci95_human: Option<f64>,
    pub ci95_ai: Option<f64>,
    /// `None` when a group is empty or there are too few observations.
    pub f: Option<f64>,
    pub p: Option<f64>,
    pub flagged_fraction: f64,
}

impl SensitivityRow {
    pub fn computable(&self) -> bool {
        self.f.is_some()
    }

    pub fn significance(&self) -> Significance {
        self.p.map_or(Significance::None, Significance::from_p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSummary {
    pub label: String,
    pub value: f64,
    pub flagged: usize,
    pub total: usize,
    pub flagged_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityTable {
    pub thresholds: Vec<ThresholdSummary>,
    /// Threshold-major, variables in [`VARIABLES`] order.
    pub rows: Vec<SensitivityRow>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn row_for(
    data: &[Covariates],
    flags: &[bool],
    summary: &ThresholdSummary,
    v: usize,
) -> Result<SensitivityRow> {
    let (ai, human): (Vec<f64>, Vec<f64>) = {
        let mut ai = Vec::new();
        let mut human = Vec::new();
        for (obs, &flag) in data.iter().zip(flags) {
            if flag {
                ai.push(obs[v]);
            } else {
                human.push(obs[v]);
            }
        }
        (ai, human)
    };
    let (f, p) = if !ai.is_empty() && !human.is_empty() && ai.len() + human.len() > 2 {
        let r = anova_oneway(&[&human[..], &ai[..]])?;
        (Some(r.f), Some(r.p))
    } else {
        (None, None)
    };
    Ok(SensitivityRow {
        threshold_label: summary.label.clone(),
        threshold: summary.value,
        variable: VARIABLES[v].name.to_string(),
        category: VARIABLES[v].category,
        n_human: human.len(),
        n_ai: ai.len(),
        mean_human: mean(&human),
        mean_ai: mean(&ai),
        ci95_human: mean_ci(&human, 0.95).map(|(_, h)| h),
        ci95_ai: mean_ci(&ai, 0.95).map(|(_, h)| h),
        f,
        p,
        flagged_fraction: summary.flagged_fraction,
    })
}

/// Human-versus-AI ANOVA for every variable at every sweep threshold.
pub fn sensitivity(data: &[Covariates], sweep: &SweepFlags) -> Result<SensitivityTable> {
    if sweep.flags.len() != sweep.points.len() {
        return Err(Error::InvalidArgument(
            "one flag vector per sweep point required".into(),
        ));
    }
    if let Some(f) = sweep.flags.iter().find(|f| f.len() != data.len()) {
        return Err(Error::InvalidArgument(format!(
            "{} flags for {} observations",
            f.len(),
            data.len()
        )));
    }
    if data.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite covariate".into()));
    }
    let thresholds: Vec<ThresholdSummary> = sweep
        .points
        .iter()
        .zip(&sweep.flags)
        .enumerate()
        .map(|(t, (point, flags))| ThresholdSummary {
            label: point.label.clone(),
            value: point.value,
            flagged: flags.iter().filter(|&&x| x).count(),
            total: flags.len(),
            flagged_fraction: sweep.flagged_fraction(t),
        })
        .collect();
    let jobs: Vec<(usize, usize)> = (0..thresholds.len())
        .flat_map(|t| (0..VARIABLES.len()).map(move |v| (t, v)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(t, v)| row_for(data, &sweep.flags[t], &thresholds[t], v))
        .collect::<Result<Vec<_>>>()?;
    Ok(SensitivityTable { thresholds, rows })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.4}"))
}

fn fmt_f(f: Option<f64>) -> String {
    match f {
        Some(f) if f.is_infinite() => "inf".into(),
        other => fmt_opt(other),
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<report>", e)
}

impl SensitivityTable {
    pub fn rows_at(&self, label: &str) -> impl Iterator<Item = &SensitivityRow> + '_ {
        let label = label.to_string();
        self.rows.iter().filter(move |r| r.threshold_label == label)
    }

    pub fn row(&self, label: &str, variable: &str) -> Option<&SensitivityRow> {
        self.rows
            .iter()
            .find(|r| r.threshold_label == label && r.variable == variable)
    }

    /// `threshold,variable,mean_human,mean_ai,f,p,stars,flagged_fraction`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "threshold,variable,mean_human,mean_ai,f,p,stars,flagged_fraction"
        )
        .map_err(io_err)?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{:.6}",
                r.threshold_label,
                r.variable,
                fmt_opt(r.mean_human),
                fmt_opt(r.mean_ai),
                fmt_f(r.f),
                fmt_opt(r.p),
                r.significance().stars(),
                r.flagged_fraction
            )
            .map_err(io_err)?;
        }
        Ok(())
    }

    /// One aligned block per threshold: name, category, group means and the
    /// starred F statistic.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for t in &self.thresholds {
            let shown = if t.label == "J" {
                format!("J*={:.4}", t.value)
            } else {
                format!("t={}", t.label)
            };
            let _ = writeln!(
                out,
                "ANOVA at {shown}: {} of {} reviews flagged as AI ({:.2}%)",
                t.flagged,
                t.total,
                100.0 * t.flagged_fraction
            );
            let _ = writeln!(
                out,
                "{:<14}{:<12}{:>12}{:>12}{:>16}",
                "Name", "Category", "Human", "AI", "F-statistic"
            );
            for r in self.rows_at(&t.label) {
                let f = match r.f {
                    Some(f) if f.is_infinite() => format!("inf{}", r.significance().stars()),
                    Some(f) => format!("{f:.2}{}", r.significance().stars()),
                    None => "n/a".into(),
                };
                let m = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.2}"));
                let _ = writeln!(
                    out,
                    "{:<14}{:<12}{:>12}{:>12}{:>16}",
                    r.variable,
                    r.category.as_str(),
                    m(r.mean_human),
                    m(r.mean_ai),
                    f
                );
            }
            out.push('\n');
        }
        out.push_str("*p<.05, **p<.01, ***p<.001\n");
        out
    }
}

/// File names of the per-figure CSVs written by [`write_figure_csvs`].
pub const FIGURE_FILES: [&str; 4] = [
    "fig2_flagged.csv",
    "fig3_review_user.csv",
    "fig4_restaurant.csv",
    "fig5_writing.csv",
];

fn write_group_csv<W: Write>(table: &SensitivityTable, cats: &[Category], mut w: W) -> Result<()> {
    writeln!(w, "threshold,variable,group,n,mean,ci_low,ci_high").map_err(io_err)?;
    for r in table.rows.iter().filter(|r| cats.contains(&r.category)) {
        for (group, n, m, h) in [
            ("human", r.n_human, r.mean_human, r.ci95_human),
            ("ai", r.n_ai, r.mean_ai, r.ci95_ai),
        ] {
            let (lo, hi) = match (m, h) {
                (Some(m), Some(h)) => (Some(m - h), Some(m + h)),
                _ => (None, None),
            };
            writeln!(
                w,
                "{},{},{group},{n},{},{},{}",
                r.threshold_label,
                r.variable,
                fmt_opt(m),
                fmt_opt(lo),
                fmt_opt(hi)
            )
            .map_err(io_err)?;
        }
    }
    Ok(())
}

/// Flagged share per threshold, then group means with 95% intervals for the
/// review/user, restaurant and writing variables.
pub fn write_figure_csvs(
    table: &SensitivityTable,
    dir: &std::path::Path,
) -> Result<Vec<std::path::PathBuf>> {
    let open = |name: &str| -> Result<(std::path::PathBuf, std::io::BufWriter<std::fs::File>)> {
        let path = dir.join(name);
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok((path, std::io::BufWriter::new(file)))
    };
    let mut written = Vec::new();
    let (path, mut w) = open(FIGURE_FILES[0])?;
    writeln!(w, "threshold,value,flagged,total,flagged_fraction").map_err(io_err)?;
    for t in &table.thresholds {
        writeln!(
            w,
            "{},{:.6},{},{},{:.6}",
            t.label, t.value, t.flagged, t.total, t.flagged_fraction
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    written.push(path);
    let groups: [&[Category]; 3] = [
        &[Category::Review, Category::User],
        &[Category::Restaurant],
        &[Category::Writing],
    ];
    for (name, cats) in FIGURE_FILES[1..].iter().zip(groups) {
        let (path, mut w) = open(name)?;
        write_group_csv(table, cats, &mut w)?;
        w.flush().map_err(io_err)?;
        written.push(path);
    }
    Ok(written)
}
