//! Significance testing: one-way ANOVA, Tukey HSD and the human-versus-AI
//! sensitivity analysis across classification thresholds.

mod anova;
mod dist;
mod sensitivity;
mod tukey;

use serde::{Deserialize, Serialize};

pub use anova::{anova_oneway, AnovaResult};
pub use dist::{f_sf, mean_ci, ptukey, qtukey, sign_test, t_critical, SignTest};
pub use sensitivity::{
    covariates, sensitivity, write_figure_csvs, Category, Covariates, SensitivityRow,
    SensitivityTable, ThresholdSummary, Variable, FIGURE_FILES, VARIABLES,
};
pub use tukey::{tukey_hsd, tukey_kramer_q, TukeyPair, TukeyResult};

/// Star levels used in every report: `*` p<.05, `**` p<.01, `***` p<.001.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Significance {
    None,
    P05,
    P01,
    P001,
}

impl Significance {
    pub fn from_p(p: f64) -> Self {
        if p < 0.001 {
            Self::P001
        } else if p < 0.01 {
            Self::P01
        } else if p < 0.05 {
            Self::P05
        } else {
            Self::None
        }
    }

    pub fn stars(self) -> &'static str {
        match self {
            Self::None => "",
            Self::P05 => "*",
            Self::P01 => "**",
            Self::P001 => "***",
        }
    }

    /// Whether the result clears the given level (one of .05, .01, .001).
    pub fn at(self, level: f64) -> bool {
        let needed = if level <= 0.001 {
            Self::P001
        } else if level <= 0.01 {
            Self::P01
        } else {
            Self::P05
        };
        self >= needed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stars_follow_cutoffs() {
        assert_eq!(Significance::from_p(0.2).stars(), "");
        assert_eq!(Significance::from_p(0.049).stars(), "*");
        assert_eq!(Significance::from_p(0.05).stars(), "");
        assert_eq!(Significance::from_p(0.009).stars(), "**");
        assert_eq!(Significance::from_p(0.0009).stars(), "***");
        assert!(Significance::P01.at(0.05) && !Significance::P01.at(0.001));
    }
}
