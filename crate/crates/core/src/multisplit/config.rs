use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypothesis::FRule;
use crate::model::Convention;

/// How the responses are reduced before screening and testing.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PcaPolicy {
    #[default]
    None,
    /// `m0` chosen by permutation parallel analysis on the screening half.
    ParallelAnalysis {
        b_perm: usize,
        pct: f64,
    },
    Fixed(usize),
}

impl PcaPolicy {
    pub fn parallel_analysis() -> Self {
        PcaPolicy::ParallelAnalysis {
            b_perm: 19,
            pct: 0.95,
        }
    }
}

impl fmt::Display for PcaPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PcaPolicy::None => f.write_str("none"),
            PcaPolicy::ParallelAnalysis { b_perm, pct } => write!(f, "parallel:{b_perm}:{pct}"),
            PcaPolicy::Fixed(m0) => write!(f, "fixed:{m0}"),
        }
    }
}

impl FromStr for PcaPolicy {
    type Err = Error;

    /// `none`, `parallel`, `parallel:B:pct` or `fixed:m0`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || {
            Error::domain(format!(
                "unknown PCA policy `{s}` (none, parallel[:B:pct], fixed:m0)"
            ))
        };
        match parts.as_slice() {
            ["none"] => Ok(PcaPolicy::None),
            ["parallel"] => Ok(PcaPolicy::parallel_analysis()),
            ["parallel", b, pct] => Ok(PcaPolicy::ParallelAnalysis {
                b_perm: b.parse().map_err(|_| bad())?,
                pct: pct.parse().map_err(|_| bad())?,
            }),
            ["fixed", m0] => Ok(PcaPolicy::Fixed(m0.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiSplitConfig {
    /// Number of random splits `J`.
    pub j: usize,
    /// Lower end of the quantile search; `None` picks `max(0.5/J, 1e-4)`.
    pub gamma_min: Option<f64>,
    /// Screening keeps `⌊δp⌋` predictors.
    pub delta: f64,
    /// Fraction of rows used for screening.
    pub split_ratio: f64,
    pub seed: u64,
    pub pca_policy: PcaPolicy,
    pub f_rule: FRule,
    pub convention: Convention,
    pub alpha: f64,
}

impl Default for MultiSplitConfig {
    fn default() -> Self {
        MultiSplitConfig {
            j: 200,
            gamma_min: None,
            delta: 0.2,
            split_ratio: 0.3,
            seed: 0,
            pca_policy: PcaPolicy::None,
            f_rule: FRule::LogLog,
            convention: Convention::Johnstone,
            alpha: 0.05,
        }
    }
}

impl MultiSplitConfig {
    pub fn resolved_gamma_min(&self) -> f64 {
        self.gamma_min
            .unwrap_or_else(|| (0.5 / self.j.max(1) as f64).max(1e-4))
    }

    pub fn validate(&self) -> Result<()> {
        if self.j == 0 {
            return Err(Error::domain(
                "J must be at least 1 (the no-split mode is a separate entry point)",
            ));
        }
        let g = self.resolved_gamma_min();
        if !(g > 0.0 && g < 1.0) {
            return Err(Error::domain(format!(
                "gamma_min must lie in (0, 1), got {g}"
            )));
        }
        self.validate_common()
    }

    pub(crate) fn validate_common(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::domain(format!(
                "delta must lie in (0, 1], got {}",
                self.delta
            )));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::domain(format!(
                "split ratio must lie in (0, 1), got {}",
                self.split_ratio
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::domain(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        match self.pca_policy {
            PcaPolicy::Fixed(0) => Err(Error::domain("fixed m0 must be at least 1")),
            PcaPolicy::ParallelAnalysis { b_perm, pct }
                if b_perm == 0 || !(pct > 0.0 && pct < 1.0) =>
            {
                Err(Error::domain(
                    "parallel analysis needs B >= 1 and pct in (0, 1)",
                ))
            }
            _ => Ok(()),
        }
    }
}
