use std::fmt;

use serde::Serialize;

use crate::model::Dims;

/// Heuristic reading of a boundary metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Safe,
    Marginal,
    Unsafe,
}

impl Verdict {
    pub fn of(metric: f64) -> Verdict {
        if metric <= 0.1 {
            Verdict::Safe
        } else if metric <= 0.5 {
            Verdict::Marginal
        } else {
            Verdict::Unsafe
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Safe => "safe",
            Verdict::Marginal => "marginal",
            Verdict::Unsafe => "unsafe",
        })
    }
}

/// How far the dimensions are from the regimes where the chi-square and
/// Bartlett approximations hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryDiag {
    pub dims: Dims,
    /// `√(mr)(p + m/2 - r/2)/n`
    pub chi2_metric: f64,
    /// `√(mr)(r² + m²)/n²`
    pub bartlett_metric: f64,
    /// `√(mr)(p + m/2 - r/2 + 1/2)/n`, the leading bias of the chi-square
    /// approximation.
    pub chi2_bias: f64,
    pub lrt_defined: bool,
}

impl BoundaryDiag {
    pub fn chi2_verdict(&self) -> Verdict {
        Verdict::of(self.chi2_metric)
    }

    pub fn bartlett_verdict(&self) -> Verdict {
        Verdict::of(self.bartlett_metric)
    }
}

pub fn boundary_check(dims: Dims) -> BoundaryDiag {
    let (n, p, m, r) = dims.nf();
    let root = (m * r).sqrt();
    BoundaryDiag {
        dims,
        chi2_metric: root * (p + m / 2.0 - r / 2.0) / n,
        bartlett_metric: root * (r * r + m * m) / (n * n),
        chi2_bias: root * (p + m / 2.0 - r / 2.0 + 0.5) / n,
        lrt_defined: dims.lrt_defined(),
    }
}
