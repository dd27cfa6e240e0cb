use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dist::fill_std_normal;
use crate::error::{Error, Result};
use crate::hypothesis::{Method, TestOptions};
use crate::model::{Dims, SignalMatrix};
use crate::multisplit::MultiSplitConfig;
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Noise {
    Gaussian,
    /// i.i.d. Student t entries before the covariance is applied.
    StudentT(f64),
    /// Gaussian `X` and `XB + E` cut at −1, −0.4, 0, 0.4, 1 into the levels
    /// −3, −2, −1, 1, 2, 3.
    Multinomial,
}

impl FromStr for Noise {
    type Err = Error;

    /// `gaussian`, `t:<df>` or `multinomial`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gaussian" | "normal" => Ok(Noise::Gaussian),
            "multinomial" | "discrete" => Ok(Noise::Multinomial),
            other => other
                .strip_prefix("t:")
                .and_then(|df| df.parse::<f64>().ok())
                .filter(|df| *df > 0.0)
                .map(Noise::StudentT)
                .ok_or_else(|| {
                    Error::domain(format!(
                        "unknown noise `{other}` (gaussian, t:<df>, multinomial)"
                    ))
                }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// `(S_E, S_X)` drawn directly from the canonical form.
    Canonical,
    /// `Y = XB + E` with AR(1) covariances `(ρ^|i-j|)` for the rows of `X`
    /// and `E`, tested with `C = [I_r, 0]`.
    Linear { rho: f64, noise: Noise },
}

/// Signal placed in `M1` (canonical) or `B` (linear).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    Null,
    /// `value` in the first `rk` diagonal entries.
    Diagonal {
        rk: usize,
        value: f64,
    },
    /// Arbitrary diagonal entries `δ_1, δ_2, …`.
    Spikes(Vec<f64>),
    /// Only the (1,1) entry, equal to `v_d`.
    SingleEntry(f64),
    /// Every entry i.i.d. `N(0, σ_d²)`, redrawn per replicate.
    DenseGaussian(f64),
}

impl Signal {
    /// Equal diagonal spikes with `tr(Ω)/m = t` for identity error covariance.
    pub fn diagonal_with_trace(rk: usize, t: f64, m: usize) -> Signal {
        Signal::Diagonal {
            rk,
            value: (t * m as f64 / rk as f64).sqrt(),
        }
    }

    pub fn is_null(&self) -> bool {
        match self {
            Signal::Null => true,
            Signal::Diagonal { rk, value } => *rk == 0 || *value == 0.0,
            Signal::Spikes(v) => v.iter().all(|d| *d == 0.0),
            Signal::SingleEntry(v) | Signal::DenseGaussian(v) => *v == 0.0,
        }
    }

    /// The signal size reported in tables.
    pub fn size(&self) -> f64 {
        match self {
            Signal::Null => 0.0,
            Signal::Diagonal { value, .. } => *value,
            Signal::Spikes(v) => v.iter().cloned().fold(0.0, f64::max),
            Signal::SingleEntry(v) | Signal::DenseGaussian(v) => *v,
        }
    }

    /// Fills a rows×cols matrix; random entries come from `rng`.
    pub fn matrix(&self, rows: usize, cols: usize, rng: &mut Stream) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(rows, cols);
        let k = rows.min(cols);
        match self {
            Signal::Null => {}
            Signal::Diagonal { rk, value } => {
                for i in 0..(*rk).min(k) {
                    out[(i, i)] = *value;
                }
            }
            Signal::Spikes(v) => {
                for (i, d) in v.iter().take(k).enumerate() {
                    out[(i, i)] = *d;
                }
            }
            Signal::SingleEntry(v) => out[(0, 0)] = *v,
            Signal::DenseGaussian(s) => {
                fill_std_normal(rng, &mut out);
                out *= *s;
            }
        }
        out
    }

    /// `M1` for deterministic signals; `None` for random ones.
    pub fn fixed_signal(&self, r: usize, m: usize) -> Option<SignalMatrix> {
        if matches!(self, Signal::DenseGaussian(s) if *s != 0.0) {
            return None;
        }
        // no randomness is consumed for deterministic signals
        let mut dummy = crate::rng::stream(0);
        SignalMatrix::new(self.matrix(r, m, &mut dummy)).ok()
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signal::Null => f.write_str("null"),
            Signal::Diagonal { rk, value } => write!(f, "diag(rk={rk};{value})"),
            Signal::Spikes(v) => {
                let parts: Vec<String> = v.iter().map(|d| d.to_string()).collect();
                write!(f, "spikes({})", parts.join(";"))
            }
            Signal::SingleEntry(v) => write!(f, "single({v})"),
            Signal::DenseGaussian(s) => write!(f, "dense({s})"),
        }
    }
}

impl FromStr for Signal {
    type Err = Error;

    /// `null`, `diag:<rk>:<value>`, `spikes:<d1>/<d2>/...`, `single:<v>` or
    /// `dense:<sd>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || {
            Error::domain(format!(
                "unknown signal `{s}` (null, diag:rk:v, spikes:a/b/..., single:v, dense:sd)"
            ))
        };
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(bad)
        };
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        match kind {
            "null" if rest.is_empty() => Ok(Signal::Null),
            "diag" => {
                let (rk, v) = rest.split_once(':').ok_or_else(bad)?;
                Ok(Signal::Diagonal {
                    rk: rk.trim().parse().map_err(|_| bad())?,
                    value: num(v)?,
                })
            }
            "spikes" => Ok(Signal::Spikes(
                rest.split('/').map(num).collect::<Result<_>>()?,
            )),
            "single" => Ok(Signal::SingleEntry(num(rest)?)),
            "dense" => Ok(Signal::DenseGaussian(num(rest)?)),
            _ => Err(bad()),
        }
    }
}

/// One grid point: dimensions plus signal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub dims: Dims,
    pub signal: Signal,
    /// Growth exponent when the cell comes from a growth grid.
    pub eta: Option<f64>,
}

impl Cell {
    pub fn new(dims: Dims, signal: Signal) -> Self {
        Cell {
            dims,
            signal,
            eta: None,
        }
    }
}

/// Which of `p`, `m`, `r` grow as `⌊n^η⌋`; the others are fixed at 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GrowthCase {
    /// `m = r = 2`, `p = ⌊n^η⌋`.
    A,
    /// `p = r = 2`, `m = ⌊n^η⌋`.
    B,
    /// `m = 2`, `p = r = ⌊n^η⌋`.
    C,
    /// `p = m = r = ⌊n^η⌋`.
    D,
}

impl GrowthCase {
    pub fn dims(self, n: usize, eta: f64) -> Result<Dims> {
        let g = ((n as f64).powf(eta) + 1e-9).floor().max(1.0) as usize;
        let (p, m, r) = match self {
            GrowthCase::A => (g, 2, 2),
            GrowthCase::B => (2, g, 2),
            GrowthCase::C => (g, 2, g),
            GrowthCase::D => (g, g, g),
        };
        Dims::new(n, p, m, r.min(p))
    }

    /// Null cells for every `(n, η)` pair, `n` outermost.
    pub fn grid(self, ns: &[usize], etas: &[f64]) -> Result<Vec<Cell>> {
        let mut cells = Vec::new();
        for &n in ns {
            for &eta in etas {
                cells.push(Cell {
                    dims: self.dims(n, eta)?,
                    signal: Signal::Null,
                    eta: Some(eta),
                });
            }
        }
        Ok(cells)
    }
}

impl FromStr for GrowthCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(GrowthCase::A),
            "b" => Ok(GrowthCase::B),
            "c" => Ok(GrowthCase::C),
            "d" => Ok(GrowthCase::D),
            other => Err(Error::domain(format!(
                "growth case must be a, b, c or d, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodSpec {
    Test(Method),
    /// The split procedure with `J` splits.
    MultiSplit {
        j: usize,
    },
    /// Screening and testing on the same rows (negative control, `J = 0`).
    NoSplit,
}

impl MethodSpec {
    pub fn label(&self) -> String {
        match self {
            MethodSpec::Test(m) => m.to_string(),
            MethodSpec::MultiSplit { j } => format!("multisplit_j{j}"),
            MethodSpec::NoSplit => "multisplit_j0".into(),
        }
    }

    pub fn multisplit(j: usize) -> Self {
        if j == 0 {
            MethodSpec::NoSplit
        } else {
            MethodSpec::MultiSplit { j }
        }
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    /// A test name, or `multisplit:<J>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(j) = s.strip_prefix("multisplit:") {
            let j = j
                .parse::<usize>()
                .map_err(|_| Error::domain(format!("bad split count in `{s}`")))?;
            return Ok(MethodSpec::multisplit(j));
        }
        Ok(MethodSpec::Test(s.parse()?))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSpec {
    pub generator: Generator,
    pub cells: Vec<Cell>,
    pub methods: Vec<MethodSpec>,
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
    pub options: TestOptions,
    /// Template for multi-split methods; `j` and `seed` are set per
    /// replicate.
    pub multisplit: MultiSplitConfig,
}

impl ExperimentSpec {
    pub fn new(
        generator: Generator,
        cells: Vec<Cell>,
        methods: Vec<MethodSpec>,
        reps: usize,
        seed: u64,
    ) -> Self {
        ExperimentSpec {
            generator,
            cells,
            methods,
            reps,
            alpha: 0.05,
            seed,
            options: TestOptions::default(),
            multisplit: MultiSplitConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::domain("reps must be at least 1"));
        }
        if self.methods.is_empty() || self.cells.is_empty() {
            return Err(Error::domain(
                "an experiment needs at least one cell and one method",
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::domain(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if let Generator::Linear { rho, noise } = self.generator {
            if !(0.0..1.0).contains(&rho) {
                return Err(Error::domain(format!(
                    "AR(1) correlation must lie in [0, 1), got {rho}"
                )));
            }
            if let Noise::StudentT(df) = noise {
                if !(df > 0.0) {
                    return Err(Error::domain("t degrees of freedom must be positive"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_cases() {
        assert_eq!(
            GrowthCase::D.dims(100, 0.25).unwrap(),
            Dims::new(100, 3, 3, 3).unwrap()
        );
        assert_eq!(
            GrowthCase::D.dims(100, 0.5).unwrap(),
            Dims::new(100, 10, 10, 10).unwrap()
        );
        assert_eq!(
            GrowthCase::D.dims(100, 0.75).unwrap(),
            Dims::new(100, 31, 31, 31).unwrap()
        );
        assert_eq!(
            GrowthCase::A.dims(300, 0.9).unwrap(),
            Dims::new(300, 169, 2, 2).unwrap()
        );
        assert_eq!(
            GrowthCase::B.dims(100, 0.5).unwrap(),
            Dims::new(100, 2, 10, 2).unwrap()
        );
        assert_eq!(
            GrowthCase::C.dims(100, 0.5).unwrap(),
            Dims::new(100, 10, 2, 10).unwrap()
        );
        let grid = GrowthCase::A.grid(&[100, 300], &[0.25, 0.5]).unwrap();
        assert_eq!(grid.len(), 4);
        assert_eq!(grid[2].dims.n, 300);
    }

    #[test]
    fn signal_matrices() {
        let mut rng = crate::rng::stream(1);
        let m = Signal::Diagonal { rk: 2, value: 3.0 }.matrix(4, 3, &mut rng);
        assert_eq!(m[(0, 0)], 3.0);
        assert_eq!(m[(1, 1)], 3.0);
        assert_eq!(m[(2, 2)], 0.0);
        let s = Signal::diagonal_with_trace(3, 3.0, 20);
        let m1 = s.fixed_signal(30, 20).unwrap();
        assert!((m1.trace_omega_per_response() - 3.0).abs() < 1e-12);
        assert!(Signal::DenseGaussian(1.0).fixed_signal(3, 3).is_none());
        assert!(Signal::Null.is_null() && !Signal::SingleEntry(0.5).is_null());
    }

    #[test]
    fn parsing() {
        assert_eq!("t:3".parse::<Noise>().unwrap(), Noise::StudentT(3.0));
        assert!("t:-1".parse::<Noise>().is_err());
        assert_eq!(
            "multisplit:0".parse::<MethodSpec>().unwrap(),
            MethodSpec::NoSplit
        );
        assert_eq!(
            "multisplit:50".parse::<MethodSpec>().unwrap(),
            MethodSpec::MultiSplit { j: 50 }
        );
        assert_eq!(
            "bartlett".parse::<MethodSpec>().unwrap(),
            MethodSpec::Test(Method::Bartlett)
        );
        assert_eq!("c".parse::<GrowthCase>().unwrap(), GrowthCase::C);
        assert_eq!("null".parse::<Signal>().unwrap(), Signal::Null);
        assert_eq!(
            "diag:5:1".parse::<Signal>().unwrap(),
            Signal::Diagonal { rk: 5, value: 1.0 }
        );
        assert_eq!(
            "spikes:2/0.5".parse::<Signal>().unwrap(),
            Signal::Spikes(vec![2.0, 0.5])
        );
        assert_eq!(
            "dense:0.3".parse::<Signal>().unwrap(),
            Signal::DenseGaussian(0.3)
        );
        assert!("diag:x:1".parse::<Signal>().is_err() && "wave:1".parse::<Signal>().is_err());
    }
}
