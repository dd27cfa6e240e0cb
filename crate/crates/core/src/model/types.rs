use nalgebra::DMatrix;
use serde::Serialize;

use super::linalg::numerical_rank;
use crate::error::{Error, Result};

/// Sample size `n`, predictors `p`, responses `m`, hypothesis rank `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Dims {
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub r: usize,
}

impl Dims {
    pub fn new(n: usize, p: usize, m: usize, r: usize) -> Result<Self> {
        if n == 0 || p == 0 || m == 0 || r == 0 {
            return Err(Error::domain(format!(
                "dimensions must be positive: n={n} p={p} m={m} r={r}"
            )));
        }
        if r > p {
            return Err(Error::domain(format!(
                "hypothesis rank r={r} exceeds predictor count p={p}"
            )));
        }
        Ok(Dims { n, p, m, r })
    }

    /// `n > p + m`: the error matrix is almost surely positive definite and
    /// the likelihood ratio exists.
    pub fn lrt_defined(&self) -> bool {
        self.n > self.p + self.m
    }

    pub(crate) fn require_lrt(&self) -> Result<()> {
        if self.lrt_defined() {
            Ok(())
        } else {
            Err(Error::regime(format!(
                "likelihood ratio undefined: need n > p + m, got n={} p={} m={}",
                self.n, self.p, self.m
            )))
        }
    }

    pub(crate) fn nf(&self) -> (f64, f64, f64, f64) {
        (self.n as f64, self.p as f64, self.m as f64, self.r as f64)
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "(n={}, p={}, m={}, r={})",
            self.n, self.p, self.m, self.r
        )
    }
}

/// Design `X` (n×p) paired with responses `Y` (n×m).
#[derive(Debug, Clone)]
pub struct DataSet {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
}

impl DataSet {
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        if x.nrows() != y.nrows() {
            return Err(Error::domain(format!(
                "X has {} rows but Y has {}",
                x.nrows(),
                y.nrows()
            )));
        }
        if x.nrows() == 0 || x.ncols() == 0 || y.ncols() == 0 {
            return Err(Error::domain("X and Y must be non-empty"));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::domain("X and Y must have finite entries"));
        }
        Ok(DataSet { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn m(&self) -> usize {
        self.y.ncols()
    }

    /// Rows `idx` of both matrices, in the given order.
    pub fn rows(&self, idx: &[usize]) -> DataSet {
        DataSet {
            x: super::linalg::select_rows(&self.x, idx),
            y: super::linalg::select_rows(&self.y, idx),
        }
    }
}

/// Contrast matrix `C` (r×p) of full row rank.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisMatrix {
    c: DMatrix<f64>,
}

impl HypothesisMatrix {
    pub fn new(c: DMatrix<f64>) -> Result<Self> {
        if c.nrows() == 0 || c.ncols() == 0 {
            return Err(Error::domain("hypothesis matrix must be non-empty"));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("hypothesis matrix has non-finite entries"));
        }
        let rank = numerical_rank(&c);
        if rank != c.nrows() {
            return Err(Error::HypothesisRank {
                expected: c.nrows(),
                found: rank,
            });
        }
        Ok(HypothesisMatrix { c })
    }

    pub fn identity(p: usize) -> Self {
        HypothesisMatrix {
            c: DMatrix::identity(p, p),
        }
    }

    /// `[I_r, 0]`: tests the first `r` rows of `B`.
    pub fn leading(r: usize, p: usize) -> Result<Self> {
        if r == 0 || r > p {
            return Err(Error::domain(format!("need 1 <= r <= p, got r={r} p={p}")));
        }
        Ok(HypothesisMatrix {
            c: DMatrix::from_fn(r, p, |i, j| if i == j { 1.0 } else { 0.0 }),
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn r(&self) -> usize {
        self.c.nrows()
    }

    pub fn p(&self) -> usize {
        self.c.ncols()
    }

    /// If every row has exactly one nonzero entry and those entries sit in
    /// distinct columns, returns the tested columns (row order). `[I_r, 0]`
    /// and `I_p` are of this form.
    pub fn selection_columns(&self) -> Option<Vec<usize>> {
        let mut cols = Vec::with_capacity(self.r());
        for row in self.c.row_iter() {
            let nz: Vec<usize> = row
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, _)| j)
                .collect();
            if nz.len() != 1 || cols.contains(&nz[0]) {
                return None;
            }
            cols.push(nz[0]);
        }
        Some(cols)
    }
}

/// The error and hypothesis sums of squares with their dimensions.
#[derive(Debug, Clone)]
pub struct SumsOfSquares {
    pub se: DMatrix<f64>,
    pub sx: DMatrix<f64>,
    pub dims: Dims,
}

impl SumsOfSquares {
    /// Validates shapes and symmetry (1e-10 relative), then symmetrizes.
    pub fn new(mut se: DMatrix<f64>, mut sx: DMatrix<f64>, dims: Dims) -> Result<Self> {
        let m = dims.m;
        for (name, a) in [("S_E", &se), ("S_X", &sx)] {
            if a.nrows() != m || a.ncols() != m {
                return Err(Error::domain(format!(
                    "{name} must be {m}x{m}, got {}x{}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain(format!("{name} has non-finite entries")));
            }
            let scale = a.amax().max(f64::MIN_POSITIVE);
            if (a - a.transpose()).amax() > 1e-10 * scale {
                return Err(Error::domain(format!("{name} is not symmetric")));
            }
        }
        super::linalg::symmetrize(&mut se);
        super::linalg::symmetrize(&mut sx);
        Ok(SumsOfSquares { se, sx, dims })
    }

    /// `(AᵀS_E A, AᵀS_X A)`: the pair obtained from responses `YA`.
    pub fn transform_responses(&self, a: &DMatrix<f64>) -> Result<Self> {
        let se = a.transpose() * &self.se * a;
        let sx = a.transpose() * &self.sx * a;
        SumsOfSquares::new(se, sx, self.dims)
    }
}

/// Canonical-form mean `M1` (r×m) of the hypothesis block `Y1*`.
#[derive(Debug, Clone)]
pub struct SignalMatrix {
    pub m1: DMatrix<f64>,
}

impl SignalMatrix {
    pub fn new(m1: DMatrix<f64>) -> Result<Self> {
        if m1.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("signal matrix has non-finite entries"));
        }
        Ok(SignalMatrix { m1 })
    }

    pub fn zeros(r: usize, m: usize) -> Self {
        SignalMatrix {
            m1: DMatrix::zeros(r, m),
        }
    }

    /// `diag(δ_1, …, δ_k, 0, …)` of shape r×m.
    pub fn diagonal(r: usize, m: usize, deltas: &[f64]) -> Result<Self> {
        if deltas.len() > r.min(m) {
            return Err(Error::domain(format!(
                "{} diagonal entries do not fit an {r}x{m} signal",
                deltas.len()
            )));
        }
        let mut m1 = DMatrix::zeros(r, m);
        for (i, d) in deltas.iter().enumerate() {
            m1[(i, i)] = *d;
        }
        SignalMatrix::new(m1)
    }

    pub fn is_null(&self) -> bool {
        self.m1.iter().all(|v| *v == 0.0)
    }

    /// `Ω = M1ᵀM1` for identity error covariance.
    pub fn omega(&self) -> DMatrix<f64> {
        self.m1.transpose() * &self.m1
    }

    /// `Ω = Σ^{-1/2} M1ᵀ M1 Σ^{-1/2}` using the symmetric square root of `Σ`.
    pub fn omega_with(&self, sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let (vals, vecs) = super::linalg::sym_eigen_desc(sigma);
        if vals.iter().any(|v| *v <= 0.0) {
            return Err(Error::domain("error covariance must be positive definite"));
        }
        let inv_sqrt = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            vals.len(),
            vals.iter().map(|v| 1.0 / v.sqrt()),
        ));
        let root = &vecs * inv_sqrt * vecs.transpose();
        Ok(&root * self.omega() * &root)
    }

    /// Nonzero eigenvalues of `Δ = Ω / n`, descending.
    pub fn delta_eigenvalues(&self, n: usize) -> Vec<f64> {
        let (vals, _) = super::linalg::sym_eigen_desc(&self.omega());
        let top = vals.first().copied().unwrap_or(0.0).max(0.0);
        vals.into_iter()
            .filter(|v| *v > 1e-12 * top.max(1.0))
            .map(|v| v / n as f64)
            .collect()
    }

    /// `tr(Ω) / m`, the signal scale used on power curves.
    pub fn trace_omega_per_response(&self) -> f64 {
        self.m1.iter().map(|v| v * v).sum::<f64>() / self.m1.ncols() as f64
    }
}
