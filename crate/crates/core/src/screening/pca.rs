use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::linalg::{center_columns, sym_eigen_desc};
use crate::rng::Stream;

/// Principal-component loadings fitted on the screening responses.
#[derive(Debug, Clone)]
pub struct PcaReduction {
    /// m×m0 with orthonormal columns.
    pub w_hat: DMatrix<f64>,
    pub m0: usize,
    /// All sample covariance eigenvalues, descending.
    pub eigen_spectrum: Vec<f64>,
}

impl PcaReduction {
    /// `Y Ŵ`.
    pub fn apply(&self, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if y.ncols() != self.w_hat.nrows() {
            return Err(Error::domain(format!(
                "Y has {} columns, loadings expect {}",
                y.ncols(),
                self.w_hat.nrows()
            )));
        }
        Ok(y * &self.w_hat)
    }
}

fn covariance(y: &DMatrix<f64>) -> DMatrix<f64> {
    let c = center_columns(y);
    c.tr_mul(&c) / (y.nrows() as f64 - 1.0)
}

/// Nonzero covariance spectrum through whichever Gram matrix is smaller.
fn spectrum(y: &DMatrix<f64>) -> Vec<f64> {
    let c = center_columns(y);
    let scale = 1.0 / (y.nrows() as f64 - 1.0);
    let gram = if y.nrows() < y.ncols() {
        &c * c.transpose()
    } else {
        c.tr_mul(&c)
    };
    sym_eigen_desc(&(gram * scale)).0
}

pub fn pca_reduce(ys: &DMatrix<f64>, m0: usize) -> Result<PcaReduction> {
    let (n, m) = ys.shape();
    if n < 2 || m0 == 0 || m0 > (n - 1).min(m) {
        return Err(Error::domain(format!(
            "need 1 <= m0 <= min(n_S - 1, m), got m0={m0} n_S={n} m={m}"
        )));
    }
    let (vals, vecs) = sym_eigen_desc(&covariance(ys));
    let cols: Vec<DVector<f64>> = (0..m0)
        .map(|k| {
            let mut v = vecs.column(k).into_owned();
            if v[v.iamax()] < 0.0 {
                v.neg_mut();
            }
            v
        })
        .collect();
    Ok(PcaReduction {
        w_hat: DMatrix::from_columns(&cols),
        m0,
        eigen_spectrum: vals,
    })
}

/// Outcome of a parallel analysis, kept for audit.
#[derive(Debug, Clone, Serialize)]
pub struct ParallelAnalysis {
    pub m0: usize,
    /// Count of leading eigenvalues above their permutation quantile,
    /// before the floor and cap.
    pub raw: usize,
    pub eigenvalues: Vec<f64>,
    pub thresholds: Vec<f64>,
}

/// Number of leading components whose eigenvalue exceeds the `pct`
/// quantile of the same-rank eigenvalue across `b_perm` column-permuted
/// copies. Floored at 1 and optionally capped.
pub fn parallel_analysis(
    ys: &DMatrix<f64>,
    b_perm: usize,
    pct: f64,
    rng: &mut Stream,
    cap: Option<usize>,
) -> Result<ParallelAnalysis> {
    let (n, m) = ys.shape();
    if n < 3 || b_perm == 0 || !(pct > 0.0 && pct < 1.0) {
        return Err(Error::domain(format!(
            "parallel analysis needs n_S >= 3, B >= 1, pct in (0,1); got {n}, {b_perm}, {pct}"
        )));
    }
    if cap == Some(0) {
        return Err(Error::domain("parallel analysis cap must be at least 1"));
    }
    let eigenvalues = spectrum(ys);
    let k = eigenvalues.len();
    let mut null: Vec<Vec<f64>> = vec![Vec::with_capacity(b_perm); k];
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..b_perm {
        let mut shuffled = ys.clone();
        for j in 0..m {
            perm.shuffle(rng);
            for i in 0..n {
                shuffled[(i, j)] = ys[(perm[i], j)];
            }
        }
        for (slot, v) in null.iter_mut().zip(spectrum(&shuffled)) {
            slot.push(v);
        }
    }
    let rank = ((pct * b_perm as f64) - 1e-9).ceil().max(1.0) as usize;
    let thresholds: Vec<f64> = null
        .into_iter()
        .map(|mut v| {
            v.sort_by(f64::total_cmp);
            v[rank - 1]
        })
        .collect();
    let raw = eigenvalues
        .iter()
        .zip(&thresholds)
        .take_while(|(e, t)| e > t)
        .count();
    let mut m0 = raw.max(1);
    if let Some(c) = cap {
        m0 = m0.min(c);
    }
    Ok(ParallelAnalysis {
        m0,
        raw,
        eigenvalues,
        thresholds,
    })
}
