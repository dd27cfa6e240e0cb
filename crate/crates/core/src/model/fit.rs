use nalgebra::Dyn;
use nalgebra::{DMatrix, QR};

use super::linalg::{cholesky, symmetrize};
use super::types::{DataSet, Dims, HypothesisMatrix, SumsOfSquares};
use crate::error::{Error, Result};

/// Relative tolerance on `|R_ii|` below which `X` counts as rank deficient.
const DESIGN_TOL: f64 = 1e-10;

/// Least-squares fit of `Y = XB + E`.
#[derive(Debug, Clone)]
pub struct MlrFit {
    /// `B̂` (p×m).
    pub bhat: DMatrix<f64>,
    /// `S_E = Yᵀ(I - P_X)Y` (m×m).
    pub se: DMatrix<f64>,
    r: DMatrix<f64>,
}

struct Factored {
    qr: QR<f64, Dyn, Dyn>,
    r: DMatrix<f64>,
}

fn factor(x: &DMatrix<f64>) -> Result<Factored> {
    let (n, p) = x.shape();
    if n < p {
        return Err(Error::domain(format!(
            "least squares needs n >= p, got n={n} p={p}"
        )));
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let diag: Vec<f64> = r.diagonal().iter().map(|v| v.abs()).collect();
    let largest = diag.iter().cloned().fold(0.0, f64::max);
    let smallest = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smallest > DESIGN_TOL * largest) {
        return Err(Error::SingularDesign { smallest, largest });
    }
    Ok(Factored { qr, r })
}

/// QR-based least squares. `QᵀY` splits into the fitted block (first `p`
/// rows, giving `R B̂ = Q₁ᵀY`) and the residual block whose Gram matrix is
/// `S_E`.
pub fn fit_mlr(data: &DataSet) -> Result<MlrFit> {
    let p = data.p();
    let f = factor(&data.x)?;
    let mut z = data.y.clone();
    f.qr.q_tr_mul(&mut z);
    let z1 = z.rows(0, p).into_owned();
    let bhat =
        f.r.solve_upper_triangular(&z1)
            .ok_or(Error::SingularDesign {
                smallest: 0.0,
                largest: 0.0,
            })?;
    let z2 = z.rows(p, data.n() - p);
    let mut se = z2.transpose() * z2;
    symmetrize(&mut se);
    Ok(MlrFit { bhat, se, r: f.r })
}

impl MlrFit {
    /// `S_X = (CB̂)ᵀ [C(XᵀX)⁻¹Cᵀ]⁻¹ CB̂` via `G = R⁻ᵀCᵀ`, a Cholesky
    /// factor `L` of `GᵀG = C(XᵀX)⁻¹Cᵀ` and `H = L⁻¹CB̂`, so `S_X = HᵀH`.
    pub fn hypothesis_matrix(&self, c: &HypothesisMatrix) -> Result<DMatrix<f64>> {
        let cm = c.matrix();
        if cm.ncols() != self.bhat.nrows() {
            return Err(Error::domain(format!(
                "C has {} columns but the design has {} predictors",
                cm.ncols(),
                self.bhat.nrows()
            )));
        }
        let g = self
            .r
            .tr_solve_upper_triangular(&cm.transpose())
            .ok_or_else(|| Error::Numerical("triangular solve against R failed".into()))?;
        let mut middle = g.transpose() * &g;
        symmetrize(&mut middle);
        let chol = cholesky(&middle)
            .ok_or_else(|| Error::Numerical("C (X'X)^-1 C' is not positive definite".into()))?;
        let cb = cm * &self.bhat;
        let h = chol
            .l_dirty()
            .solve_lower_triangular(&cb)
            .ok_or_else(|| Error::Numerical("triangular solve against L failed".into()))?;
        let mut sx = h.transpose() * h;
        symmetrize(&mut sx);
        Ok(sx)
    }
}

/// Fits the model and forms `(S_E, S_X)` for `H0: CB = 0`.
pub fn hypothesis_ss(data: &DataSet, c: &HypothesisMatrix) -> Result<SumsOfSquares> {
    if c.p() != data.p() {
        return Err(Error::domain(format!(
            "C is {}x{} but X has {} columns",
            c.r(),
            c.p(),
            data.p()
        )));
    }
    let fit = fit_mlr(data)?;
    let sx = fit.hypothesis_matrix(c)?;
    let dims = Dims::new(data.n(), data.p(), data.m(), c.r())?;
    SumsOfSquares::new(fit.se, sx, dims)
}
