use nalgebra::DMatrix;

use super::types::{Dims, SignalMatrix, SumsOfSquares};
use crate::dist::fill_std_normal;
use crate::error::{Error, Result};
use crate::rng::Stream;

/// Draws `(S_E, S_X)` from the canonical form: `Y1*` (r×m) has rows
/// `N(M1 row, I_m)`, `Y2*` ((n-p)×m) has rows `N(0, I_m)`, and
/// `S_X = Y1*ᵀY1*`, `S_E = Y2*ᵀY2*`.
pub fn canonical_form_sample(
    rng: &mut Stream,
    signal: &SignalMatrix,
    dims: Dims,
) -> Result<SumsOfSquares> {
    dims.require_lrt()?;
    if signal.m1.shape() != (dims.r, dims.m) {
        return Err(Error::domain(format!(
            "signal is {}x{} but dims need {}x{}",
            signal.m1.nrows(),
            signal.m1.ncols(),
            dims.r,
            dims.m
        )));
    }
    let mut y1 = DMatrix::zeros(dims.r, dims.m);
    fill_std_normal(rng, &mut y1);
    y1 += &signal.m1;
    let mut y2 = DMatrix::zeros(dims.n - dims.p, dims.m);
    fill_std_normal(rng, &mut y2);
    let sx = y1.tr_mul(&y1);
    let se = y2.tr_mul(&y2);
    SumsOfSquares::new(se, sx, dims)
}
