//! Model fitting and reduction to the sums-of-squares pair `(S_E, S_X)`.

mod canonical;
mod fit;
pub(crate) mod linalg;
mod roots;
mod types;

pub use canonical::canonical_form_sample;
pub use fit::{fit_mlr, hypothesis_ss, MlrFit};
pub use roots::{neg2_log_lrt, rel_eigenvalues, theta_max, Convention};
pub use types::{DataSet, Dims, HypothesisMatrix, SignalMatrix, SumsOfSquares};
