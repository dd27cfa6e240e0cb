//! Likelihood-ratio and largest-root tests for the general linear hypothesis
//! `CB = 0` in multivariate linear regression `Y = XB + E`.
//!
//! The crate covers the classical regime (chi-square and Bartlett
//! approximations), the high-dimensional regime where `p`, `m` and `r` grow
//! with `n` (the corrected normal statistic `T1`, the Tracy-Widom largest-root
//! statistic `T2` and their combination `T3`), and the `p > n` regime through
//! canonical-correlation screening with repeated sample splitting.
//!
//! Module map:
//!
//! * [`dist`]: normal, chi-square and Tracy-Widom (order 1) distributions,
//!   beta sampling, Kolmogorov-Smirnov helpers.
//! * [`model`]: least squares, the sums-of-squares pair `(S_E, S_X)`,
//!   relative eigenvalues and canonical-form sampling.
//! * [`hypothesis`]: the test statistics, boundary diagnostics and the
//!   asymptotic power formula.
//! * [`screening`]: predictor screening, conditional transform, PCA on the
//!   responses.
//! * [`multisplit`]: the split / screen / test / aggregate procedure.
//! * [`simlab`]: Monte Carlo sweeps producing [`simlab::ResultTable`]s.
//! * [`io`]: CSV matrices and key=value config files.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected; long float
// literals are published coefficients and oracle values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod dist;
pub mod error;
pub mod hypothesis;
pub mod io;
pub mod model;
pub mod multisplit;
pub mod rng;
pub mod screening;
pub mod simlab;

pub use error::{Error, Result};
pub use hypothesis::{
    bartlett_test, boundary_check, chi2_test, mu_sigma, t1_test, t2_test, t3_test,
    theoretical_power, BoundaryDiag, FRule, Method, PowerSpec, TestReport,
};
pub use model::{
    canonical_form_sample, fit_mlr, hypothesis_ss, neg2_log_lrt, rel_eigenvalues, theta_max,
    Convention, DataSet, Dims, HypothesisMatrix, SignalMatrix, SumsOfSquares,
};
pub use multisplit::{
    multisplit_test, MultiSplitConfig, MultiSplitOutcome, PcaPolicy, SplitOutcome,
};
pub use rng::Stream;
