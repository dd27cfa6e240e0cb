//! Test statistics for `H0: CB = 0` and their reference distributions.

mod boundary;
mod combined;
mod lrt;
mod power;
mod report;
mod roy;

pub use boundary::{boundary_check, BoundaryDiag, Verdict};
pub use combined::{t3_combine, t3_test, t3_test_with, FRule};
pub use lrt::{bartlett_factor, bartlett_test, chi2_test, mu_sigma, t1_test};
pub use power::{theoretical_power, PowerSpec};
pub use report::{Method, TestOptions, TestReport};
pub use roy::{t2_params, t2_test};
