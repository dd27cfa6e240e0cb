//! Monte Carlo harness: calibration, boundary, power and multi-split sweeps
//! over grids of dimensions and signals.

mod gamma;
mod generate;
mod run;
mod spec;
mod table;

pub use gamma::{gamma_sensitivity, GammaRow, GammaTable};
pub use generate::{ar1_covariance, gen_linear_model, LinearSampler};
pub use run::{multisplit_sweep, power_sweep, run_experiment, type1_sweep};
pub use spec::{Cell, ExperimentSpec, Generator, GrowthCase, MethodSpec, Noise, Signal};
pub use table::{ResultRow, ResultTable};
