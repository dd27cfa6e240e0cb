use super::report::{Method, TestReport};
use crate::dist::{chi_sq_upper_tail, std_normal_tail};
use crate::error::{Error, Result};
use crate::model::{neg2_log_lrt, Dims, SumsOfSquares};

/// Centering `μ_n` and scale `nσ_n` of `-2 log L_n`.
///
/// With `a = n - p`, `b = n + r - p` the ratio
/// `((b - m) a) / ((a - m) b)` equals `1 + mr / ((a - m) b)`, so every
/// logarithm is taken through `ln_1p` and stays accurate for huge `n`.
pub fn mu_sigma(dims: Dims) -> Result<(f64, f64)> {
    dims.require_lrt()?;
    let (n, p, m, r) = dims.nf();
    let a = n - p;
    let b = n + r - p;
    let log_ratio = (m * r / ((a - m) * b)).ln_1p();
    let sigma2 = 2.0 * log_ratio;
    if !(sigma2 > 0.0) {
        return Err(Error::regime(format!(
            "sigma_n^2 = {sigma2} is not positive at {dims}"
        )));
    }
    let mu =
        n * (n - m - p - 0.5) * log_ratio + n * r * (-m / b).ln_1p() + n * m * (-r / b).ln_1p();
    Ok((mu, n * sigma2.sqrt()))
}

/// Bartlett's factor `ρ = 1 - (p - r/2 + m/2 + 1/2) / n`.
pub fn bartlett_factor(dims: Dims) -> f64 {
    let (n, p, m, r) = dims.nf();
    1.0 - (p - r / 2.0 + m / 2.0 + 0.5) / n
}

fn degrees_of_freedom(dims: Dims) -> f64 {
    (dims.m * dims.r) as f64
}

pub fn chi2_test(ss: &SumsOfSquares) -> Result<TestReport> {
    ss.dims.require_lrt()?;
    let stat = neg2_log_lrt(ss)?;
    let df = degrees_of_freedom(ss.dims);
    Ok(TestReport::new(Method::Chi2, stat, chi_sq_upper_tail(stat, df)?).with("df", df))
}

pub fn bartlett_test(ss: &SumsOfSquares) -> Result<TestReport> {
    ss.dims.require_lrt()?;
    let rho = bartlett_factor(ss.dims);
    if rho <= 0.0 {
        return Err(Error::regime(format!(
            "Bartlett factor rho = {rho} is not positive at {}",
            ss.dims
        )));
    }
    let stat = rho * neg2_log_lrt(ss)?;
    let df = degrees_of_freedom(ss.dims);
    Ok(
        TestReport::new(Method::Bartlett, stat, chi_sq_upper_tail(stat, df)?)
            .with("df", df)
            .with("rho", rho),
    )
}

pub fn t1_test(ss: &SumsOfSquares) -> Result<TestReport> {
    let (mu, n_sigma) = mu_sigma(ss.dims)?;
    let stat = (neg2_log_lrt(ss)? + mu) / n_sigma;
    Ok(TestReport::new(Method::T1, stat, std_normal_tail(stat)?)
        .with("mu_n", mu)
        .with("n_sigma_n", n_sigma))
}
