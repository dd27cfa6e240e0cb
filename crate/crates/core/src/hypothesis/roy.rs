use super::report::{Method, TestReport};
use crate::dist::tw1_sf;
use crate::error::{Error, Result};
use crate::model::{theta_max, Convention, Dims, SumsOfSquares};

/// Centering `μ̃_n` and scale `σ̃_n` for the logit of the largest root.
pub fn t2_params(dims: Dims) -> Result<(f64, f64)> {
    dims.require_lrt()?;
    let lo = dims.m.min(dims.r) as f64;
    let hi = dims.m.max(dims.r) as f64;
    let big_n = (dims.n + dims.r) as f64 - dims.p as f64 - 1.0;
    if big_n <= hi {
        return Err(Error::regime(format!(
            "need n - p + r - 1 > max(m, r), got {big_n} at {dims}"
        )));
    }
    let gamma = 2.0 * ((lo - 0.5) / big_n).sqrt().asin();
    let phi = 2.0 * ((hi - 0.5) / big_n).sqrt().asin();
    let sum = phi + gamma;
    if sum >= std::f64::consts::PI {
        return Err(Error::regime(format!(
            "largest-root angles sum to {sum} >= pi at {dims}"
        )));
    }
    let mu = 2.0 * (sum / 2.0).tan().ln();
    let sigma3 = 16.0 / (big_n * big_n) / (sum.sin().powi(2) * phi.sin() * gamma.sin());
    Ok((mu, sigma3.cbrt()))
}

pub fn t2_test(ss: &SumsOfSquares, convention: Convention) -> Result<TestReport> {
    let (mu, sigma) = t2_params(ss.dims)?;
    let theta = theta_max(ss, convention)?;
    if theta <= 0.0 || theta >= 1.0 {
        return Err(Error::DegenerateRoot(theta));
    }
    let stat = ((theta / (1.0 - theta)).ln() - mu) / sigma;
    Ok(TestReport::new(Method::T2, stat, tw1_sf(stat)?)
        .with("theta", theta)
        .with("mu_tilde", mu)
        .with("sigma_tilde", sigma))
}
