use serde::Serialize;

use crate::dist::{std_normal_tail, std_normal_upper_quantile};
use crate::error::{Error, Result};

/// Limiting ratios `p/n → ρ_p`, `r/n → ρ_r`, `m/n → ρ_m` and the nonzero
/// eigenvalues `δ_j` of `Δ = Ω/n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerSpec {
    pub deltas: Vec<f64>,
    pub rho_p: f64,
    pub rho_r: f64,
    pub rho_m: f64,
    pub alpha: f64,
}

impl PowerSpec {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rho_p", self.rho_p),
            ("rho_r", self.rho_r),
            ("rho_m", self.rho_m),
            ("alpha", self.alpha),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::domain(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if let Some(d) = self.deltas.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
            return Err(Error::domain(format!(
                "signal eigenvalues must be positive, got {d}"
            )));
        }
        if self.rho_p + self.rho_m >= 1.0 {
            return Err(Error::regime(format!(
                "rho_p + rho_m = {} must be below 1",
                self.rho_p + self.rho_m
            )));
        }
        Ok(())
    }

    /// `W_Δ = Σ log(1 + δ_j / (1 + ρ_r - ρ_p))`.
    pub fn w_delta(&self) -> Result<f64> {
        self.validate()?;
        let scale = 1.0 + self.rho_r - self.rho_p;
        Ok(self.deltas.iter().map(|d| (d / scale).ln_1p()).sum())
    }

    /// Limit of `σ_n²`.
    pub fn sigma2(&self) -> Result<f64> {
        self.validate()?;
        let num = 1.0 - self.rho_m / (1.0 + self.rho_r - self.rho_p);
        let den = 1.0 - self.rho_m / (1.0 - self.rho_p);
        let s2 = 2.0 * (num / den).ln();
        if !(s2 > 0.0 && s2.is_finite()) {
            return Err(Error::regime(format!(
                "limiting sigma^2 = {s2} is not positive"
            )));
        }
        Ok(s2)
    }
}

/// Asymptotic power of `T1`, `1 - Φ(z_α - A_1 W_Δ)` with `A_1 = 2/σ`.
pub fn theoretical_power(spec: &PowerSpec) -> Result<f64> {
    let w = spec.w_delta()?;
    let a1 = 2.0 / spec.sigma2()?.sqrt();
    std_normal_tail(std_normal_upper_quantile(spec.alpha)? - a1 * w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(deltas: Vec<f64>) -> PowerSpec {
        PowerSpec {
            deltas,
            rho_p: 0.5,
            rho_r: 0.3,
            rho_m: 0.2,
            alpha: 0.05,
        }
    }

    #[test]
    fn no_signal_gives_alpha() {
        assert!((theoretical_power(&spec(vec![])).unwrap() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn reference_point() {
        let s = spec(vec![1.0]);
        assert!((s.sigma2().unwrap() - 0.4462871026284195).abs() < 1e-14);
        assert!((s.w_delta().unwrap() - 0.8109302162163288).abs() < 1e-14);
        assert!((theoretical_power(&s).unwrap() - 0.7831598700740444).abs() < 1e-10);
    }

    #[test]
    fn increasing_in_each_delta() {
        let mut last = 0.0;
        for k in 1..30 {
            let p = theoretical_power(&spec(vec![0.5, 0.05 * k as f64])).unwrap();
            assert!(p > last);
            last = p;
        }
    }

    #[test]
    fn invalid_specs() {
        let mut s = spec(vec![1.0]);
        s.rho_p = 0.85;
        assert!(matches!(theoretical_power(&s), Err(Error::Regime(_))));
        let s = spec(vec![-1.0]);
        assert!(matches!(theoretical_power(&s), Err(Error::Domain(_))));
    }
}
