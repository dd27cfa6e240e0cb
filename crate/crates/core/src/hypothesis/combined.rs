use serde::Serialize;

use super::lrt::t1_test;
use super::report::{Method, TestReport};
use super::roy::t2_test;
use crate::dist::std_normal_tail;
use crate::error::{Error, Result};
use crate::model::{Convention, SumsOfSquares};

/// Threshold `F_n` above which `T2` is added to `T1`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FRule {
    /// `max(log log n, 2)`.
    #[default]
    LogLog,
    Constant(f64),
}

impl FRule {
    pub fn threshold(self, n: usize) -> f64 {
        match self {
            FRule::LogLog => (n as f64).ln().ln().max(2.0),
            FRule::Constant(c) => c,
        }
    }
}

impl std::str::FromStr for FRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("loglog") {
            return Ok(FRule::LogLog);
        }
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(FRule::Constant)
            .ok_or_else(|| {
                Error::domain(format!(
                    "threshold rule must be `loglog` or a number, got `{s}`"
                ))
            })
    }
}

/// `T1 + T2 · 1{T2 >= F_n}`.
pub fn t3_combine(t1: f64, t2: f64, f_n: f64) -> f64 {
    if t2 >= f_n {
        t1 + t2
    } else {
        t1
    }
}

pub fn t3_test(ss: &SumsOfSquares, f_rule: FRule) -> Result<TestReport> {
    t3_test_with(ss, f_rule, Convention::default())
}

pub fn t3_test_with(
    ss: &SumsOfSquares,
    f_rule: FRule,
    convention: Convention,
) -> Result<TestReport> {
    let t1 = t1_test(ss)?;
    // A zero largest root sends T2 to -inf, which never crosses F_n.
    let t2 = match t2_test(ss, convention) {
        Ok(rep) => rep.statistic,
        Err(Error::DegenerateRoot(theta)) if theta <= 0.0 => f64::NEG_INFINITY,
        Err(e) => return Err(e),
    };
    let f_n = f_rule.threshold(ss.dims.n);
    let stat = t3_combine(t1.statistic, t2, f_n);
    let mut rep = TestReport::new(Method::T3, stat, std_normal_tail(stat)?)
        .with("t1", t1.statistic)
        .with("f_n", f_n);
    if t2.is_finite() {
        rep = rep.with("t2", t2);
    }
    rep.diagnostics.extend(t1.diagnostics);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{canonical_form_sample, Dims, SignalMatrix};
    use crate::rng::stream;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    #[test]
    fn loglog_threshold() {
        assert_eq!(FRule::LogLog.threshold(100), 2.0);
        assert!((FRule::LogLog.threshold(1_000_000_000) - (1e9f64).ln().ln()).abs() < 1e-15);
        assert_eq!(FRule::Constant(1.5).threshold(100), 1.5);
        assert_eq!("loglog".parse::<FRule>().unwrap(), FRule::LogLog);
        assert_eq!("2.5".parse::<FRule>().unwrap(), FRule::Constant(2.5));
        assert!("inf".parse::<FRule>().is_err());
    }

    #[test]
    fn indicator() {
        assert_eq!(t3_combine(1.0, 1.5, 2.0), 1.0);
        assert_eq!(t3_combine(1.0, 2.5, 2.0), 3.5);
        assert_eq!(t3_combine(1.0, 2.0, 2.0), 3.0);
    }

    #[test]
    fn zero_signal_reduces_to_t1() {
        let dims = Dims::new(40, 5, 3, 2).unwrap();
        let ss = SumsOfSquares::new(DMatrix::identity(3, 3), DMatrix::zeros(3, 3), dims).unwrap();
        let rep = t3_test(&ss, FRule::LogLog).unwrap();
        assert_eq!(rep.statistic, t1_test(&ss).unwrap().statistic);
        assert!(rep.diagnostic("t2").is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn t3_dominates_t1(seed in any::<u64>(), spike in 0.0f64..8.0, f in 0.0f64..4.0) {
            let dims = Dims::new(60, 10, 6, 4).unwrap();
            let sig = SignalMatrix::diagonal(4, 6, &[spike]).unwrap();
            let ss = canonical_form_sample(&mut stream(seed), &sig, dims).unwrap();
            let t1 = t1_test(&ss).unwrap();
            let t3 = t3_test(&ss, FRule::Constant(f)).unwrap();
            prop_assert!(t3.statistic >= t1.statistic);
            prop_assert!(t3.p_value <= t1.p_value);
        }
    }
}
