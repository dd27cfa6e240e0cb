use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{bartlett_test, chi2_test, t1_test, t2_test, t3_test_with, FRule};
use crate::error::{Error, Result};
use crate::model::{Convention, SumsOfSquares};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Chi2,
    Bartlett,
    T1,
    T2,
    T3,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Chi2,
        Method::Bartlett,
        Method::T1,
        Method::T2,
        Method::T3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Chi2 => "chi2",
            Method::Bartlett => "bartlett",
            Method::T1 => "t1",
            Method::T2 => "t2",
            Method::T3 => "t3",
        }
    }

    pub fn run(self, ss: &SumsOfSquares, opts: &TestOptions) -> Result<TestReport> {
        match self {
            Method::Chi2 => chi2_test(ss),
            Method::Bartlett => bartlett_test(ss),
            Method::T1 => t1_test(ss),
            Method::T2 => t2_test(ss, opts.convention),
            Method::T3 => t3_test_with(ss, opts.f_rule, opts.convention),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::domain(format!(
                    "unknown method `{s}` (expected chi2, bartlett, t1, t2 or t3)"
                ))
            })
    }
}

/// Settings shared by the statistics that need them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct TestOptions {
    pub convention: Convention,
    pub f_rule: FRule,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub method: Method,
    pub statistic: f64,
    pub p_value: f64,
    pub diagnostics: BTreeMap<String, f64>,
}

impl TestReport {
    pub(crate) fn new(method: Method, statistic: f64, p_value: f64) -> Self {
        TestReport {
            method,
            statistic,
            p_value: p_value.clamp(0.0, 1.0),
            diagnostics: BTreeMap::new(),
        }
    }

    pub(crate) fn with(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }

    pub fn diagnostic(&self, key: &str) -> Option<f64> {
        self.diagnostics.get(key).copied()
    }

    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }

    /// Flat `key=value` lines, diagnostics in key order.
    pub fn to_key_value(&self) -> String {
        let mut out = format!(
            "method={}\nstatistic={}\np_value={}\n",
            self.method, self.statistic, self.p_value
        );
        for (k, v) in &self.diagnostics {
            out.push_str(&format!("{k}={v}\n"));
        }
        out
    }

    pub fn csv_header(&self) -> String {
        let mut cols = vec!["method".to_string(), "statistic".into(), "p_value".into()];
        cols.extend(self.diagnostics.keys().cloned());
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cols = vec![
            self.method.to_string(),
            self.statistic.to_string(),
            self.p_value.to_string(),
        ];
        cols.extend(self.diagnostics.values().map(|v| v.to_string()));
        cols.join(",")
    }
}
