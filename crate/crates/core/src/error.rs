use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The dimensions fall outside the regime where the statistic is defined.
    #[error("regime error: {0}")]
    Regime(String),

    #[error("singular design: X is rank deficient (smallest |R_ii| = {smallest:.3e}, largest = {largest:.3e})")]
    SingularDesign { smallest: f64, largest: f64 },

    #[error("hypothesis matrix has numerical rank {found}, expected {expected}")]
    HypothesisRank { expected: usize, found: usize },

    /// `S_E` failed its Cholesky factorization.
    #[error("error matrix S_E is not positive definite (n <= p + m or collinear responses)")]
    DegenerateErrorMatrix,

    #[error("numerical degeneracy: {0}")]
    Numerical(String),

    #[error("largest root theta = {0} is on the boundary of (0, 1)")]
    DegenerateRoot(f64),

    #[error("split {split} infeasible: n_T = {n_test}, p0 = {p0}, m0 = {m0} ({reason})")]
    SplitInfeasible {
        split: usize,
        n_test: usize,
        p0: usize,
        m0: usize,
        reason: String,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn regime(msg: impl Into<String>) -> Self {
        Error::Regime(msg.into())
    }

    /// True for errors caused by reading or parsing input, as opposed to
    /// statistical or numerical misuse.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Io(_))
    }
}
