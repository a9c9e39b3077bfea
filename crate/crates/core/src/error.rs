use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("dimension mismatch in `{field}`: expected {expected}, got {got}")]
    Dimension {
        field: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("failed to read or write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {path}: {message}")]
    Parse { path: String, message: String },

    #[error("quartic coefficients {coeffs:?} do not have exactly one sign variation with c0 < 0")]
    SignPattern { coeffs: [f64; 4] },

    #[error("golden-section search exhausted {max_iter} iterations; best bracket [{lo}, {hi}]")]
    GoldenSection { max_iter: usize, lo: f64, hi: f64 },

    #[error("invalid search configuration: {0}")]
    SearchConfig(String),

    #[error("QCQP feasible set is unbounded: the constraint matrices have no positive definite sum")]
    Unbounded,

    #[error("constraint matrix {index} is not symmetric positive semidefinite")]
    NotPsd { index: usize },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("numerical failure in {stage}: residual {residual:e}")]
    Numerical { stage: &'static str, residual: f64 },

    #[error("eavesdropper channel is not a scalar multiple of the destination channel: {0}; use the iterative solver")]
    NotScaled(String),

    #[error("zero-forcing infeasible: eavesdropper constraints exhaust relay dimensions")]
    ZeroForcingInfeasible,

    #[error("no eavesdropper present: {0}")]
    NoEavesdropper(&'static str),

    #[error("eavesdropper channel not degraded (relay {relay}, eavesdropper {eavesdropper}): C_k not positive definite under rho >= 1")]
    NotDegraded { relay: usize, eavesdropper: usize },

    #[error("problem too large for {solver}: {relays} relays (limit {limit})")]
    TooLarge {
        solver: &'static str,
        relays: usize,
        limit: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
