use thiserror::Error;

use crate::bounds::TestClass;
use crate::sdp::SdpStatus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix entry count {entries} does not match shape {rows}x{cols}")]
    Shape { rows: usize, cols: usize, entries: usize },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    NonHermitian { deviation: f64 },

    #[error("not a density matrix: {0}")]
    InvalidState(String),

    #[error("channel is not trace preserving: ||sum M^dag M - I|| = {residual:.3e}")]
    NotTracePreserving { residual: f64 },

    #[error("channel is not completely positive: min Choi eigenvalue {min_eigenvalue:.3e}")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("invalid probability {name} = {value}")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("operator is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("tensor power exceeds size cap: {dim} > {cap}")]
    SizeCapExceeded { dim: usize, cap: usize },

    #[error("test class {0} is not computable")]
    ClassNotComputable(TestClass),

    #[error("hypothesis ordering violated: lambda = {lambda} > mu = {mu}")]
    HypothesisOrdering { mu: f64, lambda: f64 },

    #[error("malformed SDP: {0}")]
    MalformedSdp(String),

    #[error("SDP solver did not reach optimality: {status:?}")]
    Solver { status: SdpStatus },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
