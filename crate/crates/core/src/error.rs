use thiserror::Error;

pub type Result<T> = std::result::Result<T, MssError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MssError {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    IndexOutOfRange { index: usize, n_qubits: usize },
    #[error("control and target must differ (both {0})")]
    EqualIndices(usize),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("operator is not unitary (deviation {0:.3e})")]
    NonUnitary(f64),
    #[error("measurement branch has probability {0:.3e}; outcome impossible")]
    ImpossibleBranch(f64),
    #[error("unsupported qubit count {0}")]
    UnsupportedQubits(usize),
    #[error("wigner vector is not normalised (sum {0})")]
    NonNormalised(f64),
    #[error("linear program infeasible")]
    LpInfeasible,
    #[error("linear program unbounded")]
    LpUnbounded,
    #[error("simplex did not converge within {0} iterations")]
    LpIterationLimit(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("assemblage is missing setting {0}")]
    MissingSetting(String),
    #[error("empty post-selected sample for basis {0}")]
    EmptySample(String),
    #[error("malformed bitstring {0:?}")]
    MalformedBitstring(String),
}
