use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("need at least 2 states, got {0}")]
    TooFewStates(usize),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("duplicate edge ({0} -> {1})")]
    DuplicateEdge(String, String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("graph is not strongly connected")]
    NotStronglyConnected,
    #[error("value count {got} does not match expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("row of state `{state}` sums to {sum}, expected 1")]
    RowNotNormalized { state: String, sum: f64 },
    #[error("nonpositive value {value} on edge ({from} -> {to})")]
    NotPositive { from: String, to: String, value: f64 },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("eigensolver stalled at residual {residual} after {iterations} iterations (tolerance {tolerance})")]
    ConvergenceFailure {
        residual: f64,
        tolerance: f64,
        iterations: usize,
    },
    #[error("measure is not shift-invariant: residual {residual} exceeds {tolerance}")]
    NotShiftInvariant { residual: f64, tolerance: f64 },
    #[error("zero total mass leaving state `{0}`")]
    ZeroRow(String),
    #[error("operands live on different graphs")]
    GraphMismatch,
    #[error("kernels coincide up to gauge; the family through them is degenerate")]
    IdenticalKernels,
    #[error("family is not minimal: effective dimension {rank} < {dim}")]
    NotMinimal { rank: usize, dim: usize },
    #[error("newton iteration stopped at residual {residual} after {iterations} iterations")]
    NoConvergence {
        residual: f64,
        iterations: usize,
        last_theta: Vec<f64>,
    },
    #[error("kernel does not lie in the family (reconstruction residual {0})")]
    NotInFamily(f64),
    #[error("trajectory uses transition ({0} -> {1}) outside the edge set")]
    UnsupportedTransition(String, String),
    #[error("exponentiation out of range (value spread {0}); rescale the input")]
    Overflow(f64),
    #[error("json: {0}")]
    Json(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code, used by the CLI error envelope.
    pub fn code(&self) -> &'static str {
        match self {
            Error::TooFewStates(_) => "too_few_states",
            Error::DuplicateState(_) => "duplicate_state",
            Error::DuplicateEdge(_, _) => "duplicate_edge",
            Error::UnknownState(_) => "unknown_state",
            Error::NotStronglyConnected => "not_strongly_connected",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::RowNotNormalized { .. } => "row_not_normalized",
            Error::NotPositive { .. } => "not_positive",
            Error::InvalidDistribution(_) => "invalid_distribution",
            Error::ConvergenceFailure { .. } => "convergence_failure",
            Error::NotShiftInvariant { .. } => "not_shift_invariant",
            Error::ZeroRow(_) => "zero_row",
            Error::GraphMismatch => "graph_mismatch",
            Error::IdenticalKernels => "identical_kernels",
            Error::NotMinimal { .. } => "not_minimal",
            Error::NoConvergence { .. } => "no_convergence",
            Error::NotInFamily(_) => "not_in_family",
            Error::UnsupportedTransition(_, _) => "unsupported_transition",
            Error::Overflow(_) => "overflow",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
