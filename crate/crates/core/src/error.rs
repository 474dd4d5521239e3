use thiserror::Error;

/// Errors produced anywhere in the crate.
///
/// Each variant maps onto one of the process exit codes used by the CLI
/// (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid disorder configuration: {0}")]
    InvalidDisorder(String),

    #[error("region out of bounds: {0}")]
    OutOfBounds(String),

    #[error(
        "matrix dimension {dim} exceeds the dense solver cap of {cap}; reduce the cube side L \
         or use the windowed solver"
    )]
    DimensionCap { dim: usize, cap: usize },

    #[error("eigensolver failed: {0}")]
    Solver(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("infeasible decomposition: {0}")]
    InfeasibleGeometry(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 2 config error, 3 infeasible geometry, 4 dimension cap, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidLattice(_) | Error::InvalidDisorder(_) => 2,
            Error::InfeasibleGeometry(_) => 3,
            Error::DimensionCap { .. } => 4,
            _ => 1,
        }
    }
}
