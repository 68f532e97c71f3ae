use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse {
        row: u64,
        column: String,
        message: String,
    },

    #[error("unit {unit}: {message}")]
    InvalidUnit { unit: usize, message: String },

    #[error("invalid load profile: {0}")]
    InvalidProfile(String),

    #[error("unknown builtin instance `{0}` (expected uc3, uc10 or uc26)")]
    UnknownInstance(String),

    #[error("invalid commitment: {0}")]
    InvalidCommitment(String),

    #[error("no feasible commitment exists for load {load} MW")]
    NoFeasibleCommitment { load: f64 },

    #[error("exhaustive enumeration over {units} units exceeds the guard of {guard}")]
    EnumerationGuard { units: usize, guard: usize },

    #[error("approximate cost {approx} is below the exact optimum {exact}")]
    NegativeError { approx: f64, exact: f64 },

    #[error("relaxation infeasible: total capacity {capacity} MW is below load {load} MW")]
    InfeasibleRelaxation { capacity: f64, load: f64 },

    #[error("no sieve-feasible commitment was sampled and the warm-start fallback is dispatch-infeasible")]
    EmptyCandidates,

    #[error("parameter vector has length {got}, ansatz expects {expected}")]
    ParameterLength { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parameter file mismatch: {0}")]
    ParamsMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
