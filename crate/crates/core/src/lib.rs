//! Hourly unit commitment with a sampled variational circuit.
//!
//! A QUBO over on/off decisions is minimised approximately by a layered,
//! warm-started ansatz on a statevector simulator. The cheapest
//! capacity-feasible samples are then dispatched exactly.

pub mod dispatch;
pub mod error;
pub mod grid;
pub mod qsim;
pub mod qubo;
pub mod report;
pub mod vqa;

pub use dispatch::{
    approximation_error, brute_force_optimum, c_min, is_sieve_feasible, solve_rqp, Commitment,
    DispatchResult, DispatchStatus, ENUMERATION_GUARD,
};
pub use error::{Error, Result};
pub use grid::{builtin_instance, GeneratorSpec, GridInstance, LoadProfile, BUILTIN_NAMES};
pub use qsim::{build_ansatz, AnsatzSpec, ParameterVector, Shots, StateVector};
pub use qubo::{QuboProblem, WarmStart};
pub use report::RunReport;
pub use vqa::{
    default_lambda, inference, solve_hourly, solve_periods, solve_uc, HourlySolution, VqaConfig,
};
