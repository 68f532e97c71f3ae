//! Dense statevector simulation of the layered warm-start ansatz.

mod ansatz;
mod measure;
mod state;

pub use ansatz::{
    build_ansatz, butterfly_stages, run_circuit, stage_count, AnsatzSpec, Gate, ParameterVector,
};
pub use measure::{estimate_energy, sample, sample_indices, Shots};
pub use state::{mixer_matrix, Mat2, StateVector};
