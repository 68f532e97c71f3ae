use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::state::StateVector;
use crate::error::{Error, Result};
use crate::qubo::WarmStart;

/// Layered warm-start ansatz.
///
/// Fixed `Ry` initialisation, then `layers` repetitions of a butterfly
/// entangler (one shared `ZY` angle per stage) followed by the warm-start
/// mixer (one angle per layer).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub layers: usize,
    pub stages: Vec<Vec<(usize, usize)>>,
    pub init_angles: Vec<f64>,
}

/// Trainable angles, laid out per layer as `(γ_0, …, γ_{S-1}, β)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(pub Vec<f64>);

impl ParameterVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// One gate of the expanded circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    /// Fixed initialisation rotation.
    Ry { qubit: usize, angle: f64 },
    /// Entangler; `param` indexes the parameter vector.
    Zy { a: usize, b: usize, param: usize },
    /// Mixer over all qubits; `param` indexes the parameter vector.
    Mixer { param: usize },
}

/// Number of butterfly stages, `ceil(log2 N)`.
pub fn stage_count(n_qubits: usize) -> usize {
    if n_qubits <= 1 {
        0
    } else {
        (usize::BITS - (n_qubits - 1).leading_zeros()) as usize
    }
}

/// Stage `k` pairs every `i` with `i ^ 2^k` when both are below `N`.
pub fn butterfly_stages(n_qubits: usize) -> Vec<Vec<(usize, usize)>> {
    (0..stage_count(n_qubits))
        .map(|k| {
            let bit = 1usize << k;
            (0..n_qubits)
                .filter(|&i| i & bit == 0 && (i | bit) < n_qubits)
                .map(|i| (i, i | bit))
                .collect()
        })
        .collect()
}

pub fn build_ansatz(n_qubits: usize, layers: usize, warm_start: &WarmStart) -> Result<AnsatzSpec> {
    if n_qubits < 2 {
        return Err(Error::InvalidConfig(format!(
            "ansatz needs at least 2 qubits, got {n_qubits}"
        )));
    }
    if layers < 1 {
        return Err(Error::InvalidConfig(
            "ansatz needs at least one layer".into(),
        ));
    }
    if warm_start.angles.len() != n_qubits {
        return Err(Error::InvalidConfig(format!(
            "warm start has {} angles for {n_qubits} qubits",
            warm_start.angles.len()
        )));
    }
    Ok(AnsatzSpec {
        n_qubits,
        layers,
        stages: butterfly_stages(n_qubits),
        init_angles: warm_start.angles.clone(),
    })
}

impl AnsatzSpec {
    pub fn params_per_layer(&self) -> usize {
        self.stages.len() + 1
    }

    pub fn parameter_count(&self) -> usize {
        self.layers * self.params_per_layer()
    }

    pub fn gates_per_layer(&self) -> usize {
        self.stages.iter().map(Vec::len).sum()
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.layers * self.gates_per_layer()
    }

    pub fn stage_sizes(&self) -> Vec<usize> {
        self.stages.iter().map(Vec::len).collect()
    }

    /// The circuit as a flat gate list.
    pub fn gates(&self) -> Vec<Gate> {
        let mut gates: Vec<Gate> = self
            .init_angles
            .iter()
            .enumerate()
            .map(|(qubit, &angle)| Gate::Ry { qubit, angle })
            .collect();
        let per_layer = self.params_per_layer();
        for layer in 0..self.layers {
            let offset = layer * per_layer;
            for (k, stage) in self.stages.iter().enumerate() {
                gates.extend(stage.iter().map(|&(a, b)| Gate::Zy {
                    a,
                    b,
                    param: offset + k,
                }));
            }
            gates.push(Gate::Mixer {
                param: offset + self.stages.len(),
            });
        }
        gates
    }

    /// Human-readable gate listing: `name qubits param-index`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# ansatz n_qubits={} layers={} params={} tqg={}",
            self.n_qubits,
            self.layers,
            self.parameter_count(),
            self.two_qubit_gate_count()
        );
        for gate in self.gates() {
            let _ = match gate {
                Gate::Ry { qubit, angle } => writeln!(out, "ry q{qubit} fixed={angle:.12}"),
                Gate::Zy { a, b, param } => writeln!(out, "zy q{a},q{b} p{param}"),
                Gate::Mixer { param } => writeln!(out, "mixer all p{param}"),
            };
        }
        out
    }

    /// `|ψ(θ)⟩` starting from `|0…0⟩`.
    pub fn run(&self, params: &ParameterVector) -> Result<StateVector> {
        if params.len() != self.parameter_count() {
            return Err(Error::ParameterLength {
                expected: self.parameter_count(),
                got: params.len(),
            });
        }
        let mut state = StateVector::product_ry(&self.init_angles);
        let per_layer = self.params_per_layer();
        for layer_params in params.0.chunks(per_layer) {
            let (gammas, beta) = layer_params.split_at(self.stages.len());
            for (stage, &gamma) in self.stages.iter().zip(gammas) {
                if gamma == 0.0 {
                    continue;
                }
                for &(a, b) in stage {
                    state.apply_zy(a, b, gamma);
                }
            }
            state.apply_mixer(beta[0], &self.init_angles);
        }
        Ok(state)
    }
}

/// Free-function form of [`AnsatzSpec::run`].
pub fn run_circuit(spec: &AnsatzSpec, params: &ParameterVector) -> Result<StateVector> {
    spec.run(params)
}
