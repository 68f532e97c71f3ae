use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::OptimizerTrace;
use crate::error::{Error, Result};
use crate::qsim::{AnsatzSpec, ParameterVector};

/// Trained parameters together with the ansatz shape they belong to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub n_qubits: usize,
    pub layers: usize,
    pub stage_sizes: Vec<usize>,
    pub epsilon_warm: f64,
    pub params: ParameterVector,
}

impl ParamsFile {
    pub fn new(spec: &AnsatzSpec, epsilon_warm: f64, params: ParameterVector) -> Self {
        Self {
            n_qubits: spec.n_qubits,
            layers: spec.layers,
            stage_sizes: spec.stage_sizes(),
            epsilon_warm,
            params,
        }
    }

    pub fn to_json<W: Write>(&self, sink: W) -> Result<()> {
        serde_json::to_writer_pretty(sink, self)?;
        Ok(())
    }

    pub fn from_json<R: Read>(source: R) -> Result<Self> {
        Ok(serde_json::from_reader(source)?)
    }

    /// Fail unless the stored shape matches `spec`.
    pub fn check(&self, spec: &AnsatzSpec) -> Result<()> {
        if self.n_qubits != spec.n_qubits || self.layers != spec.layers {
            return Err(Error::ParamsMismatch(format!(
                "file is for N={}, L={}; requested N={}, L={}",
                self.n_qubits, self.layers, spec.n_qubits, spec.layers
            )));
        }
        if self.params.len() != spec.parameter_count() {
            return Err(Error::ParameterLength {
                expected: spec.parameter_count(),
                got: self.params.len(),
            });
        }
        Ok(())
    }
}

/// `iteration,energy,best_energy` rows, one per objective evaluation.
pub fn write_trace_csv<W: Write>(trace: &OptimizerTrace, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["iteration", "energy", "best_energy"])?;
    let mut best = f64::INFINITY;
    for r in &trace.records {
        best = best.min(r.energy);
        w.write_record([
            r.iteration.to_string(),
            r.energy.to_string(),
            best.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
