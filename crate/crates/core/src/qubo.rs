//! Hourly QUBO objective `Q(u) = c_min(u) + λ·erf((ℓ - uᵀp_max)⁺)` and the
//! warm-start relaxation.
//!
//! `Q` is never tabulated. It is the diagonal of the problem Hamiltonian and
//! is evaluated on demand for the bitstrings that actually get sampled.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::dispatch::{c_min, committed_capacity, Commitment};
use crate::error::{Error, Result};
use crate::grid::GridInstance;

/// Default clamp applied to relaxed values before they become angles.
pub const DEFAULT_WARM_EPSILON: f64 = 0.1;

/// One hourly problem: an instance, its load and the penalty weight.
#[derive(Debug)]
pub struct QuboProblem<'a> {
    instance: &'a GridInstance,
    load: f64,
    lambda: f64,
    memo: Mutex<HashMap<u64, f64>>,
}

impl<'a> QuboProblem<'a> {
    pub fn new(instance: &'a GridInstance, load: f64, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "penalty weight must be positive, got {lambda}"
            )));
        }
        if !(load > 0.0 && load.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "load must be positive, got {load}"
            )));
        }
        Ok(Self {
            instance,
            load,
            lambda,
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn instance(&self) -> &'a GridInstance {
        self.instance
    }

    pub fn load(&self) -> f64 {
        self.load
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n_units(&self) -> usize {
        self.instance.len()
    }

    /// `erf` of the positive part of the capacity shortfall, in MW.
    pub fn penalty(&self, u: &Commitment) -> f64 {
        let shortfall = (self.load - committed_capacity(self.instance, u)).max(0.0);
        libm::erf(shortfall)
    }

    /// `Q(u)`, memoised per bitstring.
    pub fn value(&self, u: &Commitment) -> f64 {
        let key = u.mask();
        if let Some(v) = self.memo.lock().unwrap().get(&key) {
            return *v;
        }
        let v = self.value_uncached(u);
        self.memo.lock().unwrap().insert(key, v);
        v
    }

    pub fn value_uncached(&self, u: &Commitment) -> f64 {
        c_min(self.instance, u) + self.lambda * self.penalty(u)
    }

    /// `Q` at a basis-state index.
    pub fn value_at(&self, index: u64) -> f64 {
        self.value(&Commitment::from_mask(self.n_units(), index))
    }

    pub fn cached_entries(&self) -> usize {
        self.memo.lock().unwrap().len()
    }

    /// Continuous relaxation of `min c_min(u) s.t. uᵀp_max ≥ ℓ, u ∈ [0,1]^N`.
    ///
    /// A covering knapsack: fill units in ascending `F(pmin)/pmax` order, the
    /// last one fractionally.
    pub fn relax(&self, epsilon: f64) -> Result<WarmStart> {
        let units = self.instance.units();
        let capacity = self.instance.total_capacity();
        if capacity < self.load {
            return Err(Error::InfeasibleRelaxation {
                capacity,
                load: self.load,
            });
        }
        let order = self.instance.ratio_order();
        let mut relaxed = vec![0.0; units.len()];
        let mut covered = 0.0;
        for &j in &order {
            if covered >= self.load {
                break;
            }
            let need = self.load - covered;
            let p_max = units[j].p_max;
            if need >= p_max {
                relaxed[j] = 1.0;
                covered += p_max;
            } else {
                relaxed[j] = need / p_max;
                covered = self.load;
            }
        }
        WarmStart::new(relaxed, epsilon, order)
    }
}

/// Relaxed commitment and the single-qubit angles that prepare it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmStart {
    pub relaxed: Vec<f64>,
    pub angles: Vec<f64>,
    pub epsilon: f64,
    order: Vec<usize>,
}

impl WarmStart {
    fn new(relaxed: Vec<f64>, epsilon: f64, order: Vec<usize>) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "warm-start epsilon must lie in (0, 0.5), got {epsilon}"
            )));
        }
        let angles = warm_start_angles(&relaxed, epsilon);
        Ok(Self {
            relaxed,
            angles,
            epsilon,
            order,
        })
    }

    /// Warm start built from explicit fractions (greedy order by index).
    pub fn from_fractions(relaxed: Vec<f64>, epsilon: f64) -> Result<Self> {
        let order = (0..relaxed.len()).collect();
        Self::new(relaxed, epsilon, order)
    }

    pub fn n_qubits(&self) -> usize {
        self.relaxed.len()
    }

    /// Round the relaxation up in greedy order: every unit with a positive
    /// fraction is switched on. Sieve-feasible whenever the relaxation is.
    pub fn rounded(&self) -> Commitment {
        let bits: Vec<bool> = self.relaxed.iter().map(|&r| r > 0.0).collect();
        Commitment::from_bits(&bits)
    }

    pub fn greedy_order(&self) -> &[usize] {
        &self.order
    }
}

/// `θ_j = 2·asin(√clamp(r_j, ε, 1-ε))`.
pub fn warm_start_angles(relaxed: &[f64], epsilon: f64) -> Vec<f64> {
    relaxed
        .iter()
        .map(|&r| 2.0 * r.clamp(epsilon, 1.0 - epsilon).sqrt().asin())
        .collect()
}
