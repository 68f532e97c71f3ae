use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::state::StateVector;
use crate::dispatch::Commitment;
use crate::qubo::QuboProblem;

/// How an energy is estimated: from a finite number of shots or exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shots {
    Sampled(usize),
    Exact,
}

/// Draw `shots` computational-basis outcomes, returned in draw order.
///
/// The uniforms are sorted once and matched against the cumulative
/// distribution in a single sweep, so no `2^N` CDF is stored.
pub fn sample_indices(state: &StateVector, shots: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws: Vec<(f64, usize)> = (0..shots).map(|k| (rng.gen::<f64>(), k)).collect();
    draws.sort_by(|a, b| a.0.total_cmp(&b.0));

    let amps = state.amplitudes();
    let mut out = vec![0u64; shots];
    let mut cumulative = 0.0;
    let mut index = 0usize;
    let mut last_support = 0usize;
    for &(u, k) in &draws {
        while index < amps.len() {
            let p = amps[index].norm_sqr();
            if p > 0.0 {
                last_support = index;
            }
            if u < cumulative + p {
                break;
            }
            cumulative += p;
            index += 1;
        }
        if index == amps.len() {
            // rounding left the total just below 1
            out[k] = last_support as u64;
        } else {
            out[k] = index as u64;
        }
    }
    out
}

/// Sampled commitments, in draw order.
pub fn sample(state: &StateVector, shots: usize, seed: u64) -> Vec<Commitment> {
    let n = state.n_qubits();
    sample_indices(state, shots, seed)
        .into_iter()
        .map(|i| Commitment::from_mask(n, i))
        .collect()
}

/// Estimate `⟨ψ|H_Q|ψ⟩`.
pub fn estimate_energy(
    problem: &QuboProblem<'_>,
    state: &StateVector,
    shots: Shots,
    seed: u64,
) -> f64 {
    match shots {
        Shots::Sampled(n) => {
            assert!(n >= 1, "at least one shot is required");
            let total: f64 = sample_indices(state, n, seed)
                .into_iter()
                .map(|i| problem.value_at(i))
                .sum();
            total / n as f64
        }
        Shots::Exact => state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, a)| {
                a.norm_sqr()
                    * problem.value_uncached(&Commitment::from_mask(state.n_qubits(), i as u64))
            })
            .sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::builtin_instance;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn basis_state_always_samples_itself() {
        let s = StateVector::basis(4, 0b1010);
        assert!(sample_indices(&s, 200, 3).iter().all(|&i| i == 0b1010));
    }

    #[test]
    fn sampling_is_reproducible() {
        let s = StateVector::product_ry(&[0.3, 1.2, 2.0, 0.9, 1.5]);
        assert_eq!(sample_indices(&s, 1000, 42), sample_indices(&s, 1000, 42));
        assert_ne!(sample_indices(&s, 1000, 42), sample_indices(&s, 1000, 43));
    }

    #[test]
    fn uniform_two_qubit_frequencies() {
        let s = StateVector::product_ry(&[std::f64::consts::FRAC_PI_2; 2]);
        let draws = sample_indices(&s, 100_000, 9);
        for outcome in 0..4u64 {
            let freq = draws.iter().filter(|&&i| i == outcome).count() as f64 / 1e5;
            assert!((freq - 0.25).abs() < 0.01, "outcome {outcome}: {freq}");
        }
    }

    #[test]
    fn energy_of_basis_state_is_exact() {
        let (g, _) = builtin_instance("uc3").unwrap();
        let p = QuboProblem::new(&g, 170.0, 450_000.0).unwrap();
        let s = StateVector::basis(3, 0b100);
        let e = estimate_energy(&p, &s, Shots::Sampled(64), 1);
        assert!((e - 412.5).abs() < 1e-9);
        assert!((estimate_energy(&p, &s, Shots::Exact, 0) - 412.5).abs() < 1e-9);
    }

    #[test]
    fn energy_converges_to_the_mean_of_two_outcomes() {
        let (g, _) = builtin_instance("uc3").unwrap();
        let p = QuboProblem::new(&g, 170.0, 450_000.0).unwrap();
        // equal superposition of 001 (index 4, Q = 412.5) and 111 (index 7, Q = 3057.5)
        let mut amps = vec![Complex64::new(0.0, 0.0); 8];
        amps[4] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        amps[7] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let s = StateVector::from_amplitudes(amps);
        let exact = estimate_energy(&p, &s, Shots::Exact, 0);
        assert!((exact - 1735.0).abs() < 1e-9);
        let shots = 1_000_000;
        let sampled = estimate_energy(&p, &s, Shots::Sampled(shots), 5);
        let sigma = (3057.5 - 412.5) / 2.0 / (shots as f64).sqrt();
        assert!(
            (sampled - exact).abs() < 3.0 * sigma,
            "{sampled} vs {exact}"
        );
    }
}
