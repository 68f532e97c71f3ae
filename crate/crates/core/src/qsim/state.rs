use num_complex::Complex64;

/// Dense `2^N` amplitude vector. Bit `j` of a basis index is qubit `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    n_qubits: usize,
}

/// A 2×2 complex matrix in row-major order.
pub type Mat2 = [[Complex64; 2]; 2];

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim(n_qubits)];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self {
            amplitudes,
            n_qubits,
        }
    }

    /// `|index⟩`.
    pub fn basis(n_qubits: usize, index: u64) -> Self {
        let mut s = Self::zero(n_qubits);
        s.amplitudes[0] = Complex64::new(0.0, 0.0);
        s.amplitudes[index as usize] = Complex64::new(1.0, 0.0);
        s
    }

    /// `⊗_j Ry(θ_j)|0⟩`, written out directly instead of gate by gate.
    pub fn product_ry(angles: &[f64]) -> Self {
        let n = angles.len();
        let factors: Vec<(f64, f64)> = angles
            .iter()
            .map(|t| ((t / 2.0).cos(), (t / 2.0).sin()))
            .collect();
        let mut amplitudes = vec![Complex64::new(1.0, 0.0); 1];
        amplitudes.reserve_exact(dim(n) - 1);
        // Grow one qubit at a time: index bit j is qubit j.
        for &(c, s) in &factors {
            let half = amplitudes.len();
            amplitudes.extend_from_within(..);
            for a in &mut amplitudes[..half] {
                *a *= c;
            }
            for a in &mut amplitudes[half..] {
                *a *= s;
            }
        }
        Self {
            amplitudes,
            n_qubits: n,
        }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Self {
        let n_qubits = amplitudes.len().trailing_zeros() as usize;
        assert_eq!(
            amplitudes.len(),
            1 << n_qubits,
            "length must be a power of two"
        );
        Self {
            amplitudes,
            n_qubits,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn probability(&self, index: u64) -> f64 {
        self.amplitudes[index as usize].norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `|⟨self|other⟩|`.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm()
    }

    /// Real rotation `Ry(θ) = exp(-iθY/2)` on one qubit.
    pub fn apply_ry(&mut self, qubit: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        self.for_each_pair(qubit, |_, a0, a1| {
            let (x, y) = (*a0, *a1);
            *a0 = x * c - y * s;
            *a1 = x * s + y * c;
        });
    }

    /// `exp(-i·θ/2·Z_a ⊗ Y_b)`.
    ///
    /// `Z_a` is diagonal, so this is `Ry(θ)` on `b` where qubit `a` reads 0
    /// and `Ry(-θ)` where it reads 1.
    pub fn apply_zy(&mut self, qubit_a: usize, qubit_b: usize, theta: f64) {
        assert_ne!(qubit_a, qubit_b, "ZY needs two distinct qubits");
        assert!(qubit_a < self.n_qubits && qubit_b < self.n_qubits);
        let (s, c) = (theta / 2.0).sin_cos();
        let control = 1usize << qubit_a;
        self.for_each_pair(qubit_b, |i, a0, a1| {
            let s = if i & control == 0 { s } else { -s };
            let (x, y) = (*a0, *a1);
            *a0 = x * c - y * s;
            *a1 = x * s + y * c;
        });
    }

    /// Apply an arbitrary 2×2 matrix to one qubit.
    pub fn apply_single(&mut self, qubit: usize, m: &Mat2) {
        let m = *m;
        self.for_each_pair(qubit, |_, a0, a1| {
            let (x, y) = (*a0, *a1);
            *a0 = m[0][0] * x + m[0][1] * y;
            *a1 = m[1][0] * x + m[1][1] * y;
        });
    }

    /// Warm-start mixer: per qubit, a rotation by `2β` about the Bloch axis
    /// `(sin θ_j, 0, cos θ_j)`, i.e. `Ry(θ_j)·Rz(2β)·Ry(-θ_j)`.
    pub fn apply_mixer(&mut self, beta: f64, axis_angles: &[f64]) {
        assert_eq!(axis_angles.len(), self.n_qubits);
        if beta == 0.0 {
            return;
        }
        for (q, &theta) in axis_angles.iter().enumerate() {
            self.apply_single(q, &mixer_matrix(beta, theta));
        }
    }

    /// Visit every amplitude pair differing only in `qubit`, lower index first.
    fn for_each_pair<F>(&mut self, qubit: usize, mut f: F)
    where
        F: FnMut(usize, &mut Complex64, &mut Complex64),
    {
        assert!(qubit < self.n_qubits, "qubit {qubit} out of range");
        let stride = 1usize << qubit;
        for (block_index, block) in self.amplitudes.chunks_mut(2 * stride).enumerate() {
            let base = block_index * 2 * stride;
            let (lo, hi) = block.split_at_mut(stride);
            for (k, (a0, a1)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                f(base + k, a0, a1);
            }
        }
    }
}

/// `Ry(θ)·Rz(2β)·Ry(-θ)` written out:
/// `cos β·I - i sin β·(sin θ·X + cos θ·Z)`.
pub fn mixer_matrix(beta: f64, theta: f64) -> Mat2 {
    let (sb, cb) = beta.sin_cos();
    let (st, ct) = theta.sin_cos();
    [
        [Complex64::new(cb, -sb * ct), Complex64::new(0.0, -sb * st)],
        [Complex64::new(0.0, -sb * st), Complex64::new(cb, sb * ct)],
    ]
}

fn dim(n_qubits: usize) -> usize {
    assert!(
        n_qubits <= 30,
        "{n_qubits} qubits exceed the dense simulator limit"
    );
    1usize << n_qubits
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn close(a: Complex64, re: f64, im: f64) -> bool {
        (a.re - re).abs() < 1e-12 && (a.im - im).abs() < 1e-12
    }

    #[test]
    fn zy_identity_and_full_turn() {
        let mut s = StateVector::zero(2);
        s.apply_zy(1, 0, 0.0);
        assert_eq!(s, StateVector::zero(2));
        s.apply_zy(1, 0, 2.0 * PI);
        assert!(close(s.amplitudes()[0], -1.0, 0.0));
    }

    #[test]
    fn zy_quarter_turn_on_zero() {
        // qubit 1 carries Z (the high bit), qubit 0 carries Y
        let mut s = StateVector::zero(2);
        s.apply_zy(1, 0, FRAC_PI_2);
        assert!(close(s.amplitudes()[0b00], FRAC_1_SQRT_2, 0.0));
        assert!(close(s.amplitudes()[0b01], FRAC_1_SQRT_2, 0.0));
        assert!(close(s.amplitudes()[0b10], 0.0, 0.0));
    }

    #[test]
    fn zy_sign_flips_with_control() {
        let mut s = StateVector::basis(2, 0b10);
        s.apply_zy(1, 0, FRAC_PI_2);
        assert!(close(s.amplitudes()[0b10], FRAC_1_SQRT_2, 0.0));
        assert!(close(s.amplitudes()[0b11], -FRAC_1_SQRT_2, 0.0));
    }

    #[test]
    fn product_matches_gate_sequence() {
        let angles = [0.3, 1.1, 2.5, 0.0];
        let mut s = StateVector::zero(4);
        for (q, &t) in angles.iter().enumerate() {
            s.apply_ry(q, t);
        }
        let p = StateVector::product_ry(&angles);
        for (a, b) in s.amplitudes().iter().zip(p.amplitudes()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn mixer_fixes_the_warm_start_state() {
        let angles = [0.4, 2.0, 1.3];
        let start = StateVector::product_ry(&angles);
        for beta in [0.1, 0.7, 2.9] {
            let mut s = start.clone();
            s.apply_mixer(beta, &angles);
            assert!((s.overlap(&start) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn mixer_reduces_to_rz_on_z_axis() {
        let mut s = StateVector::product_ry(&[FRAC_PI_2]);
        s.apply_mixer(FRAC_PI_2, &[0.0]);
        // Rz(π) = diag(-i, i)
        assert!(close(s.amplitudes()[0], 0.0, -FRAC_1_SQRT_2));
        assert!(close(s.amplitudes()[1], 0.0, FRAC_1_SQRT_2));
    }

    #[test]
    fn gates_preserve_norm() {
        let mut s = StateVector::product_ry(&[0.2, 0.9, 1.7, 2.2, 0.4]);
        for k in 0..40 {
            let a = k % 5;
            let b = (k * 3 + 1) % 5;
            if a != b {
                s.apply_zy(a, b, 0.37 * k as f64);
            }
            s.apply_mixer(0.11 * k as f64, &[0.2, 0.9, 1.7, 2.2, 0.4]);
            assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }
}
