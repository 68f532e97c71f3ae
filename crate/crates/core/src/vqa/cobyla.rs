//! Derivative-free trust-region minimiser driven by linear interpolation on
//! a simplex, in the style of Powell's COBYLA without constraints.
//!
//! The simplex holds `n + 1` points. Each step either moves to the minimiser
//! of the linear model inside a ball of radius `rho`, or repairs the simplex
//! geometry. `rho` is halved when a model step fails on an acceptable
//! simplex, and never grows.

use nalgebra::DMatrix;

/// Radius schedule and evaluation budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustRegion {
    pub rho_begin: f64,
    pub rho_end: f64,
    pub max_evals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub index: usize,
    pub x: Vec<f64>,
    pub value: f64,
    /// Trust radius in force when the point was proposed.
    pub radius: f64,
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub history: Vec<Evaluation>,
    pub final_radius: f64,
}

impl Minimum {
    pub fn evaluations(&self) -> usize {
        self.history.len()
    }
}

// Simplex acceptability: every vertex at least ALPHA·rho from the opposite
// face and at most BETA·rho from the best vertex.
const ALPHA: f64 = 0.25;
const BETA: f64 = 2.1;
// Geometry steps have length GAMMA·rho.
const GAMMA: f64 = 0.5;
const DELTA: f64 = 1.1;

struct Budget<F> {
    f: F,
    history: Vec<Evaluation>,
    max: usize,
}

impl<F: FnMut(usize, &[f64]) -> f64> Budget<F> {
    fn exhausted(&self) -> bool {
        self.history.len() >= self.max
    }

    fn eval(&mut self, x: &[f64], radius: f64) -> f64 {
        let index = self.history.len();
        let value = (self.f)(index, x);
        let value = if value.is_nan() { f64::INFINITY } else { value };
        self.history.push(Evaluation {
            index,
            x: x.to_vec(),
            value,
            radius,
        });
        value
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Minimise `f` from `x0`. The objective receives the zero-based evaluation
/// index alongside the point, so stochastic objectives can derive
/// per-evaluation seeds.
pub fn minimize<F>(f: F, x0: &[f64], cfg: &TrustRegion) -> Minimum
where
    F: FnMut(usize, &[f64]) -> f64,
{
    assert!(
        cfg.rho_end > 0.0 && cfg.rho_end < cfg.rho_begin,
        "need 0 < rho_end < rho_begin"
    );
    assert!(cfg.max_evals >= 1);
    let n = x0.len();
    let mut budget = Budget {
        f,
        history: Vec::new(),
        max: cfg.max_evals,
    };
    let mut rho = cfg.rho_begin;
    let mut x_best = x0.to_vec();
    let mut f_best = budget.eval(&x_best, rho);

    // Displacements of the other vertices from the best one.
    let mut sim: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut fsim: Vec<f64> = Vec::with_capacity(n);
    for j in 0..n {
        if budget.exhausted() {
            break;
        }
        let mut d = vec![0.0; n];
        d[j] = rho;
        let value = budget.eval(&add(&x_best, &d), rho);
        sim.push(d);
        fsim.push(value);
    }
    if sim.len() < n || n == 0 {
        return finish(budget, x_best, f_best, &sim, &fsim, rho);
    }

    let mut after_model_step = false;
    while !budget.exhausted() {
        recenter(&mut x_best, &mut f_best, &mut sim, &mut fsim);

        let inverse = match simplex_inverse(&sim) {
            Some(inv) => inv,
            None => {
                // degenerate simplex: rebuild it around the best point
                for j in 0..n {
                    if budget.exhausted() {
                        break;
                    }
                    let mut d = vec![0.0; n];
                    d[j] = rho;
                    fsim[j] = budget.eval(&add(&x_best, &d), rho);
                    sim[j] = d;
                }
                continue;
            }
        };
        let df: Vec<f64> = fsim.iter().map(|v| v - f_best).collect();
        let grad: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| inverse[j][i] * df[j]).sum())
            .collect();
        let vsig: Vec<f64> = inverse.iter().map(|row| 1.0 / norm(row)).collect();
        let veta: Vec<f64> = sim.iter().map(|d| norm(d)).collect();
        let acceptable =
            vsig.iter().all(|&s| s >= ALPHA * rho) && veta.iter().all(|&e| e <= BETA * rho);

        if !after_model_step && !acceptable {
            let (far, far_dist) = argmax(&veta);
            let l = if far_dist > BETA * rho {
                far
            } else {
                argmin(&vsig).0
            };
            let scale = GAMMA * rho * vsig[l];
            let mut step: Vec<f64> = inverse[l].iter().map(|w| scale * w).collect();
            if dot(&grad, &step) > 0.0 {
                step.iter_mut().for_each(|s| *s = -*s);
            }
            fsim[l] = budget.eval(&add(&x_best, &step), rho);
            sim[l] = step;
            continue;
        }

        let gnorm = norm(&grad);
        let mut good_step = false;
        if gnorm > 0.0 && gnorm.is_finite() {
            let step: Vec<f64> = grad.iter().map(|g| -rho * g / gnorm).collect();
            let predicted = rho * gnorm;
            let value = budget.eval(&add(&x_best, &step), rho);
            let actual = f_best - value;
            after_model_step = true;

            // Pick the vertex to replace with the trial point.
            let mut threshold = if actual <= 0.0 { 1.0 } else { 0.0 };
            let mut drop = None;
            let mut sigbar = vec![0.0; n];
            for j in 0..n {
                let t = dot(&inverse[j], &step).abs();
                if t > threshold {
                    drop = Some(j);
                    threshold = t;
                }
                sigbar[j] = t * vsig[j];
            }
            let mut edge = DELTA * rho;
            let mut far = None;
            for j in 0..n {
                if sigbar[j] >= ALPHA * rho || sigbar[j] >= vsig[j] {
                    let dist = if actual > 0.0 {
                        norm(
                            &step
                                .iter()
                                .zip(&sim[j])
                                .map(|(a, b)| a - b)
                                .collect::<Vec<_>>(),
                        )
                    } else {
                        veta[j]
                    };
                    if dist > edge {
                        far = Some(j);
                        edge = dist;
                    }
                }
            }
            if let Some(j) = far.or(drop) {
                sim[j] = step;
                fsim[j] = value;
            }
            good_step = actual > 0.0 && actual >= 0.1 * predicted;
        }
        if good_step {
            continue;
        }
        if !acceptable {
            after_model_step = false;
            continue;
        }
        if rho <= cfg.rho_end {
            break;
        }
        rho *= 0.5;
        if rho <= 1.5 * cfg.rho_end {
            rho = cfg.rho_end;
        }
    }
    finish(budget, x_best, f_best, &sim, &fsim, rho)
}

fn finish<F>(
    budget: Budget<F>,
    mut x_best: Vec<f64>,
    mut f_best: f64,
    sim: &[Vec<f64>],
    fsim: &[f64],
    rho: f64,
) -> Minimum {
    let mut sim = sim.to_vec();
    let mut fsim = fsim.to_vec();
    recenter(&mut x_best, &mut f_best, &mut sim, &mut fsim);
    Minimum {
        x: x_best,
        value: f_best,
        history: budget.history,
        final_radius: rho,
    }
}

/// Move the base of the simplex to its lowest vertex.
fn recenter(x_best: &mut Vec<f64>, f_best: &mut f64, sim: &mut [Vec<f64>], fsim: &mut [f64]) {
    let Some((j, &fj)) = fsim.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)) else {
        return;
    };
    if fj >= *f_best {
        return;
    }
    let shift = sim[j].clone();
    *x_best = add(x_best, &shift);
    for (k, d) in sim.iter_mut().enumerate() {
        if k == j {
            d.iter_mut().for_each(|v| *v = -*v);
        } else {
            d.iter_mut().zip(&shift).for_each(|(v, s)| *v -= s);
        }
    }
    fsim[j] = *f_best;
    *f_best = fj;
}

/// Rows `w_j` with `w_j · sim_k = δ_jk`.
fn simplex_inverse(sim: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = sim.len();
    let a = DMatrix::from_fn(n, n, |i, j| sim[j][i]);
    let inv = a.try_inverse()?;
    if inv.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(
        (0..n)
            .map(|j| inv.row(j).iter().copied().collect())
            .collect(),
    )
}

fn argmax(v: &[f64]) -> (usize, f64) {
    v.iter().copied().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |acc, (i, x)| if x > acc.1 { (i, x) } else { acc },
    )
}

fn argmin(v: &[f64]) -> (usize, f64) {
    v.iter().copied().enumerate().fold(
        (0, f64::INFINITY),
        |acc, (i, x)| if x < acc.1 { (i, x) } else { acc },
    )
}
