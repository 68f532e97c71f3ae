//! Economic dispatch for a fixed commitment and the exhaustive UC oracle.
//!
//! For a fixed on/off vector the hourly problem reduces to a strictly convex,
//! separable QP with one coupling equality (power balance). Its optimum is
//! characterised by a single shadow price: every committed unit runs at
//! `clamp((λ - b) / 2a, pmin, pmax)` and λ is chosen so the outputs sum to
//! the load. The total output is continuous and nondecreasing in λ, so
//! bisection finds it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::{GeneratorSpec, GridInstance};

/// Largest instance the exhaustive oracle accepts.
pub const ENUMERATION_GUARD: usize = 26;

const BISECTION_MAX_ITERS: usize = 200;

/// An on/off vector over the units of an instance.
///
/// Bit `j` of the mask is unit `j`, which is also the basis-state index the
/// simulator uses. The text form puts unit 0 leftmost.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Commitment {
    mask: u64,
    len: u8,
}

impl Commitment {
    pub fn from_mask(len: usize, mask: u64) -> Self {
        assert!(
            (1..=64).contains(&len),
            "commitment length {len} out of range"
        );
        let mask = if len == 64 {
            mask
        } else {
            mask & ((1u64 << len) - 1)
        };
        Self {
            mask,
            len: len as u8,
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mask = bits
            .iter()
            .enumerate()
            .fold(0u64, |m, (j, &on)| if on { m | (1 << j) } else { m });
        Self::from_mask(bits.len(), mask)
    }

    pub fn all_on(len: usize) -> Self {
        Self::from_mask(len, u64::MAX)
    }

    pub fn all_off(len: usize) -> Self {
        Self::from_mask(len, 0)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_on(&self, unit: usize) -> bool {
        self.mask >> unit & 1 == 1
    }

    /// Basis-state index (bit j = unit j).
    pub fn mask(&self) -> u64 {
        self.mask
    }

    /// The text form read as a big-endian binary number; used for tie-breaks.
    pub fn order_key(&self) -> u64 {
        self.mask.reverse_bits() >> (64 - self.len as u32)
    }

    pub fn count_on(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.len()).map(|j| self.is_on(j)).collect()
    }

    /// Units that are on, in index order.
    pub fn committed(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&j| self.is_on(j))
    }

    /// Component-wise `self >= other`.
    pub fn dominates(&self, other: &Commitment) -> bool {
        self.len == other.len && other.mask & !self.mask == 0
    }

    fn check_len(&self, instance: &GridInstance) {
        assert_eq!(
            self.len(),
            instance.len(),
            "commitment length does not match instance size"
        );
    }
}

impl fmt::Display for Commitment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.len() {
            f.write_str(if self.is_on(j) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Commitment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() || s.len() > 64 {
            return Err(Error::InvalidCommitment(format!(
                "expected 1 to 64 characters, got {}",
                s.len()
            )));
        }
        let bits = s
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidCommitment(format!(
                    "unexpected character `{other}` in `{s}`"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bits(&bits))
    }
}

impl Serialize for Commitment {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Commitment {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DispatchStatus {
    Optimal,
    Infeasible,
}

/// Outcome of the residual QP for one commitment.
///
/// Infeasible results carry zero powers, an infinite cost and a NaN price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchResult {
    pub powers: Vec<f64>,
    pub total_cost: f64,
    pub marginal_price: f64,
    pub status: DispatchStatus,
}

impl DispatchResult {
    fn infeasible(n: usize) -> Self {
        Self {
            powers: vec![0.0; n],
            total_cost: f64::INFINITY,
            marginal_price: f64::NAN,
            status: DispatchStatus::Infeasible,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == DispatchStatus::Optimal
    }
}

/// Cost lower bound: every committed unit at its minimum output.
pub fn c_min(instance: &GridInstance, u: &Commitment) -> f64 {
    u.check_len(instance);
    u.committed().map(|j| instance.units()[j].min_cost()).sum()
}

/// Sum of maximum outputs over committed units.
pub fn committed_capacity(instance: &GridInstance, u: &Commitment) -> f64 {
    u.check_len(instance);
    u.committed().map(|j| instance.units()[j].p_max).sum()
}

/// Sum of minimum outputs over committed units.
pub fn committed_min_output(instance: &GridInstance, u: &Commitment) -> f64 {
    u.check_len(instance);
    u.committed().map(|j| instance.units()[j].p_min).sum()
}

/// Necessary feasibility test `uᵀp_max ≥ ℓ`.
pub fn is_sieve_feasible(instance: &GridInstance, u: &Commitment, load: f64) -> bool {
    committed_capacity(instance, u) >= load
}

fn output_at(unit: &GeneratorSpec, price: f64) -> f64 {
    ((price - unit.b) / (2.0 * unit.a)).clamp(unit.p_min, unit.p_max)
}

/// Optimal dispatch of `load` over the units committed by `u`.
pub fn solve_rqp(instance: &GridInstance, u: &Commitment, load: f64) -> DispatchResult {
    u.check_len(instance);
    let n = instance.len();
    let committed: Vec<&GeneratorSpec> = u.committed().map(|j| &instance.units()[j]).collect();
    let lo_total: f64 = committed.iter().map(|g| g.p_min).sum();
    let hi_total: f64 = committed.iter().map(|g| g.p_max).sum();
    if committed.is_empty() {
        if load == 0.0 {
            return DispatchResult {
                powers: vec![0.0; n],
                total_cost: 0.0,
                marginal_price: 0.0,
                status: DispatchStatus::Optimal,
            };
        }
        return DispatchResult::infeasible(n);
    }
    if lo_total > load || hi_total < load {
        return DispatchResult::infeasible(n);
    }

    let tol = 1e-9 * load.abs().max(1.0);
    let total_at = |price: f64| committed.iter().map(|g| output_at(g, price)).sum::<f64>();
    let mut lo = committed.iter().map(|g| g.b).fold(f64::INFINITY, f64::min);
    let mut hi = committed
        .iter()
        .map(|g| g.marginal_cost(g.p_max))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut price = 0.5 * (lo + hi);
    for _ in 0..BISECTION_MAX_ITERS {
        price = 0.5 * (lo + hi);
        let residual = total_at(price) - load;
        if residual.abs() <= tol {
            break;
        }
        if residual < 0.0 {
            lo = price;
        } else {
            hi = price;
        }
    }
    // Solve the final active set in closed form; keep it if it fits at least as well.
    let (mut pinned, mut slope, mut offset) = (0.0, 0.0, 0.0);
    for g in &committed {
        let p = output_at(g, price);
        if p > g.p_min && p < g.p_max {
            slope += 1.0 / (2.0 * g.a);
            offset += g.b / (2.0 * g.a);
        } else {
            pinned += p;
        }
    }
    if slope > 0.0 {
        let exact = (load - pinned + offset) / slope;
        if (total_at(exact) - load).abs() <= (total_at(price) - load).abs() {
            price = exact;
        }
    }

    let mut powers = vec![0.0; n];
    let mut total_cost = 0.0;
    for j in u.committed() {
        let g = &instance.units()[j];
        powers[j] = output_at(g, price);
        total_cost += g.cost(powers[j]);
    }
    DispatchResult {
        powers,
        total_cost,
        marginal_price: price,
        status: DispatchStatus::Optimal,
    }
}

/// `(cost, order_key)` comparison used by every argmin in the crate.
pub(crate) fn better(cost: f64, u: &Commitment, best_cost: f64, best: Option<&Commitment>) -> bool {
    match best {
        None => cost.is_finite(),
        Some(b) => cost < best_cost || (cost == best_cost && u.order_key() < b.order_key()),
    }
}

/// Exact hourly optimum by enumerating commitments with bound pruning.
///
/// Depth-first over units in ascending `F(pmin)/pmax` order. A subtree is
/// cut when its committed minimum output already exceeds the load, when the
/// remaining capacity cannot cover it, or when a convexity lower bound on
/// every completion exceeds the incumbent. The bound dominates `c_min`, so
/// every commitment with `c_min(u)` above the incumbent is cut as well.
pub fn brute_force_optimum(
    instance: &GridInstance,
    load: f64,
) -> Result<(Commitment, DispatchResult)> {
    let n = instance.len();
    if n > ENUMERATION_GUARD {
        return Err(Error::EnumerationGuard {
            units: n,
            guard: ENUMERATION_GUARD,
        });
    }
    let mut search = BranchAndBound::new(instance, load);
    search.descend(0, 0, 0.0, 0.0, 0.0, f64::INFINITY);
    match search.best {
        Some(u) => {
            let result = solve_rqp(instance, &u, load);
            Ok((u, result))
        }
        None => Err(Error::NoFeasibleCommitment { load }),
    }
}

struct BranchAndBound<'a> {
    instance: &'a GridInstance,
    load: f64,
    order: Vec<usize>,
    suffix_capacity: Vec<f64>,
    suffix_min_marginal: Vec<f64>,
    // Σ min(0, c - a·pmin²) over the suffix; covers units whose fixed cost
    // is smaller than the linear underestimate at pmin.
    suffix_slack: Vec<f64>,
    best: Option<Commitment>,
    best_cost: f64,
}

impl<'a> BranchAndBound<'a> {
    fn new(instance: &'a GridInstance, load: f64) -> Self {
        let units = instance.units();
        let order = instance.ratio_order();
        let n = order.len();
        let mut suffix_capacity = vec![0.0; n + 1];
        let mut suffix_min_marginal = vec![f64::INFINITY; n + 1];
        let mut suffix_slack = vec![0.0; n + 1];
        for k in (0..n).rev() {
            let g = &units[order[k]];
            suffix_capacity[k] = suffix_capacity[k + 1] + g.p_max;
            suffix_min_marginal[k] = suffix_min_marginal[k + 1].min(g.marginal_cost(g.p_min));
            suffix_slack[k] = suffix_slack[k + 1] + (g.c - g.a * g.p_min * g.p_min).min(0.0);
        }
        Self {
            instance,
            load,
            order,
            suffix_capacity,
            suffix_min_marginal,
            suffix_slack,
            best: None,
            best_cost: f64::INFINITY,
        }
    }

    fn descend(
        &mut self,
        depth: usize,
        mask: u64,
        cmin: f64,
        min_output: f64,
        capacity: f64,
        min_marginal: f64,
    ) {
        if min_output > self.load || capacity + self.suffix_capacity[depth] < self.load {
            return;
        }
        let marginal = min_marginal.min(self.suffix_min_marginal[depth]);
        let headroom = self.load - min_output;
        let bound =
            cmin + if headroom > 0.0 {
                headroom * marginal
            } else {
                0.0
            } + self.suffix_slack[depth];
        if bound > self.best_cost + 1e-9 * self.best_cost.abs() + 1e-9 {
            return;
        }
        if depth == self.order.len() {
            let u = Commitment::from_mask(self.instance.len(), mask);
            let result = solve_rqp(self.instance, &u, self.load);
            if result.is_optimal()
                && better(result.total_cost, &u, self.best_cost, self.best.as_ref())
            {
                self.best_cost = result.total_cost;
                self.best = Some(u);
            }
            return;
        }
        let j = self.order[depth];
        let g = &self.instance.units()[j];
        self.descend(
            depth + 1,
            mask | 1 << j,
            cmin + g.min_cost(),
            min_output + g.p_min,
            capacity + g.p_max,
            min_marginal.min(g.marginal_cost(g.p_min)),
        );
        self.descend(depth + 1, mask, cmin, min_output, capacity, min_marginal);
    }
}

/// Relative excess of an approximate cost over the exact optimum, in percent.
pub fn approximation_error(approx_cost: f64, exact_cost: f64) -> Result<f64> {
    if exact_cost.is_nan() || exact_cost <= 0.0 || approx_cost < exact_cost - 1e-6 * exact_cost {
        return Err(Error::NegativeError {
            approx: approx_cost,
            exact: exact_cost,
        });
    }
    Ok((100.0 * (approx_cost - exact_cost) / exact_cost).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::builtin_instance;

    fn uc3() -> GridInstance {
        builtin_instance("uc3").unwrap().0
    }

    fn u(s: &str) -> Commitment {
        s.parse().unwrap()
    }

    #[test]
    fn commitment_text_and_keys() {
        let c = u("1001100000");
        assert_eq!(c.to_string(), "1001100000");
        assert!(c.is_on(0) && c.is_on(3) && c.is_on(4) && !c.is_on(1));
        assert_eq!(c.mask(), 0b11001);
        assert_eq!(c.order_key(), 0b1001100000);
        assert!("10x".parse::<Commitment>().is_err());
        assert!("".parse::<Commitment>().is_err());
        assert_eq!(Commitment::all_on(3).to_string(), "111");
        assert!(u("111").dominates(&u("101")));
        assert!(!u("011").dominates(&u("101")));
    }

    #[test]
    fn c_min_values() {
        let g = uc3();
        assert!((c_min(&g, &u("111")) - 3057.5).abs() < 1e-9);
        assert!((c_min(&g, &u("001")) - 412.5).abs() < 1e-9);
        assert_eq!(c_min(&g, &u("000")), 0.0);
    }

    #[test]
    fn sieve_feasibility() {
        let g = uc3();
        assert!(is_sieve_feasible(&g, &u("001"), 170.0));
        assert!(!is_sieve_feasible(&g, &u("100"), 1100.0));
        assert!(!is_sieve_feasible(&g, &u("000"), 1.0));
    }

    #[test]
    fn table_three_unit_rows() {
        let g = uc3();
        let cases = [
            ("001", 170.0, [0.0, 0.0, 170.0], 1264.5),
            ("011", 520.0, [0.0, 320.0, 200.0], 4616.0),
            ("111", 1100.0, [500.0, 400.0, 200.0], 11400.0),
            ("011", 330.0, [0.0, 130.0, 200.0], 2882.25),
        ];
        for (s, load, powers, cost) in cases {
            let r = solve_rqp(&g, &u(s), load);
            assert!(r.is_optimal());
            for (p, q) in r.powers.iter().zip(powers) {
                assert!((p - q).abs() < 1e-6, "{s}@{load}: {:?}", r.powers);
            }
            assert!((r.total_cost - cost).abs() < 1e-6 * cost, "{s}@{load}");
        }
    }

    #[test]
    fn single_unit_price_is_its_marginal_cost() {
        let r = solve_rqp(&uc3(), &u("001"), 170.0);
        assert!((r.marginal_price - 7.7).abs() < 1e-6);
    }

    #[test]
    fn infeasible_when_outside_range() {
        let g = uc3();
        assert_eq!(
            solve_rqp(&g, &u("000"), 100.0).status,
            DispatchStatus::Infeasible
        );
        assert_eq!(
            solve_rqp(&g, &u("100"), 700.0).status,
            DispatchStatus::Infeasible
        );
        // capacity suffices but the minimum outputs overshoot
        assert_eq!(
            solve_rqp(&g, &u("110"), 150.0).status,
            DispatchStatus::Infeasible
        );
        assert!(solve_rqp(&g, &u("110"), 150.0).total_cost.is_infinite());
    }

    #[test]
    fn load_at_bounds_is_feasible() {
        let g = uc3();
        let r = solve_rqp(&g, &u("111"), 250.0);
        assert!(r.is_optimal());
        assert!((r.powers.iter().sum::<f64>() - 250.0).abs() < 1e-6);
        let r = solve_rqp(&g, &u("111"), 1200.0);
        assert!(r.is_optimal());
        assert!((r.powers[0] - 600.0).abs() < 1e-6);
    }

    #[test]
    fn oracle_three_unit_periods() {
        let g = uc3();
        for (load, s, cost) in [
            (170.0, "001", 1264.5),
            (520.0, "011", 4616.0),
            (1100.0, "111", 11400.0),
            (330.0, "011", 2882.25),
        ] {
            let (best, r) = brute_force_optimum(&g, load).unwrap();
            assert_eq!(best.to_string(), s);
            assert!((r.total_cost - cost).abs() < 1e-6 * cost);
        }
    }

    #[test]
    fn oracle_errors() {
        let g = uc3();
        assert!(matches!(
            brute_force_optimum(&g, 40.0),
            Err(Error::NoFeasibleCommitment { .. })
        ));
        let units = (0..27)
            .map(|index| GeneratorSpec {
                index,
                p_min: 1.0,
                p_max: 2.0,
                a: 0.1,
                b: 1.0,
                c: 1.0,
            })
            .collect();
        let big = GridInstance::new("big", units).unwrap();
        assert!(matches!(
            brute_force_optimum(&big, 10.0),
            Err(Error::EnumerationGuard { units: 27, .. })
        ));
    }

    #[test]
    fn error_percentages() {
        assert_eq!(approximation_error(1264.5, 1264.5).unwrap(), 0.0);
        assert!((approximation_error(102.0, 100.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(approximation_error(90.0, 100.0).is_err());
        assert!(approximation_error(1.0, 0.0).is_err());
    }
}
