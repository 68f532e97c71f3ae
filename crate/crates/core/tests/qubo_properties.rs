use proptest::prelude::*;

use qsieve::dispatch::committed_capacity;
use qsieve::{builtin_instance, c_min, is_sieve_feasible, Commitment, QuboProblem};

proptest! {
    #[test]
    fn penalty_vanishes_exactly_on_feasible_commitments(mask in 0u64..1024, load in 10.0..1662.0f64) {
        let (g, _) = builtin_instance("uc10").unwrap();
        let p = QuboProblem::new(&g, load, 450_000.0).unwrap();
        let u = Commitment::from_mask(10, mask);
        let pen = p.penalty(&u);
        prop_assert!((0.0..=1.0).contains(&pen));
        if is_sieve_feasible(&g, &u, load) {
            prop_assert_eq!(pen, 0.0);
            prop_assert_eq!(p.value(&u), c_min(&g, &u));
        } else {
            prop_assert!(pen > 0.0);
        }
    }

    #[test]
    fn penalty_shrinks_as_units_are_added(mask in 0u64..1024, extra in 0usize..10, load in 10.0..1662.0f64) {
        let (g, _) = builtin_instance("uc10").unwrap();
        let p = QuboProblem::new(&g, load, 450_000.0).unwrap();
        let u = Commitment::from_mask(10, mask);
        let v = Commitment::from_mask(10, mask | 1 << extra);
        prop_assert!(v.dominates(&u));
        prop_assert!(p.penalty(&v) <= p.penalty(&u));
    }

    #[test]
    fn relaxation_covers_the_load(load in 1.0..3105.0f64) {
        let (g, _) = builtin_instance("uc26").unwrap();
        let p = QuboProblem::new(&g, load, 700_000.0).unwrap();
        let w = p.relax(0.1).unwrap();
        let covered: f64 = w.relaxed.iter().zip(g.units()).map(|(r, u)| r * u.p_max).sum();
        prop_assert!(covered >= load - 1e-9 * load);
        prop_assert!(w.relaxed.iter().all(|r| (0.0..=1.0).contains(r)));
        prop_assert!(committed_capacity(&g, &w.rounded()) >= load);
        for (theta, r) in w.angles.iter().zip(&w.relaxed) {
            let prob_one = (theta / 2.0).sin().powi(2);
            prop_assert!((prob_one - r.clamp(0.1, 0.9)).abs() < 1e-12);
        }
    }
}

/// With the default penalty weights the QUBO minimum is always a
/// capacity-feasible commitment.
#[test]
fn qubo_argmin_is_sieve_feasible() {
    for (name, lambda) in [("uc3", 126_200.0), ("uc10", 450_000.0)] {
        let (g, profile) = builtin_instance(name).unwrap();
        for &load in profile.loads() {
            let p = QuboProblem::new(&g, load, lambda).unwrap();
            let (best, _) = (0..1u64 << g.len())
                .map(|i| (i, p.value_uncached(&Commitment::from_mask(g.len(), i))))
                .fold(
                    (0, f64::INFINITY),
                    |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
                );
            let u = Commitment::from_mask(g.len(), best);
            assert!(is_sieve_feasible(&g, &u, load), "{name} @ {load}: {u}");
        }
    }
}

#[test]
fn memo_agrees_with_direct_evaluation() {
    let (g, _) = builtin_instance("uc10").unwrap();
    let p = QuboProblem::new(&g, 1200.0, 450_000.0).unwrap();
    for i in 0..1024u64 {
        let u = Commitment::from_mask(10, i);
        assert_eq!(p.value(&u), p.value_uncached(&u));
        assert_eq!(p.value_at(i), p.value_uncached(&u));
    }
    assert_eq!(p.cached_entries(), 1024);
}
