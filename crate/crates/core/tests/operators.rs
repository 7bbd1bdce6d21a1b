mod common;

use common::{max_norm, oracle_bel, oracle_combine, random_mass};
use dstcons::{conflict, combine_yager, DstError, Frame, MassFunction, Operator, Subset, EPS_NORM};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_pcg::Pcg64;

fn pair(n: usize, seed: u64, max_focal: usize) -> (MassFunction, MassFunction) {
    let frame = Frame::new(n).unwrap();
    let mut rng = Pcg64::seed_from_u64(seed);
    (random_mass(&mut rng, frame, max_focal), random_mass(&mut rng, frame, max_focal))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn operators_match_brute_force(n in 2usize..=4, seed in any::<u64>(), max_focal in 1usize..=15) {
        let (m1, m2) = pair(n, seed, max_focal);
        for op in Operator::ALL {
            match (op.combine(&m1, &m2), oracle_combine(op, &m1, &m2)) {
                (Ok(got), Some(want)) => {
                    let err = max_norm(&got.to_dense(), &want);
                    prop_assert!(err < 1e-12, "{op}: {m1} with {m2}: error {err}");
                }
                (Err(DstError::TotalConflict(_)), None) => {}
                (got, want) => prop_assert!(false, "{op}: {got:?} vs {want:?}"),
            }
        }
    }

    #[test]
    fn outputs_are_normalized_and_commutative(n in 2usize..=5, seed in any::<u64>(), max_focal in 1usize..=8) {
        let (m1, m2) = pair(n, seed, max_focal);
        for op in Operator::ALL {
            let (Ok(a), Ok(b)) = (op.combine(&m1, &m2), op.combine(&m2, &m1)) else {
                prop_assert_eq!(op, Operator::Dempster);
                continue;
            };
            prop_assert!(a.check_invariants().is_ok());
            prop_assert!((a.total() - 1.0).abs() <= EPS_NORM);
            prop_assert!(a.focal().iter().all(|&(s, m)| !s.is_empty() && m > 0.0));
            prop_assert!(a.approx_eq(&b, EPS_NORM), "{op} not commutative");
        }
    }

    #[test]
    fn vacuous_is_neutral(n in 2usize..=5, seed in any::<u64>()) {
        let (m, _) = pair(n, seed, 6);
        let v = MassFunction::vacuous(m.frame());
        for op in [Operator::Dempster, Operator::DuboisPrade, Operator::Yager] {
            prop_assert!(op.combine(&m, &v).unwrap().approx_eq(&m, EPS_NORM));
            prop_assert!(op.combine(&v, &m).unwrap().approx_eq(&m, EPS_NORM));
        }
    }

    #[test]
    fn belief_plausibility_duality(n in 2usize..=5, seed in any::<u64>()) {
        let (m, _) = pair(n, seed, 10);
        let frame = m.frame();
        for a in frame.subsets() {
            let bel = m.bel(a).unwrap();
            let pl = m.pl(a).unwrap();
            prop_assert!((bel - oracle_bel(&m, a)).abs() <= EPS_NORM);
            prop_assert!(bel <= pl + EPS_NORM);
            if a != frame.universe() {
                let dual = 1.0 - m.bel(frame.complement(a)).unwrap();
                prop_assert!((pl - dual).abs() <= EPS_NORM);
            }
        }
    }

    #[test]
    fn yager_universe_mass_equivalence(n in 2usize..=4, seed in any::<u64>()) {
        let (m1, m2) = pair(n, seed, 8);
        let frame = m1.frame();
        let universe = frame.universe();
        let mut proper = 0.0;
        for &(a, x) in m1.focal() {
            for &(b, y) in m2.focal() {
                let c = a.intersect(b);
                if !c.is_empty() && c != universe {
                    proper += x * y;
                }
            }
        }
        let k = conflict(&m1, &m2).unwrap();
        let sum_form = m1.mass(universe) * m2.mass(universe) + k;
        let y = combine_yager(&m1, &m2).unwrap();
        prop_assert!((sum_form - (1.0 - proper)).abs() <= EPS_NORM);
        prop_assert!((y.mass(universe) - sum_form).abs() <= EPS_NORM);
    }

    #[test]
    fn pignistic_sums_to_one(n in 2usize..=6, seed in any::<u64>()) {
        let (m, _) = pair(n, seed, 12);
        let p = m.pignistic();
        prop_assert!((p.probs().iter().sum::<f64>() - 1.0).abs() <= EPS_NORM);
        prop_assert!(p.probs().iter().all(|&x| x >= 0.0));
    }
}

#[test]
fn averaging_has_no_neutral_element() {
    let frame = Frame::new(3).unwrap();
    let m = MassFunction::categorical(frame, Subset::singleton(1)).unwrap();
    let v = MassFunction::vacuous(frame);
    assert!(!Operator::Average.combine(&m, &v).unwrap().approx_eq(&m, 1e-3));
}

#[test]
fn disjoint_categoricals_are_total_conflict_for_dempster() {
    let frame = Frame::new(3).unwrap();
    let a = MassFunction::categorical(frame, Subset::singleton(1)).unwrap();
    let b = MassFunction::categorical(frame, Subset::singleton(2)).unwrap();
    assert!(matches!(Operator::Dempster.combine(&a, &b), Err(DstError::TotalConflict(_))));
    let dp = Operator::DuboisPrade.combine(&a, &b).unwrap();
    assert_eq!(dp.mass(Subset::from_states([1, 2])), 1.0);
}
