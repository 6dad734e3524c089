//! Interval, significance and agreement properties.

use delib_core::eval::{
    cohens_kappa, confusion, f1_ci_exact, kappa_from_counts, significance_vs, Confusion, Direction, EvalReport,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn interval_is_symmetric_about_half(f in 0.0f64..=100.0, n in 1usize..5000) {
        let a = f1_ci_exact(f, n).unwrap();
        let b = f1_ci_exact(100.0 - f, n).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert!(a <= f1_ci_exact(50.0, n).unwrap() + 1e-12);
    }

    #[test]
    fn interval_shrinks_with_n(f in 0.0f64..=100.0, n in 1usize..5000, extra in 1usize..5000) {
        prop_assert!(f1_ci_exact(f, n + extra).unwrap() <= f1_ci_exact(f, n).unwrap() + 1e-12);
    }

    #[test]
    fn all_ones_precision_is_prevalence(gold in prop::collection::vec(any::<bool>(), 1..400)) {
        let preds = vec![true; gold.len()];
        let r = EvalReport::evaluate(&preds, &gold).unwrap();
        let pos = gold.iter().filter(|&&g| g).count();
        prop_assert!((r.precision - 100.0 * pos as f64 / gold.len() as f64).abs() < 1e-9);
        if pos > 0 {
            prop_assert_eq!(r.recall, 100.0);
        } else {
            prop_assert!(r.degenerate);
        }
    }

    #[test]
    fn significance_is_antisymmetric(
        a in prop::collection::vec(any::<bool>(), 50),
        b in prop::collection::vec(any::<bool>(), 50),
        gold in prop::collection::vec(any::<bool>(), 50),
    ) {
        let ra = EvalReport::evaluate(&a, &gold).unwrap();
        let rb = EvalReport::evaluate(&b, &gold).unwrap();
        let ab = significance_vs(&ra, &rb).unwrap();
        let ba = significance_vs(&rb, &ra).unwrap();
        prop_assert_eq!(ab.significant, ba.significant);
        let flipped = match ab.direction {
            Direction::Higher => Direction::Lower,
            Direction::Lower => Direction::Higher,
            Direction::Equal => Direction::Equal,
        };
        prop_assert_eq!(ba.direction, flipped);
    }

    #[test]
    fn kappa_from_counts_matches_pairs(
        pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 2..300)
    ) {
        let a: Vec<bool> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<bool> = pairs.iter().map(|p| p.1).collect();
        let c = confusion(&a, &b).unwrap();
        match (cohens_kappa(&a, &b), kappa_from_counts(c.tp, c.fp, c.fn_, c.tn)) {
            (Ok(x), Ok(y)) => prop_assert!((x - y).abs() < 1e-12),
            (Err(_), Err(_)) => {}
            (x, y) => prop_assert!(false, "{:?} vs {:?}", x, y),
        }
    }
}

#[test]
fn agreement_table_kappa() {
    let k = kappa_from_counts(160, 6, 69, 212).unwrap();
    assert!((k - 0.6665).abs() < 1e-3);
    let c = Confusion {
        tp: 160,
        fp: 6,
        fn_: 69,
        tn: 212,
    };
    assert_eq!(c.total(), 447);
}
