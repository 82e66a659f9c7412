mod common;

use common::{bh_naive, fisher_enumerate};
use lexnet_core::interest_stats::{bh_fdr, fisher_two_sided, ContingencyTable};
use proptest::prelude::*;

fn table() -> impl Strategy<Value = ContingencyTable> {
    (0u64..25, 0u64..25, 0u64..25, 0u64..25).prop_map(|(a, b, c, d)| ContingencyTable::new(a, b, c, d))
}

fn pvalues() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![0.0..1.0f64, 0.0..0.01f64, Just(0.5), Just(0.01)], 1..120)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn fisher_matches_enumeration(t in table()) {
        let p = fisher_two_sided(&t);
        prop_assert!((p - fisher_enumerate(&t)).abs() <= 1e-12, "{t:?}: {p}");
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn fisher_symmetric_under_relabeling(t in table()) {
        let swapped = ContingencyTable::new(t.b, t.a, t.d, t.c);
        prop_assert!((fisher_two_sided(&t) - fisher_two_sided(&swapped)).abs() <= 1e-12);
    }

    #[test]
    fn bh_matches_naive(p in pvalues(), q in 0.001..0.5f64) {
        prop_assert_eq!(bh_fdr(&p, q), bh_naive(&p, q));
    }

    #[test]
    fn bh_monotone_in_q(p in pvalues(), q1 in 0.001..0.5f64, dq in 0.0..0.5f64) {
        let small = bh_fdr(&p, q1);
        let large = bh_fdr(&p, q1 + dq);
        prop_assert!(small.iter().zip(&large).all(|(s, l)| !s || *l));
    }

    #[test]
    fn bh_between_bonferroni_and_unadjusted(p in pvalues(), q in 0.001..0.5f64) {
        let m = p.len() as f64;
        let rejected = bh_fdr(&p, q);
        for (x, r) in p.iter().zip(&rejected) {
            if *x <= q / m {
                prop_assert!(*r);
            }
            if *r {
                prop_assert!(*x <= q);
            }
        }
    }

    #[test]
    fn bh_count_permutation_invariant(p in pvalues(), q in 0.001..0.5f64, seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut shuffled = p.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let count = |v: &[f64]| bh_fdr(v, q).into_iter().filter(|&r| r).count();
        prop_assert_eq!(count(&p), count(&shuffled));
    }
}
