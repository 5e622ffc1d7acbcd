use hotgibbs::oracle;
use hotgibbs::{Axis, PauliString, SiteSet};
use proptest::prelude::*;
use std::collections::BTreeSet;

fn pauli(n: usize) -> impl Strategy<Value = PauliString> {
    (prop::collection::vec(0usize..4, n), 0u8..4).prop_map(move |(codes, phase)| {
        let ops: Vec<(usize, Axis)> = codes
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(s, &c)| (s, Axis::ALL[c - 1]))
            .collect();
        PauliString::from_sparse(n, &ops).unwrap().with_phase(phase)
    })
}

fn triple() -> impl Strategy<Value = (PauliString, PauliString, PauliString)> {
    (1usize..=4).prop_flat_map(|n| (pauli(n), pauli(n), pauli(n)))
}

proptest! {
    #[test]
    fn multiplication_is_associative((a, b, c) in triple()) {
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn dagger_reverses_products((a, b, _) in triple()) {
        let lhs = a.mul(&b).unwrap().dagger();
        let rhs = b.dagger().mul(&a.dagger()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn product_matches_dense((a, b, _) in triple()) {
        let dense = oracle::pauli_dense(&a).unwrap() * oracle::pauli_dense(&b).unwrap();
        let ours = oracle::pauli_dense(&a.mul(&b).unwrap()).unwrap();
        prop_assert_eq!(oracle::max_abs_diff(&dense, &ours), 0.0);
    }

    #[test]
    fn squares_are_scalar((a, _, _) in triple()) {
        let sq = a.mul(&a).unwrap();
        prop_assert!(sq.is_identity_string());
        // (i^k P)^2 = i^{2k}
        prop_assert_eq!(sq.phase_exp(), (2 * a.phase_exp()) % 4);
    }

    #[test]
    fn labels_round_trip((a, _, _) in triple()) {
        let back = PauliString::parse(a.n(), &a.label()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn normalized_trace_matches_dense((a, _, _) in triple()) {
        let d = oracle::pauli_dense(&a).unwrap();
        let t = oracle::trace(&d) / (1u64 << a.n()) as f64;
        let ours = a.normalized_trace();
        prop_assert!((t - ours).norm() < 1e-15);
    }

    #[test]
    fn site_sets_match_btreeset(
        n in 1usize..150,
        xs in prop::collection::vec(0usize..150, 0..40),
        ys in prop::collection::vec(0usize..150, 0..40),
    ) {
        let xs: Vec<usize> = xs.into_iter().filter(|&s| s < n).collect();
        let ys: Vec<usize> = ys.into_iter().filter(|&s| s < n).collect();
        let a = SiteSet::from_sites(n, xs.iter().copied());
        let b = SiteSet::from_sites(n, ys.iter().copied());
        let sa: BTreeSet<usize> = xs.into_iter().collect();
        let sb: BTreeSet<usize> = ys.into_iter().collect();
        prop_assert_eq!(a.len(), sa.len());
        prop_assert_eq!(a.to_vec(), sa.iter().copied().collect::<Vec<_>>());
        prop_assert_eq!(a.intersection_len(&b), sa.intersection(&sb).count());
        prop_assert_eq!(a.intersects(&b), sa.intersection(&sb).next().is_some());
        prop_assert_eq!(a.is_subset(&b), sa.is_subset(&sb));
        let mut u = a.clone();
        u.union_with(&b);
        prop_assert_eq!(u.to_vec(), sa.union(&sb).copied().collect::<Vec<_>>());
        let mut d = a.clone();
        d.difference_with(&b);
        prop_assert_eq!(d.to_vec(), sa.difference(&sb).copied().collect::<Vec<_>>());
        prop_assert_eq!(a.complement().len(), n - sa.len());
    }
}
