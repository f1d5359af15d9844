use proptest::prelude::*;
use quadrank_core::metrics::{kendall_tau_with, quartile_sizes, whitespace_tokens, TauVariant};
use quadrank_core::{
    aid, edge_prf, kendall_tau, quartile_correlations, quartile_split, spearman_rho, EdgeSet, QuartileKey, Ranking,
    Relation, RelationKind,
};
use quadrank_testkit::{
    arb_graph, arb_strict_ranking, arb_tied_ranking, kendall_tau_b_oracle, permutations, prf_oracle, spearman_oracle,
};
use std::collections::BTreeSet;

fn ids(n: u32) -> Vec<quadrank_core::ArgumentId> {
    (1..=n).map(aid).collect()
}

#[test]
fn tau_matches_pair_counting_on_every_small_permutation() {
    for n in 1..=6 {
        let gold = Ranking::strict(ids(n));
        for perm in permutations(&ids(n)) {
            let pred = Ranking::strict(perm);
            let got: Option<f64> = kendall_tau(&gold, &pred).unwrap();
            let want = kendall_tau_b_oracle(&gold, &pred);
            match (got, want) {
                (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12, "n={n}: {a} vs {b}"),
                (None, None) => {}
                other => panic!("definedness differs: {other:?}"),
            }
        }
    }
}

#[test]
fn identity_and_reversal_are_exact() {
    for n in 2..=9 {
        let gold = Ranking::strict(ids(n));
        let rev = gold.reversed();
        assert_eq!(spearman_rho::<f64>(&gold, &gold).unwrap(), Some(1.0));
        assert_eq!(kendall_tau::<f64>(&gold, &gold).unwrap(), Some(1.0));
        assert_eq!(spearman_rho::<f64>(&gold, &rev).unwrap(), Some(-1.0));
        assert_eq!(kendall_tau::<f64>(&gold, &rev).unwrap(), Some(-1.0));
    }
}

#[test]
fn tau_a_ignores_ties_in_the_denominator() {
    let gold = Ranking::from_groups(vec![vec![aid(1), aid(2)], vec![aid(3)]]);
    let pred = Ranking::strict(ids(3));
    let a: f64 = kendall_tau_with(&gold, &pred, TauVariant::A).unwrap().unwrap();
    let b: f64 = kendall_tau_with(&gold, &pred, TauVariant::B).unwrap().unwrap();
    assert!((a - 2.0 / 3.0).abs() < 1e-12);
    assert!((b - 2.0 / 6f64.sqrt()).abs() < 1e-12);
}

fn pairs(max: u32) -> impl Strategy<Value = (Ranking, Ranking)> {
    (2..=max).prop_flat_map(|n| (arb_tied_ranking(n), arb_tied_ranking(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1_000))]

    #[test]
    fn tau_matches_pair_counting_up_to_eight(
        (g, p) in (2..=8u32).prop_flat_map(|n| (arb_strict_ranking(n), arb_strict_ranking(n)))
    ) {
        let got: f64 = kendall_tau(&g, &p).unwrap().unwrap();
        prop_assert!((got - kendall_tau_b_oracle(&g, &p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn tied_rankings_match_oracles((g, p) in pairs(10)) {
        let tau: Option<f64> = kendall_tau(&g, &p).unwrap();
        let rho: Option<f64> = spearman_rho(&g, &p).unwrap();
        match (tau, kendall_tau_b_oracle(&g, &p)) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
            (a, b) => prop_assert_eq!(a, b),
        }
        match (rho, spearman_oracle(&g, &p)) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
            (a, b) => prop_assert_eq!(a, b),
        }
    }

    #[test]
    fn correlations_are_symmetric_and_bounded((g, p) in pairs(10)) {
        let t1: Option<f64> = kendall_tau(&g, &p).unwrap();
        let t2: Option<f64> = kendall_tau(&p, &g).unwrap();
        let r1: Option<f64> = spearman_rho(&g, &p).unwrap();
        let r2: Option<f64> = spearman_rho(&p, &g).unwrap();
        prop_assert_eq!(t1, t2);
        match (r1, r2) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
            (a, b) => prop_assert_eq!(a, b),
        }
        for v in [t1, r1].into_iter().flatten() {
            prop_assert!((-1.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn edge_prf_matches_set_oracle(
        gold in proptest::collection::vec((1..6u32, 1..6u32, any::<bool>()), 0..12),
        pred in proptest::collection::vec((1..6u32, 1..6u32, any::<bool>()), 0..12),
    ) {
        let rel = |(s, t, a): (u32, u32, bool)| {
            Relation::new(aid(s), aid(t), if a { RelationKind::Attack } else { RelationKind::Support })
        };
        let gold: Vec<Relation> = gold.into_iter().map(rel).collect();
        let pred: Vec<Relation> = pred.into_iter().map(rel).collect();
        let gs: EdgeSet = gold.iter().copied().collect();
        let ps: EdgeSet = pred.iter().copied().collect();
        let got = edge_prf::<f64>(&gs, &ps);
        let (p, r, f) = prf_oracle(&gold, &pred);
        prop_assert!((got.precision - p).abs() < 1e-12);
        prop_assert!((got.recall - r).abs() < 1e-12);
        prop_assert!((got.f1 - f).abs() < 1e-12);

        let swapped = edge_prf::<f64>(&ps, &gs);
        prop_assert_eq!(swapped.precision, got.recall);
        prop_assert_eq!(swapped.recall, got.precision);

        let reordered: EdgeSet = pred.iter().rev().copied().collect();
        prop_assert_eq!(edge_prf::<f64>(&gs, &reordered), got);

        // Graphs never hold both kinds for one pair, so flip a pair-unique subset.
        let mut pairs_seen = BTreeSet::new();
        let gs: EdgeSet = gs.iter().filter(|e| pairs_seen.insert((e.source, e.target))).copied().collect();
        let flipped: EdgeSet = gs.iter().map(|e| Relation::new(e.source, e.target, e.kind.flipped())).collect();
        let zero = edge_prf::<f64>(&gs, &flipped);
        prop_assert_eq!((zero.precision, zero.recall, zero.f1), (0.0, 0.0, 0.0));
        if !gs.is_empty() {
            let echo = edge_prf::<f64>(&gs, &gs);
            prop_assert_eq!((echo.precision, echo.recall, echo.f1), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn quartiles_partition_the_arguments(g in arb_graph(20), by_length in any::<bool>()) {
        let key = if by_length { QuartileKey::LengthTokens } else { QuartileKey::Position };
        let q = quartile_split(&g, key, whitespace_tokens);
        let all: Vec<_> = q.buckets.iter().flatten().copied().collect();
        let set: BTreeSet<_> = all.iter().copied().collect();
        prop_assert_eq!(all.len(), set.len());
        prop_assert_eq!(set, g.id_set());
        let sizes: Vec<usize> = q.buckets.iter().map(Vec::len).collect();
        prop_assert_eq!(sizes, quartile_sizes(g.len()).to_vec());
    }

    #[test]
    fn perfect_prediction_is_one_in_every_full_quartile(g in arb_graph(20)) {
        let gold = Ranking::strict(g.chronological_order());
        let q = quartile_split(&g, QuartileKey::Position, whitespace_tokens);
        let cells = quartile_correlations::<f64>(&gold, &gold, &q).unwrap();
        for (cell, bucket) in cells.iter().zip(&q.buckets) {
            if bucket.len() >= 2 {
                prop_assert_eq!(cell.rho, Some(1.0));
                prop_assert_eq!(cell.tau, Some(1.0));
            } else {
                prop_assert_eq!(cell.rho, None);
            }
        }
    }
}
