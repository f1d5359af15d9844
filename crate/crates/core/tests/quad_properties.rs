use proptest::prelude::*;
use quadrank_core::{
    acceptability, aid, gold_ranking, Argument, ArgumentId, BaseWeights, DebateGraph, Graph, Ranking, Relation,
    RelationKind,
};
use quadrank_testkit::{arb_graph, quad_oracle};

fn sigma(g: &Graph, id: ArgumentId) -> f64 {
    *acceptability(g).get(id).unwrap()
}

/// `g` plus one fresh leaf acting on `target`.
fn with_leaf(g: &Graph, target: ArgumentId, kind: RelationKind, w: f64) -> Graph {
    let leaf = aid(g.len() as u32 + 1);
    let mut args = g.arguments().to_vec();
    args.push(Argument::new(leaf, "fresh", g.len()));
    let mut rels = g.relations().to_vec();
    rels.push(Relation::new(leaf, target, kind));
    let mut weights = g.base_weights();
    weights.insert(leaf, w);
    DebateGraph::build(g.name(), args, rels, BaseWeights::Explicit(weights)).unwrap()
}

fn pick(g: &Graph, raw: usize) -> ArgumentId {
    g.arguments()[raw % g.len()].id
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn degrees_stay_in_unit_interval(g in arb_graph(12)) {
        for (_, &s) in acceptability(&g).iter() {
            prop_assert!((0.0..=1.0).contains(&s), "{s}");
        }
    }

    #[test]
    fn polarity_bounds_and_leaf_identity(g in arb_graph(12)) {
        let scores = acceptability(&g);
        for arg in g.arguments() {
            let theta = *g.base_weight(arg.id).unwrap();
            let s = *scores.get(arg.id).unwrap();
            let att = g.attackers(arg.id).unwrap();
            let sup = g.supporters(arg.id).unwrap();
            if att.is_empty() && sup.is_empty() {
                prop_assert_eq!(s, theta);
            }
            if sup.is_empty() {
                prop_assert!(s <= theta);
            }
            if att.is_empty() {
                prop_assert!(s >= theta);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn matches_memoized_recursion(g in arb_graph(12)) {
        let fast = acceptability(&g);
        let oracle = quad_oracle(&g);
        for (id, &s) in fast.iter() {
            prop_assert!((s - oracle[&id]).abs() <= 1e-12, "{id}: {s} vs {}", oracle[&id]);
        }
    }

    #[test]
    fn fresh_attacker_never_raises(g in arb_graph(11), raw in any::<usize>(), w in 0.0..=1.0f64) {
        let a = pick(&g, raw);
        let before = sigma(&g, a);
        let after = sigma(&with_leaf(&g, a, RelationKind::Attack, w), a);
        prop_assert!(after <= before);
        // Strict only while the attack aggregate still has room to fall.
        let theta = *g.base_weight(a).unwrap();
        let attack_alive = g.attackers(a).unwrap().iter().all(|&b| sigma(&g, b) < 1.0);
        if w >= 1e-6 && theta > 0.0 && before > 0.0 && attack_alive {
            prop_assert!(after < before, "{before} -> {after}");
        }
    }

    #[test]
    fn fresh_supporter_never_lowers(g in arb_graph(11), raw in any::<usize>(), w in 0.0..=1.0f64) {
        let a = pick(&g, raw);
        let before = sigma(&g, a);
        let after = sigma(&with_leaf(&g, a, RelationKind::Support, w), a);
        prop_assert!(after >= before);
        let theta = *g.base_weight(a).unwrap();
        let support_alive = g.supporters(a).unwrap().iter().all(|&b| sigma(&g, b) < 1.0);
        if w >= 1e-6 && theta < 1.0 && before < 1.0 && support_alive {
            prop_assert!(after > before, "{before} -> {after}");
        }
    }

    #[test]
    fn evaluation_is_bit_identical(g in arb_graph(12)) {
        let a = acceptability(&g);
        let b = acceptability(&g);
        for ((x, s), (y, t)) in a.iter().zip(b.iter()) {
            prop_assert_eq!(x, y);
            prop_assert_eq!(s.to_bits(), t.to_bits());
        }
    }

    #[test]
    fn ranking_ignores_text_and_insertion_order(g in arb_graph(12), seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut args: Vec<Argument> = g
            .arguments()
            .iter()
            .map(|a| Argument::new(a.id, format!("rewritten {}", a.text.len() * 7), a.chronological_index))
            .collect();
        args.shuffle(&mut rng);
        let mut rels = g.relations().to_vec();
        rels.shuffle(&mut rng);
        let h = DebateGraph::build("other", args, rels, BaseWeights::Explicit(g.base_weights())).unwrap();
        prop_assert_eq!(gold_ranking(&acceptability(&g)), gold_ranking(&acceptability(&h)));
    }

    #[test]
    fn gold_ranking_is_descending_with_exact_ties(g in arb_graph(12)) {
        let scores = acceptability(&g);
        let ranking: Ranking = gold_ranking(&scores);
        prop_assert_eq!(ranking.len(), g.len());
        for pair in ranking.groups().windows(2) {
            prop_assert!(scores.get(pair[0][0]).unwrap() > scores.get(pair[1][0]).unwrap());
        }
        for group in ranking.groups() {
            let first = scores.get(group[0]).unwrap();
            prop_assert!(group.iter().all(|id| scores.get(*id).unwrap() == first));
        }
    }
}

#[test]
fn sobriety_style_worked_example() {
    let g = quadrank_core::build_graph(
        "SobrietyTest",
        quadrank_core::graph::numbered_arguments(8),
        vec![
            Relation::support(2, 1),
            Relation::attack(3, 1),
            Relation::support(4, 3),
            Relation::support(5, 1),
            Relation::attack(6, 5),
            Relation::support(7, 1),
            Relation::attack(8, 7),
        ],
        BaseWeights::Uniform,
    )
    .unwrap();
    let oracle = quad_oracle(&g);
    assert_eq!(oracle[&aid(3)], 0.75);
    assert_eq!(oracle[&aid(5)], 0.25);
    assert_eq!(oracle[&aid(1)], 0.4921875);
    assert_eq!(sigma(&g, aid(1)), 0.4921875);
}
