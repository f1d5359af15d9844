use proptest::prelude::*;
use quadrank_core::dialogue::{sample_topological_orders_with, OrderConstraint};
use quadrank_core::{
    aid, flatten, flatten_chronological, sample_topological_orders, Argument, BaseWeights, DebateGraph,
    OrderingLabel,
};
use quadrank_testkit::{arb_graph, claim_first, count_claim_first_orders};
use std::collections::HashSet;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn sampled_orders_are_valid_distinct_and_seeded(g in arb_graph(8), k in 1..8usize, seed in any::<u64>()) {
        let sample = sample_topological_orders(&g, k, seed).unwrap();
        prop_assert_eq!(&sample, &sample_topological_orders(&g, k, seed).unwrap());
        for order in &sample.orders {
            prop_assert!(claim_first(&g, order));
        }
        let distinct: HashSet<_> = sample.orders.iter().collect();
        prop_assert_eq!(distinct.len(), sample.orders.len());

        let available = count_claim_first_orders(&g, k);
        if available >= k {
            prop_assert_eq!(sample.orders.len(), k);
            prop_assert!(!sample.not_enough_orders);
        } else {
            prop_assert_eq!(sample.orders.len(), available);
            prop_assert!(sample.not_enough_orders);
        }
    }

    #[test]
    fn reply_first_reverses_every_constraint(g in arb_graph(8), seed in any::<u64>()) {
        let sample = sample_topological_orders_with(&g, 3, seed, OrderConstraint::ReplyFirst).unwrap();
        for order in &sample.orders {
            let reversed: Vec<_> = order.iter().rev().copied().collect();
            prop_assert!(claim_first(&g, &reversed));
        }
    }

    #[test]
    fn flattening_hides_relations(g in arb_graph(12)) {
        let text = flatten_chronological(&g).text();
        prop_assert!(!text.contains("attack"));
        prop_assert!(!text.contains("support"));
        prop_assert_eq!(text.lines().count(), g.len());

        // Same texts and order but no relations: identical output.
        let bare = DebateGraph::<f64>::build(g.name(), g.arguments().to_vec(), vec![], BaseWeights::Uniform).unwrap();
        prop_assert_eq!(flatten_chronological(&bare).text(), text);
    }
}

#[test]
fn relation_words_survive_only_inside_texts() {
    let args = vec![
        Argument::new(aid(1), "We should support   the ban.", 0),
        Argument::new(aid(2), "That is an attack on freedom.", 1),
    ];
    let g = quadrank_core::build_graph::<f64>(
        "t",
        args,
        vec![quadrank_core::Relation::attack(2, 1)],
        BaseWeights::Uniform,
    )
    .unwrap();
    let d = flatten(&g, &[aid(1), aid(2)], OrderingLabel::Chronological).unwrap();
    assert_eq!(
        d.text(),
        "Argument 1: We should support the ban.\nArgument 2: That is an attack on freedom.\n"
    );
}
