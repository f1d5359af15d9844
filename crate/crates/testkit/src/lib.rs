//! Test-only oracles. Everything here is written against the plain data
//! (relation lists, id vectors) and deliberately avoids the library's own
//! evaluation, ranking and counting paths, so it can check them.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::PathBuf;

use quadrank_core::{aid, Argument, ArgumentId, BaseWeights, DebateGraph, Graph, Ranking, Relation, RelationKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Workspace `data/` directory.
pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of a random DAG.
#[derive(Clone, Copy, Debug)]
pub struct DagSpec {
    pub max_nodes: u32,
    /// Probability that a forward pair `(i, j)`, `i > j`, carries a relation.
    pub density: f64,
    pub random_weights: bool,
}

/// Random acyclic graph: relations only run from higher to lower ids.
pub fn random_dag(rng: &mut impl Rng, spec: DagSpec) -> Graph {
    let n = rng.random_range(1..=spec.max_nodes);
    let arguments: Vec<Argument> = (1..=n)
        .map(|i| Argument::new(aid(i), format!("arg {i}"), (i - 1) as usize))
        .collect();
    let mut relations = Vec::new();
    for src in 1..=n {
        for dst in 1..src {
            if rng.random_bool(spec.density) {
                let kind = if rng.random_bool(0.5) {
                    RelationKind::Attack
                } else {
                    RelationKind::Support
                };
                relations.push(Relation::new(aid(src), aid(dst), kind));
            }
        }
    }
    let weights = if spec.random_weights {
        BaseWeights::Explicit((1..=n).map(|i| (aid(i), weight(rng))).collect())
    } else {
        BaseWeights::Uniform
    };
    DebateGraph::build("random", arguments, relations, weights).expect("forward edges are acyclic")
}

/// Mostly interior values with some exact endpoints.
fn weight(rng: &mut impl Rng) -> f64 {
    match rng.random_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.random::<f64>(),
    }
}

/// QuAD degrees by memoized recursion straight off the relation list.
pub fn quad_oracle(graph: &Graph) -> BTreeMap<ArgumentId, f64> {
    let mut incoming: HashMap<ArgumentId, Vec<(ArgumentId, RelationKind)>> = HashMap::new();
    for r in graph.relations() {
        incoming.entry(r.target).or_default().push((r.source, r.kind));
    }
    fn sigma(
        a: ArgumentId,
        graph: &Graph,
        incoming: &HashMap<ArgumentId, Vec<(ArgumentId, RelationKind)>>,
        memo: &mut HashMap<ArgumentId, f64>,
    ) -> f64 {
        if let Some(&v) = memo.get(&a) {
            return v;
        }
        let theta = *graph.base_weight(a).unwrap();
        let mut att_prod = 1.0;
        let mut sup_prod = 1.0;
        let (mut has_att, mut has_sup) = (false, false);
        let mut edges = incoming.get(&a).cloned().unwrap_or_default();
        edges.sort();
        for (b, kind) in edges {
            let s = sigma(b, graph, incoming, memo);
            match kind {
                RelationKind::Attack => {
                    has_att = true;
                    att_prod *= 1.0 - s;
                }
                RelationKind::Support => {
                    has_sup = true;
                    sup_prod *= 1.0 - s;
                }
            }
        }
        let va = theta * att_prod;
        let vs = 1.0 - (1.0 - theta) * sup_prod;
        let v = match (has_att, has_sup) {
            (true, false) => va,
            (false, true) => vs,
            (false, false) => theta,
            (true, true) => (va + vs) / 2.0,
        };
        memo.insert(a, v);
        v
    }
    let mut memo = HashMap::new();
    graph
        .arguments()
        .iter()
        .map(|arg| (arg.id, sigma(arg.id, graph, &incoming, &mut memo)))
        .collect()
}

/// Fractional rank per id, computed from the groups by counting.
pub fn fractional_ranks(ranking: &Ranking) -> BTreeMap<ArgumentId, f64> {
    let mut out = BTreeMap::new();
    let mut before = 0usize;
    for group in ranking.groups() {
        let sum: usize = (before + 1..=before + group.len()).sum();
        for &id in group {
            out.insert(id, sum as f64 / group.len() as f64);
        }
        before += group.len();
    }
    out
}

/// Textbook Pearson correlation, two-pass; `None` on zero variance.
pub fn pearson_oracle(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        None
    } else {
        Some(cov / (vx.sqrt() * vy.sqrt()))
    }
}

pub fn spearman_oracle(gold: &Ranking, predicted: &Ranking) -> Option<f64> {
    let g = fractional_ranks(gold);
    let p = fractional_ranks(predicted);
    let ids: Vec<ArgumentId> = g.keys().copied().collect();
    let x: Vec<f64> = ids.iter().map(|id| g[id]).collect();
    let y: Vec<f64> = ids.iter().map(|id| p[id]).collect();
    pearson_oracle(&x, &y)
}

/// Tau-b by enumerating every unordered pair of ids.
pub fn kendall_tau_b_oracle(gold: &Ranking, predicted: &Ranking) -> Option<f64> {
    let g = fractional_ranks(gold);
    let p = fractional_ranks(predicted);
    let ids: Vec<ArgumentId> = g.keys().copied().collect();
    let (mut c, mut d, mut tg, mut tp, mut pairs) = (0i64, 0i64, 0i64, 0i64, 0i64);
    for (i, a) in ids.iter().enumerate() {
        for b in &ids[i + 1..] {
            pairs += 1;
            let sg = (g[a] - g[b]).signum() as i64 * i64::from(g[a] != g[b]);
            let sp = (p[a] - p[b]).signum() as i64 * i64::from(p[a] != p[b]);
            if sg == 0 {
                tg += 1;
            }
            if sp == 0 {
                tp += 1;
            }
            match sg * sp {
                1 => c += 1,
                -1 => d += 1,
                _ => {}
            }
        }
    }
    let denom = ((pairs - tg) as f64 * (pairs - tp) as f64).sqrt();
    if pairs == 0 || denom == 0.0 {
        None
    } else {
        Some((c - d) as f64 / denom)
    }
}

/// Precision, recall, F1 by hash-set intersection.
pub fn prf_oracle(gold: &[Relation], predicted: &[Relation]) -> (f64, f64, f64) {
    let g: HashSet<&Relation> = gold.iter().collect();
    let p: HashSet<&Relation> = predicted.iter().collect();
    let hit = g.intersection(&p).count() as f64;
    let precision = if p.is_empty() { 0.0 } else { hit / p.len() as f64 };
    let recall = if g.is_empty() { 0.0 } else { hit / g.len() as f64 };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (precision, recall, f1)
}

/// All permutations of `items` (Heap's algorithm).
pub fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    fn heap<T: Clone>(k: usize, a: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        heap(k - 1, a, out);
        for i in 0..k - 1 {
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
            heap(k - 1, a, out);
        }
    }
    let mut a = items.to_vec();
    let mut out = Vec::new();
    heap(a.len(), &mut a, &mut out);
    out
}

/// Every relation's target is placed before its source.
pub fn claim_first(graph: &Graph, order: &[ArgumentId]) -> bool {
    let ids: BTreeSet<ArgumentId> = order.iter().copied().collect();
    if ids.len() != order.len() || ids != graph.id_set() {
        return false;
    }
    graph.relations().iter().all(|r| {
        let t = order.iter().position(|&x| x == r.target).unwrap();
        let s = order.iter().position(|&x| x == r.source).unwrap();
        t < s
    })
}

/// Number of claim-first orders, counted by brute force (small graphs only).
pub fn count_claim_first_orders(graph: &Graph, cap: usize) -> usize {
    permutations(&graph.chronological_order())
        .into_iter()
        .filter(|o| claim_first(graph, o))
        .take(cap)
        .count()
}

/// Build a graph from loose edge triples `(a, b, attack)` over ids `1..=n`:
/// the higher id acts on the lower one, self-pairs are dropped and the first
/// triple for a pair wins.
pub fn graph_from_triples(n: u32, triples: &[(u32, u32, bool)], weights: Option<&[f64]>) -> Graph {
    let arguments: Vec<Argument> = (1..=n)
        .map(|i| Argument::new(aid(i), format!("arg {i}"), (i - 1) as usize))
        .collect();
    let mut seen = BTreeSet::new();
    let mut relations = Vec::new();
    for &(a, b, attack) in triples {
        let (hi, lo) = (a.max(b) + 1, a.min(b) + 1);
        if hi == lo || hi > n || !seen.insert((hi, lo)) {
            continue;
        }
        let kind = if attack { RelationKind::Attack } else { RelationKind::Support };
        relations.push(Relation::new(aid(hi), aid(lo), kind));
    }
    let weights = match weights {
        Some(w) => BaseWeights::Explicit((1..=n).map(|i| (aid(i), w[(i - 1) as usize])).collect()),
        None => BaseWeights::Uniform,
    };
    DebateGraph::build("fuzz", arguments, relations, weights).expect("forward edges are acyclic")
}

/// Proptest strategy for acyclic graphs of up to `max_nodes` arguments with
/// edge density at most 0.4 and random base weights in `[0, 1]`.
pub fn arb_graph(max_nodes: u32) -> impl proptest::strategy::Strategy<Value = Graph> {
    use proptest::prelude::*;
    (1..=max_nodes)
        .prop_flat_map(|n| {
            let max_edges = (n * n.saturating_sub(1) / 2) as f64 * 0.4;
            let weight = prop_oneof![1 => Just(0.0), 1 => Just(1.0), 8 => 0.0..=1.0f64];
            (
                Just(n),
                proptest::collection::vec((0..n, 0..n, any::<bool>()), 0..=max_edges as usize),
                proptest::collection::vec(weight, n as usize),
            )
        })
        .prop_map(|(n, triples, weights)| graph_from_triples(n, &triples, Some(&weights)))
}

/// Proptest strategy for a permutation of `1..=n` as a strict ranking.
pub fn arb_strict_ranking(n: u32) -> impl proptest::strategy::Strategy<Value = Ranking> {
    use proptest::prelude::*;
    Just((1..=n).map(aid).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(Ranking::strict)
}

/// Proptest strategy for a ranking of `1..=n` with random tie groups.
pub fn arb_tied_ranking(n: u32) -> impl proptest::strategy::Strategy<Value = Ranking> {
    use proptest::prelude::*;
    (
        Just((1..=n).map(aid).collect::<Vec<_>>()).prop_shuffle(),
        proptest::collection::vec(any::<bool>(), n as usize),
    )
        .prop_map(|(ids, cuts)| {
            let mut groups: Vec<Vec<ArgumentId>> = Vec::new();
            for (id, cut) in ids.into_iter().zip(cuts) {
                match groups.last_mut() {
                    Some(g) if !cut => g.push(id),
                    _ => groups.push(vec![id]),
                }
            }
            Ranking::from_groups(groups)
        })
}
