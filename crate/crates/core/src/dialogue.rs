//! Debate graphs rendered as plain numbered dialogues, and re-ordered
//! variants that keep every reply after the argument it answers.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ArgumentId, DebateGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DialogueError {
    #[error("order is not a permutation of the graph's arguments")]
    NotAPermutation,
    #[error("number of orders must be positive")]
    ZeroOrders,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OrderingLabel {
    Chronological,
    Toposort { seed: u64, index: usize },
}

impl fmt::Display for OrderingLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderingLabel::Chronological => f.write_str("chronological"),
            OrderingLabel::Toposort { seed, index } => write!(f, "toposort:{seed}:{index}"),
        }
    }
}

/// One line per argument, `Argument <id>: <text>`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dialogue {
    pub graph_name: String,
    pub lines: Vec<(ArgumentId, String)>,
    pub ordering: OrderingLabel,
}

impl Dialogue {
    pub fn order(&self) -> Vec<ArgumentId> {
        self.lines.iter().map(|(id, _)| *id).collect()
    }

    /// The exact bytes embedded in prompts: lines joined by `\n`, with a
    /// trailing newline.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for (_, line) in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

pub fn render_line(id: ArgumentId, text: &str) -> String {
    let flat = text.split_whitespace().collect::<Vec<_>>().join(" ");
    format!("Argument {id}: {flat}")
}

/// Render `graph` in the given order. Relations are not rendered.
pub fn flatten<W>(
    graph: &DebateGraph<W>,
    order: &[ArgumentId],
    ordering: OrderingLabel,
) -> Result<Dialogue, DialogueError> {
    if !is_permutation(graph, order) {
        return Err(DialogueError::NotAPermutation);
    }
    let lines = order
        .iter()
        .map(|&id| {
            let arg = graph.argument(id).expect("checked above");
            (id, render_line(id, &arg.text))
        })
        .collect();
    Ok(Dialogue {
        graph_name: graph.name().to_string(),
        lines,
        ordering,
    })
}

pub fn flatten_chronological<W>(graph: &DebateGraph<W>) -> Dialogue {
    flatten(graph, &graph.chronological_order(), OrderingLabel::Chronological)
        .expect("chronological order is a permutation")
}

fn is_permutation<W>(graph: &DebateGraph<W>, order: &[ArgumentId]) -> bool {
    let set: BTreeSet<ArgumentId> = order.iter().copied().collect();
    set.len() == order.len() && set == graph.id_set()
}

/// Which endpoint of a relation must come first in a sampled order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderConstraint {
    /// The argument being answered precedes the reply (target before source).
    #[default]
    ClaimFirst,
    /// Source before target; for sensitivity checks.
    ReplyFirst,
}

/// `true` iff every relation respects `constraint` under `order`.
pub fn satisfies_constraint<W>(
    graph: &DebateGraph<W>,
    order: &[ArgumentId],
    constraint: OrderConstraint,
) -> bool {
    if !is_permutation(graph, order) {
        return false;
    }
    let pos: std::collections::HashMap<ArgumentId, usize> =
        order.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    graph.relations().iter().all(|r| {
        let (first, second) = match constraint {
            OrderConstraint::ClaimFirst => (r.target, r.source),
            OrderConstraint::ReplyFirst => (r.source, r.target),
        };
        pos[&first] < pos[&second]
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderSample {
    pub orders: Vec<Vec<ArgumentId>>,
    pub seed: u64,
    /// Fewer than the requested number of distinct orders exist; `orders`
    /// then holds all of them.
    pub not_enough_orders: bool,
}

/// Dependency structure in the sampling direction, by chronological index.
struct Precedence {
    ids: Vec<ArgumentId>,
    successors: Vec<Vec<usize>>,
    indegree: Vec<usize>,
}

impl Precedence {
    fn new<W>(graph: &DebateGraph<W>, constraint: OrderConstraint) -> Self {
        let ids = graph.chronological_order();
        let pos: std::collections::HashMap<ArgumentId, usize> =
            ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut successors = vec![Vec::new(); ids.len()];
        let mut indegree = vec![0; ids.len()];
        for r in graph.relations() {
            let (first, second) = match constraint {
                OrderConstraint::ClaimFirst => (r.target, r.source),
                OrderConstraint::ReplyFirst => (r.source, r.target),
            };
            successors[pos[&first]].push(pos[&second]);
            indegree[pos[&second]] += 1;
        }
        Precedence {
            ids,
            successors,
            indegree,
        }
    }

    /// Kahn's algorithm choosing uniformly among available arguments.
    fn random_order(&self, rng: &mut impl Rng) -> Vec<ArgumentId> {
        let mut indegree = self.indegree.clone();
        let mut available: Vec<usize> = (0..self.ids.len()).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(self.ids.len());
        while !available.is_empty() {
            let pick = available.swap_remove(rng.random_range(0..available.len()));
            order.push(self.ids[pick]);
            for &s in &self.successors[pick] {
                indegree[s] -= 1;
                if indegree[s] == 0 {
                    available.push(s);
                }
            }
            // Keep the candidate list in a canonical order so the draw
            // depends only on the seed.
            available.sort_unstable();
        }
        order
    }

    /// Up to `limit` valid orders by depth-first enumeration.
    fn enumerate(&self, limit: usize) -> Vec<Vec<ArgumentId>> {
        fn go(
            p: &Precedence,
            indegree: &mut [usize],
            placed: &mut Vec<usize>,
            used: &mut [bool],
            out: &mut Vec<Vec<ArgumentId>>,
            limit: usize,
        ) {
            if out.len() >= limit {
                return;
            }
            if placed.len() == p.ids.len() {
                out.push(placed.iter().map(|&i| p.ids[i]).collect());
                return;
            }
            for i in 0..p.ids.len() {
                if used[i] || indegree[i] != 0 {
                    continue;
                }
                used[i] = true;
                placed.push(i);
                for &s in &p.successors[i] {
                    indegree[s] -= 1;
                }
                go(p, indegree, placed, used, out, limit);
                for &s in &p.successors[i] {
                    indegree[s] += 1;
                }
                placed.pop();
                used[i] = false;
                if out.len() >= limit {
                    return;
                }
            }
        }
        let mut out = Vec::new();
        let mut indegree = self.indegree.clone();
        let mut used = vec![false; self.ids.len()];
        go(self, &mut indegree, &mut Vec::new(), &mut used, &mut out, limit);
        out
    }
}

/// Sample `k` distinct orders of `graph` in which every reply follows the
/// argument it answers.
///
/// Orders are drawn by randomized available-node selection from a
/// ChaCha8 generator seeded with `seed`; duplicates are rejected for up to
/// `100 * k` draws. When the graph has fewer than `k` valid orders, all of
/// them are returned and `not_enough_orders` is set.
pub fn sample_topological_orders<W>(
    graph: &DebateGraph<W>,
    k: usize,
    seed: u64,
) -> Result<OrderSample, DialogueError> {
    sample_topological_orders_with(graph, k, seed, OrderConstraint::ClaimFirst)
}

pub fn sample_topological_orders_with<W>(
    graph: &DebateGraph<W>,
    k: usize,
    seed: u64,
    constraint: OrderConstraint,
) -> Result<OrderSample, DialogueError> {
    if k == 0 {
        return Err(DialogueError::ZeroOrders);
    }
    let prec = Precedence::new(graph, constraint);
    let exhaustive = prec.enumerate(k);
    if exhaustive.len() < k {
        return Ok(OrderSample {
            orders: exhaustive,
            seed,
            not_enough_orders: true,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut orders = Vec::with_capacity(k);
    for _ in 0..100 * k {
        if orders.len() == k {
            break;
        }
        let order = prec.random_order(&mut rng);
        if seen.insert(order.clone()) {
            orders.push(order);
        }
    }
    if orders.len() < k {
        // Rejection ran out of draws; top up deterministically.
        for order in prec.enumerate(k + orders.len()) {
            if orders.len() == k {
                break;
            }
            if seen.insert(order.clone()) {
                orders.push(order);
            }
        }
    }
    Ok(OrderSample {
        orders,
        seed,
        not_enough_orders: false,
    })
}

/// Dialogues for each order in a sample.
pub fn flatten_sample<W>(graph: &DebateGraph<W>, sample: &OrderSample) -> Vec<Dialogue> {
    sample
        .orders
        .iter()
        .enumerate()
        .map(|(index, order)| {
            flatten(
                graph,
                order,
                OrderingLabel::Toposort {
                    seed: sample.seed,
                    index,
                },
            )
            .expect("sampled orders are permutations")
        })
        .collect()
}
