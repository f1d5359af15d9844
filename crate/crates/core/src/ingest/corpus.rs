//! Corpus-level statistics and the exemplar/evaluation split.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::graph::{DebateGraph, RelationKind};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub graph_count: usize,
    pub node_count: usize,
    pub edge_count: usize,
    pub support_edges: usize,
    pub attack_edges: usize,
    pub per_graph_nodes: BTreeMap<String, usize>,
    pub mean_in_degree: f64,
    pub mean_out_degree: f64,
    /// Population standard deviations over all nodes of the corpus.
    pub std_in_degree: f64,
    pub std_out_degree: f64,
    pub max_in_degree: usize,
    pub max_out_degree: usize,
    /// Graphs with at least one argument of in-degree two or more.
    pub graphs_with_fan_in: usize,
}

fn mean_std(sum: u64, sum_sq: u64, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 0.0);
    }
    let n = n as f64;
    let mean = sum as f64 / n;
    let var = (sum_sq as f64 / n - mean * mean).max(0.0);
    (mean, var.sqrt())
}

/// Counts and degree statistics. Sums are accumulated as integers so the
/// result does not depend on the order of `graphs`.
pub fn corpus_stats<W>(graphs: &[DebateGraph<W>]) -> CorpusStats {
    let mut s = CorpusStats {
        graph_count: graphs.len(),
        ..CorpusStats::default()
    };
    let (mut in_sq, mut out_sq) = (0u64, 0u64);
    for g in graphs {
        s.node_count += g.len();
        s.edge_count += g.relations().len();
        s.support_edges += g.count_kind(RelationKind::Support);
        s.attack_edges += g.count_kind(RelationKind::Attack);
        *s.per_graph_nodes.entry(g.name().to_string()).or_default() += g.len();
        let mut fan_in = false;
        for a in g.arguments() {
            let din = g.in_degree(a.id).expect("own argument");
            let dout = g.out_degree(a.id).expect("own argument");
            in_sq += (din * din) as u64;
            out_sq += (dout * dout) as u64;
            s.max_in_degree = s.max_in_degree.max(din);
            s.max_out_degree = s.max_out_degree.max(dout);
            fan_in |= din >= 2;
        }
        s.graphs_with_fan_in += usize::from(fan_in);
    }
    let edges = s.edge_count as u64;
    (s.mean_in_degree, s.std_in_degree) = mean_std(edges, in_sq, s.node_count);
    (s.mean_out_degree, s.std_out_degree) = mean_std(edges, out_sq, s.node_count);
    s
}

#[derive(Clone, Debug)]
pub struct CorpusSplit<W = f64> {
    /// In-context exemplars, in the order requested.
    pub exemplars: Vec<DebateGraph<W>>,
    /// Remaining graphs, in corpus order.
    pub evaluation: Vec<DebateGraph<W>>,
}

pub fn split_corpus<W, S: AsRef<str>>(
    graphs: Vec<DebateGraph<W>>,
    exemplar_names: &[S],
) -> Result<CorpusSplit<W>, IngestError> {
    let mut wanted = BTreeSet::new();
    for name in exemplar_names {
        if !wanted.insert(name.as_ref()) {
            return Err(IngestError::DuplicateExemplar(name.as_ref().to_string()));
        }
    }
    let mut picked: BTreeMap<&str, DebateGraph<W>> = BTreeMap::new();
    let mut evaluation = Vec::new();
    for g in graphs {
        match wanted.get(g.name()) {
            Some(&name) if !picked.contains_key(name) => {
                picked.insert(name, g);
            }
            _ => evaluation.push(g),
        }
    }
    let exemplars = exemplar_names
        .iter()
        .map(|n| {
            picked
                .remove(n.as_ref())
                .ok_or_else(|| IngestError::UnknownGraphName(n.as_ref().to_string()))
        })
        .collect::<Result<_, _>>()?;
    Ok(CorpusSplit {
        exemplars,
        evaluation,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExemplarRole {
    Balanced,
    AttackHeavy,
    SupportHeavy,
}

/// Pick three exemplar debates: the one whose attack fraction is closest to
/// one half, the most attack-heavy and the most support-heavy, in that
/// order. Graphs without relations are skipped; ties go to the earlier
/// graph; a graph fills at most one role. `None` if fewer than three graphs
/// have relations.
pub fn select_exemplars<W>(graphs: &[DebateGraph<W>]) -> Option<Vec<(ExemplarRole, String)>> {
    let candidates: Vec<(usize, f64)> = graphs
        .iter()
        .enumerate()
        .filter(|(_, g)| !g.relations().is_empty())
        .map(|(i, g)| {
            let attacks = g.count_kind(RelationKind::Attack) as f64;
            (i, attacks / g.relations().len() as f64)
        })
        .collect();
    if candidates.len() < 3 {
        return None;
    }
    let mut taken = BTreeSet::new();
    let mut pick = |role: ExemplarRole, score: &dyn Fn(f64) -> f64| {
        let (i, _) = candidates
            .iter()
            .filter(|(i, _)| !taken.contains(i))
            .fold(None::<(usize, f64)>, |best, &(i, frac)| {
                let s = score(frac);
                match best {
                    Some((_, b)) if b <= s => best,
                    _ => Some((i, s)),
                }
            })
            .expect("at least three candidates");
        taken.insert(i);
        (role, graphs[i].name().to_string())
    };
    Some(vec![
        pick(ExemplarRole::Balanced, &|f| (f - 0.5).abs()),
        pick(ExemplarRole::AttackHeavy, &|f| -f),
        pick(ExemplarRole::SupportHeavy, &|f| f),
    ])
}
