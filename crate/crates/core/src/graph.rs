//! Quantitative bipolar argumentation frameworks.
//!
//! A [`DebateGraph`] holds arguments, attack and support relations between
//! them, and one base weight per argument. Relations point from the argument
//! that acts to the argument acted upon: `(b, a, Attack)` means `b` attacks
//! `a`. Graphs are validated once at construction and immutable afterwards.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Weight;

/// Positive integer naming an argument within one graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct ArgumentId(u32);

impl ArgumentId {
    /// Returns `None` for zero.
    pub const fn new(value: u32) -> Option<Self> {
        if value == 0 {
            None
        } else {
            Some(ArgumentId(value))
        }
    }

    pub const fn get(self) -> u32 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("argument ids start at 1")]
pub struct ZeroArgumentId;

impl TryFrom<u32> for ArgumentId {
    type Error = ZeroArgumentId;

    fn try_from(value: u32) -> Result<Self, Self::Error> {
        ArgumentId::new(value).ok_or(ZeroArgumentId)
    }
}

impl From<ArgumentId> for u32 {
    fn from(id: ArgumentId) -> u32 {
        id.0
    }
}

impl FromStr for ArgumentId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let value: u32 = s
            .trim()
            .parse()
            .map_err(|_| format!("not an argument id: {s:?}"))?;
        ArgumentId::new(value).ok_or_else(|| "argument ids start at 1".to_string())
    }
}

impl fmt::Display for ArgumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Shorthand for tests and fixtures. Panics on zero.
pub fn aid(value: u32) -> ArgumentId {
    ArgumentId::new(value).expect("argument id must be positive")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Argument {
    pub id: ArgumentId,
    pub text: String,
    /// 0-based position in the original debate order.
    pub chronological_index: usize,
}

impl Argument {
    pub fn new(id: ArgumentId, text: impl Into<String>, chronological_index: usize) -> Self {
        Argument {
            id,
            text: text.into(),
            chronological_index,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationKind {
    Attack,
    Support,
}

impl RelationKind {
    pub fn flipped(self) -> Self {
        match self {
            RelationKind::Attack => RelationKind::Support,
            RelationKind::Support => RelationKind::Attack,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::Attack => "attack",
            RelationKind::Support => "support",
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `source` attacks or supports `target`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Relation {
    pub source: ArgumentId,
    pub target: ArgumentId,
    pub kind: RelationKind,
}

impl Relation {
    pub fn new(source: ArgumentId, target: ArgumentId, kind: RelationKind) -> Self {
        Relation {
            source,
            target,
            kind,
        }
    }

    pub fn attack(source: u32, target: u32) -> Self {
        Relation::new(aid(source), aid(target), RelationKind::Attack)
    }

    pub fn support(source: u32, target: u32) -> Self {
        Relation::new(aid(source), aid(target), RelationKind::Support)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -{}-> {}", self.source, self.kind, self.target)
    }
}

/// Base weights handed to [`DebateGraph::build`].
#[derive(Clone, Debug, Default)]
pub enum BaseWeights<W> {
    /// Every argument starts at 0.5.
    #[default]
    Uniform,
    Explicit(BTreeMap<ArgumentId, W>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("duplicate argument id {0}")]
    DuplicateId(ArgumentId),
    #[error("argument {0} has empty text")]
    EmptyText(ArgumentId),
    #[error("chronological indices must be a permutation of 0..{len}; argument {id} has {index}")]
    InvalidChronology {
        id: ArgumentId,
        index: usize,
        len: usize,
    },
    #[error("relation {0} references an argument that does not exist")]
    DanglingEndpoint(Relation),
    #[error("argument {0} cannot relate to itself")]
    SelfRelation(ArgumentId),
    #[error("relation {0} is listed twice")]
    DuplicateRelation(Relation),
    /// Same (source, target) pair labelled both attack and support.
    #[error("arguments {0} and {1} are related by both attack and support")]
    ConflictingRelation(ArgumentId, ArgumentId),
    #[error("cycle detected: {}", render_cycle(.0))]
    CycleDetected(Vec<ArgumentId>),
    #[error("base weight of argument {id} is {value}, outside [0, 1]")]
    WeightOutOfRange { id: ArgumentId, value: f64 },
    #[error("argument {0} has no base weight")]
    MissingWeight(ArgumentId),
    #[error("base weight given for unknown argument {0}")]
    UnknownWeight(ArgumentId),
    #[error("unknown argument {0}")]
    UnknownArgument(ArgumentId),
}

fn render_cycle(cycle: &[ArgumentId]) -> String {
    let mut parts: Vec<String> = cycle.iter().map(ToString::to_string).collect();
    if let Some(first) = cycle.first() {
        parts.push(first.to_string());
    }
    parts.join(" -> ")
}

/// Validated, acyclic bipolar argumentation framework.
#[derive(Clone, Debug, PartialEq)]
pub struct DebateGraph<W = f64> {
    name: String,
    /// Sorted by chronological index.
    arguments: Vec<Argument>,
    index: BTreeMap<ArgumentId, usize>,
    relations: Vec<Relation>,
    weights: Vec<W>,
    attackers: Vec<Vec<usize>>,
    supporters: Vec<Vec<usize>>,
    out_degree: Vec<usize>,
}

impl<W: Weight> DebateGraph<W> {
    pub fn build(
        name: impl Into<String>,
        arguments: Vec<Argument>,
        relations: Vec<Relation>,
        weights: BaseWeights<W>,
    ) -> Result<Self, GraphError> {
        let mut arguments = arguments;
        let len = arguments.len();
        let mut seen_chrono = vec![false; len];
        for arg in &arguments {
            if arg.text.trim().is_empty() {
                return Err(GraphError::EmptyText(arg.id));
            }
            match seen_chrono.get_mut(arg.chronological_index) {
                Some(slot) if !*slot => *slot = true,
                _ => {
                    return Err(GraphError::InvalidChronology {
                        id: arg.id,
                        index: arg.chronological_index,
                        len,
                    })
                }
            }
        }
        arguments.sort_by_key(|a| a.chronological_index);

        let mut index = BTreeMap::new();
        for (i, arg) in arguments.iter().enumerate() {
            if index.insert(arg.id, i).is_some() {
                return Err(GraphError::DuplicateId(arg.id));
            }
        }

        let mut attackers = vec![Vec::new(); len];
        let mut supporters = vec![Vec::new(); len];
        let mut out_degree = vec![0; len];
        let mut pairs: BTreeMap<(ArgumentId, ArgumentId), RelationKind> = BTreeMap::new();
        for rel in &relations {
            if rel.source == rel.target {
                return Err(GraphError::SelfRelation(rel.source));
            }
            let (Some(&s), Some(&t)) = (index.get(&rel.source), index.get(&rel.target)) else {
                return Err(GraphError::DanglingEndpoint(*rel));
            };
            if let Some(existing) = pairs.insert((rel.source, rel.target), rel.kind) {
                return Err(if existing == rel.kind {
                    GraphError::DuplicateRelation(*rel)
                } else {
                    GraphError::ConflictingRelation(rel.source, rel.target)
                });
            }
            match rel.kind {
                RelationKind::Attack => attackers[t].push(s),
                RelationKind::Support => supporters[t].push(s),
            }
            out_degree[s] += 1;
        }
        for list in attackers.iter_mut().chain(supporters.iter_mut()) {
            list.sort_by_key(|&i| arguments[i].id);
        }

        let weights = match weights {
            BaseWeights::Uniform => vec![W::half(); len],
            BaseWeights::Explicit(mut map) => {
                let mut out = Vec::with_capacity(len);
                for arg in &arguments {
                    let w = map.remove(&arg.id).ok_or(GraphError::MissingWeight(arg.id))?;
                    if !w.in_unit_interval() {
                        return Err(GraphError::WeightOutOfRange {
                            id: arg.id,
                            value: w.as_f64(),
                        });
                    }
                    out.push(w);
                }
                if let Some((&extra, _)) = map.iter().next() {
                    return Err(GraphError::UnknownWeight(extra));
                }
                out
            }
        };

        let graph = DebateGraph {
            name: name.into(),
            arguments,
            index,
            relations,
            weights,
            attackers,
            supporters,
            out_degree,
        };
        if let Some(cycle) = graph.find_cycle() {
            return Err(GraphError::CycleDetected(cycle));
        }
        Ok(graph)
    }

    pub fn base_weight(&self, id: ArgumentId) -> Option<&W> {
        self.index.get(&id).map(|&i| &self.weights[i])
    }

    /// Base weights keyed by id.
    pub fn base_weights(&self) -> BTreeMap<ArgumentId, W> {
        self.arguments
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| (a.id, w.clone()))
            .collect()
    }

    /// Same structure with weights converted through `f64`.
    pub fn convert_weights<V: Weight>(&self) -> Option<DebateGraph<V>> {
        let weights = self
            .weights
            .iter()
            .map(|w| V::from_f64(w.as_f64()))
            .collect::<Option<Vec<_>>>()?;
        Some(DebateGraph {
            name: self.name.clone(),
            arguments: self.arguments.clone(),
            index: self.index.clone(),
            relations: self.relations.clone(),
            weights,
            attackers: self.attackers.clone(),
            supporters: self.supporters.clone(),
            out_degree: self.out_degree.clone(),
        })
    }

    pub(crate) fn weight_at(&self, i: usize) -> &W {
        &self.weights[i]
    }
}

impl<W> DebateGraph<W> {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.arguments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arguments.is_empty()
    }

    /// Arguments in chronological order.
    pub fn arguments(&self) -> &[Argument] {
        &self.arguments
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn argument(&self, id: ArgumentId) -> Option<&Argument> {
        self.index.get(&id).map(|&i| &self.arguments[i])
    }

    pub fn contains(&self, id: ArgumentId) -> bool {
        self.index.contains_key(&id)
    }

    /// Argument ids in chronological order.
    pub fn chronological_order(&self) -> Vec<ArgumentId> {
        self.arguments.iter().map(|a| a.id).collect()
    }

    pub fn id_set(&self) -> BTreeSet<ArgumentId> {
        self.index.keys().copied().collect()
    }

    fn position(&self, id: ArgumentId) -> Result<usize, GraphError> {
        self.index
            .get(&id)
            .copied()
            .ok_or(GraphError::UnknownArgument(id))
    }

    /// Sources of attack relations targeting `id`.
    pub fn attackers(&self, id: ArgumentId) -> Result<BTreeSet<ArgumentId>, GraphError> {
        let i = self.position(id)?;
        Ok(self.attackers[i].iter().map(|&j| self.arguments[j].id).collect())
    }

    /// Sources of support relations targeting `id`.
    pub fn supporters(&self, id: ArgumentId) -> Result<BTreeSet<ArgumentId>, GraphError> {
        let i = self.position(id)?;
        Ok(self.supporters[i].iter().map(|&j| self.arguments[j].id).collect())
    }

    pub fn in_degree(&self, id: ArgumentId) -> Result<usize, GraphError> {
        let i = self.position(id)?;
        Ok(self.attackers[i].len() + self.supporters[i].len())
    }

    pub fn out_degree(&self, id: ArgumentId) -> Result<usize, GraphError> {
        Ok(self.out_degree[self.position(id)?])
    }

    pub fn count_kind(&self, kind: RelationKind) -> usize {
        self.relations.iter().filter(|r| r.kind == kind).count()
    }

    pub(crate) fn attacker_indices(&self, i: usize) -> &[usize] {
        &self.attackers[i]
    }

    pub(crate) fn supporter_indices(&self, i: usize) -> &[usize] {
        &self.supporters[i]
    }

    /// Order in which every relation's source precedes its target, i.e. the
    /// order in which acceptability degrees can be evaluated. Among available
    /// arguments the smallest id goes first, so the result is deterministic.
    pub fn topological_order(&self) -> Vec<ArgumentId> {
        self.evaluation_order()
            .into_iter()
            .map(|i| self.arguments[i].id)
            .collect()
    }

    pub(crate) fn evaluation_order(&self) -> Vec<usize> {
        let n = self.len();
        let mut pending: Vec<usize> = (0..n)
            .map(|i| self.attackers[i].len() + self.supporters[i].len())
            .collect();
        let mut targets = vec![Vec::new(); n];
        for rel in &self.relations {
            targets[self.index[&rel.source]].push(self.index[&rel.target]);
        }
        let mut ready: BinaryHeap<Reverse<(ArgumentId, usize)>> = (0..n)
            .filter(|&i| pending[i] == 0)
            .map(|i| Reverse((self.arguments[i].id, i)))
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse((_, i))) = ready.pop() {
            order.push(i);
            for &t in &targets[i] {
                pending[t] -= 1;
                if pending[t] == 0 {
                    ready.push(Reverse((self.arguments[t].id, t)));
                }
            }
        }
        debug_assert_eq!(order.len(), n, "graph invariant: acyclic");
        order
    }

    /// One directed cycle along source -> target edges, if any.
    fn find_cycle(&self) -> Option<Vec<ArgumentId>> {
        const WHITE: u8 = 0;
        const GREY: u8 = 1;
        const BLACK: u8 = 2;
        let n = self.len();
        let mut targets = vec![Vec::new(); n];
        for rel in &self.relations {
            targets[self.index[&rel.source]].push(self.index[&rel.target]);
        }
        let mut colour = vec![WHITE; n];
        let mut parent = vec![usize::MAX; n];
        for root in 0..n {
            if colour[root] != WHITE {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            colour[root] = GREY;
            while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                if let Some(&succ) = targets[node].get(*next) {
                    *next += 1;
                    match colour[succ] {
                        WHITE => {
                            colour[succ] = GREY;
                            parent[succ] = node;
                            stack.push((succ, 0));
                        }
                        GREY => {
                            let mut cycle = vec![self.arguments[succ].id];
                            let mut cur = node;
                            while cur != succ {
                                cycle.push(self.arguments[cur].id);
                                cur = parent[cur];
                            }
                            cycle[1..].reverse();
                            return Some(cycle);
                        }
                        _ => {}
                    }
                } else {
                    colour[node] = BLACK;
                    stack.pop();
                }
            }
        }
        None
    }
}

/// Free-function form of [`DebateGraph::build`].
pub fn build_graph<W: Weight>(
    name: impl Into<String>,
    arguments: Vec<Argument>,
    relations: Vec<Relation>,
    weights: BaseWeights<W>,
) -> Result<DebateGraph<W>, GraphError> {
    DebateGraph::build(name, arguments, relations, weights)
}

/// Number of unordered argument pairs, summed over graphs.
pub fn pair_count<'a, W: 'a>(graphs: impl IntoIterator<Item = &'a DebateGraph<W>>) -> u64 {
    graphs
        .into_iter()
        .map(|g| {
            let n = g.len() as u64;
            n * n.saturating_sub(1) / 2
        })
        .sum()
}

/// Arguments numbered `1..=n` with placeholder texts, chronological by id.
pub fn numbered_arguments(n: u32) -> Vec<Argument> {
    (1..=n)
        .map(|i| Argument::new(aid(i), format!("argument {i}"), (i - 1) as usize))
        .collect()
}
