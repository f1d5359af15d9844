use std::collections::HashMap;
use std::str::FromStr;
use std::time::Duration;

use quadrank_core::{acceptability, gold_ranking, EdgeSet, Graph, Ranking, Relation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{Backend, BackendError, Completion, CompletionRequest};
use crate::format::{render_adjacency, render_ranking};
use crate::strategy::GenerationParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MockKind {
    /// Answers with the gold adjacency list and gold ranking.
    GoldEcho,
    /// Gold adjacency list, reversed gold ranking.
    Reversal,
    /// Seeded perturbations of the gold answer, with occasional malformed
    /// replies.
    Noisy,
}

impl MockKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MockKind::GoldEcho => "gold-echo",
            MockKind::Reversal => "reversal",
            MockKind::Noisy => "noisy",
        }
    }
}

impl FromStr for MockKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gold-echo" => Ok(MockKind::GoldEcho),
            "reversal" => Ok(MockKind::Reversal),
            "noisy" => Ok(MockKind::Noisy),
            _ => Err(format!("unknown mock {s:?}; expected gold-echo, reversal or noisy")),
        }
    }
}

struct Answer {
    ranking: Ranking,
    edges: EdgeSet,
}

/// Offline backend that knows the gold answers of a set of graphs and
/// identifies the target by the request's graph name.
pub struct MockBackend {
    kind: MockKind,
    seed: u64,
    answers: HashMap<String, Answer>,
}

impl MockBackend {
    pub fn new<'a>(kind: MockKind, graphs: impl IntoIterator<Item = &'a Graph>, seed: u64) -> Self {
        let answers = graphs
            .into_iter()
            .map(|g| {
                let answer = Answer {
                    ranking: gold_ranking(&acceptability(g)),
                    edges: EdgeSet::from_graph(g),
                };
                (g.name().to_string(), answer)
            })
            .collect();
        MockBackend { kind, seed, answers }
    }

    fn rng(&self, request: &CompletionRequest) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(request.hash().as_bytes());
        let digest = h.finalize();
        ChaCha8Rng::seed_from_u64(u64::from_le_bytes(digest[..8].try_into().unwrap()))
    }

    fn noisy(&self, answer: &Answer, request: &CompletionRequest) -> String {
        let mut rng = self.rng(request);
        let malformed = if request.attempt == 0 { 0.12 } else { 0.25 };
        if rng.random_bool(malformed) {
            return "The opening argument seems strongest, while the later replies are weaker overall.".into();
        }
        let mut order = answer.ranking.ordered_ids().to_vec();
        if order.len() > 1 {
            for _ in 0..order.len() / 2 {
                let i = rng.random_range(0..order.len() - 1);
                order.swap(i, i + 1);
            }
        }
        let mut edges = EdgeSet::new();
        for e in answer.edges.iter() {
            match rng.random_range(0..10) {
                0..6 => {
                    edges.insert(*e);
                }
                6..8 => {
                    edges.insert(Relation::new(e.source, e.target, e.kind.flipped()));
                }
                _ => {}
            }
        }
        if order.len() > 1 && rng.random_bool(0.5) {
            let a = order[rng.random_range(0..order.len())];
            let b = order[rng.random_range(0..order.len())];
            if a != b {
                let kind = answer.edges.iter().next().map_or(quadrank_core::RelationKind::Attack, |e| e.kind);
                edges.insert(Relation::new(a.max(b), a.min(b), kind));
            }
        }
        format!(
            "Let me reconstruct the debate first.\n{}\nReasoning: weighing the replies against each other.\n{}",
            render_adjacency(&edges),
            render_ranking(&Ranking::strict(order))
        )
    }
}

impl Backend for MockBackend {
    fn model_id(&self) -> String {
        format!("mock:{}", self.kind.as_str())
    }

    fn send(&self, request: &CompletionRequest, _: &GenerationParams) -> Result<Completion, BackendError> {
        let answer = self
            .answers
            .get(&request.graph)
            .ok_or_else(|| BackendError::BadResponse(format!("mock has no graph named {:?}", request.graph)))?;
        let text = match self.kind {
            MockKind::GoldEcho => format!("{}\n{}", render_adjacency(&answer.edges), render_ranking(&answer.ranking)),
            MockKind::Reversal => format!(
                "{}\n{}",
                render_adjacency(&answer.edges),
                render_ranking(&answer.ranking.reversed())
            ),
            MockKind::Noisy => self.noisy(answer, request),
        };
        Ok(Completion {
            text,
            latency: Duration::ZERO,
            token_usage: None,
        })
    }
}
