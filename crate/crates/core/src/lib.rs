//! QuAD acceptability degrees over bipolar argument graphs, debate corpus
//! ingestion, dialogue flattening and ranking-agreement metrics.
//!
//! The graph model and the QuAD evaluator are generic over the scalar type
//! ([`Weight`]); rank metrics are generic over [`num_traits::Float`]. The
//! aliases below fix the common choices.

pub mod dialogue;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod quad;
pub mod scalar;

pub use graph::{
    aid, build_graph, pair_count, Argument, ArgumentId, BaseWeights, DebateGraph, GraphError,
    Relation, RelationKind,
};
pub use quad::{
    acceptability, aggregate_attack, aggregate_support, gold_ranking, QuadError, Ranking, ScoreMap,
};
pub use dialogue::{
    flatten, flatten_chronological, sample_topological_orders, Dialogue, DialogueError,
    OrderSample, OrderingLabel,
};
pub use ingest::{corpus_stats, load_corpus, parse_node_xml, split_corpus, CorpusSplit, CorpusStats, IngestError};
pub use metrics::{
    edge_prf, kendall_tau, macro_average, quartile_correlations, quartile_split, spearman_rho,
    EdgeSet, MetricError, MetricRecord, PrfScore, QuartileBuckets, QuartileKey,
};
pub use scalar::Weight;

/// Graph with double-precision weights, the default everywhere.
pub type Graph = DebateGraph<f64>;
/// Graph with exact rational weights.
pub type ExactGraph = DebateGraph<num_rational::Rational64>;
pub type Scores = ScoreMap<f64>;
pub type ExactScores = ScoreMap<num_rational::Rational64>;
pub type Prf = PrfScore<f64>;
