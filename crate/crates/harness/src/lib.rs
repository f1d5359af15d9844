//! Prompting, model backends and evaluation runs for ranking debate
//! arguments with language models.

pub mod format;
pub mod prompt;
pub mod strategy;

pub use format::{parse_adjacency, parse_ranking, render_adjacency, render_ranking, FormatError, ParsedAdjacency};
pub use prompt::{build_prompt, Exemplar, PromptError, TemplateSet};
pub use strategy::{GenerationParams, PromptStrategy};
pub mod backend;

pub use backend::{complete, Backend, BackendError, Backoff, CompletionRequest, HttpBackend, MockBackend, MockKind, RecordingBackend, ReplayBackend};
pub mod report;
pub mod run;

pub use report::{render_summary, OrderingMode, RunRecord, RunReport};
pub use run::{run_evaluation, run_toposort_robustness, RunError, RunOptions};
pub mod bias;

pub use bias::{bias_table, BiasTable};
