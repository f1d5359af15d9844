//! Evaluation runs: prompt every (graph, order, repetition) cell, parse the
//! answers and score them against the QuAD gold standard.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use quadrank_core::metrics::MetricRecord;
use quadrank_core::{
    acceptability, edge_prf, flatten, flatten_chronological, gold_ranking, kendall_tau, sample_topological_orders,
    spearman_rho, ArgumentId, CorpusSplit, Dialogue, EdgeSet, Graph, OrderingLabel, Ranking,
};

use crate::backend::{complete, Backend, BackendError, Backoff, CompletionRequest};
use crate::format::{parse_adjacency, parse_ranking, FormatError};
use crate::prompt::{build_prompt, Exemplar, PromptError, TemplateSet};
use crate::report::{summarize, GraphEntry, OrderingMode, RunRecord, RunReport, REPORT_FORMAT};
use crate::strategy::{GenerationParams, ParamsError, PromptStrategy};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("the evaluation split is empty")]
    EmptyEvaluation,
    #[error("k must be at least 1")]
    ZeroOrders,
    /// A backend failure stopped the run; `partial` holds what finished.
    #[error("run aborted: {source}")]
    Backend {
        partial: Box<RunReport>,
        #[source]
        source: BackendError,
    },
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub templates: TemplateSet,
    /// Maximum concurrent requests.
    pub parallelism: usize,
    pub backoff: Backoff,
    /// Names of the corpora the split came from, for the report.
    pub corpus_ids: Vec<String>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            templates: TemplateSet::default(),
            parallelism: 4,
            backoff: Backoff::default(),
            corpus_ids: Vec::new(),
        }
    }
}

struct Target<'a> {
    graph: &'a Graph,
    ids: BTreeSet<ArgumentId>,
    gold: Ranking,
    gold_edges: EdgeSet,
    prompts: Vec<(String, String)>,
}

struct Cell {
    target: usize,
    order: usize,
    repetition: usize,
}

struct Parsed {
    ranking: Ranking,
    edges: Option<(EdgeSet, usize)>,
}

fn interpret(text: &str, ids: &BTreeSet<ArgumentId>, cot: bool) -> Result<Parsed, FormatError> {
    let edges = if cot {
        let adj = parse_adjacency(text, ids)?;
        Some((adj.edges, adj.rejections.total()))
    } else {
        None
    };
    Ok(Parsed {
        ranking: parse_ranking(text, ids)?,
        edges,
    })
}

fn reprompt(prompt: &str, error: &FormatError, cot: bool) -> String {
    let shape = if cot {
        "start with the adjacency list and end with the Ranking line"
    } else {
        "end with the Ranking line"
    };
    format!(
        "{prompt}\n\nYour previous answer could not be used ({error}). Answer again, name every argument exactly once and {shape}."
    )
}

/// Chronological evaluation of every graph in `split.evaluation`.
pub fn run_evaluation(
    split: &CorpusSplit,
    strategy: PromptStrategy,
    backend: &dyn Backend,
    params: &GenerationParams,
    seed: u64,
    options: &RunOptions,
) -> Result<RunReport, RunError> {
    run(split, strategy, backend, params, seed, OrderingMode::Chronological, options)
}

/// Evaluate each graph once per sampled claim-first order (up to `k`).
pub fn run_toposort_robustness(
    split: &CorpusSplit,
    strategy: PromptStrategy,
    backend: &dyn Backend,
    params: &GenerationParams,
    k: usize,
    seed: u64,
    options: &RunOptions,
) -> Result<RunReport, RunError> {
    if k == 0 {
        return Err(RunError::ZeroOrders);
    }
    run(split, strategy, backend, params, seed, OrderingMode::Toposort { k }, options)
}

fn dialogues(graph: &Graph, mode: OrderingMode, seed: u64) -> (Vec<Dialogue>, bool) {
    match mode {
        OrderingMode::Chronological => (vec![flatten_chronological(graph)], false),
        OrderingMode::Toposort { k } => {
            let sample = sample_topological_orders(graph, k, seed).expect("k >= 1");
            let ds = sample
                .orders
                .iter()
                .enumerate()
                .map(|(index, order)| {
                    flatten(graph, order, OrderingLabel::Toposort { seed, index }).expect("sampled orders are permutations")
                })
                .collect();
            (ds, sample.not_enough_orders)
        }
    }
}

fn run(
    split: &CorpusSplit,
    strategy: PromptStrategy,
    backend: &dyn Backend,
    params: &GenerationParams,
    seed: u64,
    mode: OrderingMode,
    options: &RunOptions,
) -> Result<RunReport, RunError> {
    params.validate()?;
    if split.evaluation.is_empty() {
        return Err(RunError::EmptyEvaluation);
    }
    let needed = strategy.exemplar_count();
    if split.exemplars.len() < needed {
        return Err(PromptError::ExemplarCountMismatch {
            strategy,
            expected: needed,
            got: split.exemplars.len(),
        }
        .into());
    }
    let exemplars: Vec<Exemplar> = split.exemplars[..needed].iter().map(Exemplar::from_graph).collect();

    // Every prompt is built before the first request so that template and
    // exemplar problems surface without any backend traffic.
    let mut targets = Vec::with_capacity(split.evaluation.len());
    let mut entries = Vec::with_capacity(split.evaluation.len());
    for graph in &split.evaluation {
        let (ds, not_enough_orders) = dialogues(graph, mode, seed);
        let prompts = ds
            .iter()
            .map(|d| Ok((d.ordering.to_string(), build_prompt(strategy, d, &exemplars, &options.templates)?)))
            .collect::<Result<Vec<_>, PromptError>>()?;
        entries.push(GraphEntry {
            name: graph.name().to_string(),
            arguments: graph.len(),
            relations: graph.relations().len(),
            orders: prompts.len(),
            not_enough_orders,
        });
        targets.push(Target {
            graph,
            ids: graph.id_set(),
            gold: gold_ranking(&acceptability(graph)),
            gold_edges: EdgeSet::from_graph(graph),
            prompts,
        });
    }
    let cells: Vec<Cell> = targets
        .iter()
        .enumerate()
        .flat_map(|(t, target)| {
            (0..target.prompts.len())
                .flat_map(move |order| (0..params.repetitions).map(move |repetition| Cell { target: t, order, repetition }))
        })
        .collect();

    let results: Vec<Mutex<Option<Result<RunRecord, BackendError>>>> = cells.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let workers = options.parallelism.clamp(1, cells.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if abort.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(cell) = cells.get(i) else { break };
                let outcome = run_cell(&targets[cell.target], cell, strategy, backend, params, options.backoff);
                if outcome.is_err() {
                    abort.store(true, Ordering::SeqCst);
                }
                *results[i].lock().unwrap() = Some(outcome);
            });
        }
    });

    let mut records = Vec::with_capacity(cells.len());
    let mut failure = None;
    for slot in results {
        match slot.into_inner().unwrap() {
            Some(Ok(r)) => records.push(r),
            Some(Err(e)) => {
                failure.get_or_insert(e);
            }
            None => {}
        }
    }
    let mut report = RunReport {
        format: REPORT_FORMAT.to_string(),
        created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        corpus_ids: options.corpus_ids.clone(),
        strategy,
        model_id: backend.model_id(),
        seed,
        params: params.clone(),
        template_sha256: options.templates.sha256(strategy),
        exemplars: exemplars.iter().map(|e| e.name.clone()).collect(),
        ordering: mode,
        graphs: entries,
        records,
        ..RunReport::default()
    };
    summarize(&mut report);
    match failure {
        None => Ok(report),
        Some(source) => {
            report.incomplete = true;
            report.error = Some(source.to_string());
            Err(RunError::Backend {
                partial: Box::new(report),
                source,
            })
        }
    }
}

fn run_cell(
    target: &Target<'_>,
    cell: &Cell,
    strategy: PromptStrategy,
    backend: &dyn Backend,
    params: &GenerationParams,
    backoff: Backoff,
) -> Result<RunRecord, BackendError> {
    let (label, prompt) = &target.prompts[cell.order];
    let cot = strategy.is_cot();
    let mut request = CompletionRequest::new(prompt.clone(), params, cell.repetition);
    request.graph = target.graph.name().to_string();
    request.variant = label.clone();

    let mut record = RunRecord {
        graph: target.graph.name().to_string(),
        ordering: label.clone(),
        order_index: cell.order,
        repetition: cell.repetition,
        attempts: 1,
        ..RunRecord::default()
    };
    let first = complete(backend, &request, params, backoff)?;
    let parsed = match interpret(&first.text, &target.ids, cot) {
        Ok(p) => Ok(p),
        Err(e) => {
            log::info!("{} rep {}: {e}; re-prompting", record.graph, record.repetition);
            request.attempt = 1;
            request.prompt = reprompt(prompt, &e, cot);
            record.attempts = 2;
            let second = complete(backend, &request, params, backoff)?;
            interpret(&second.text, &target.ids, cot)
        }
    };
    record.request_hash = request.hash();
    match parsed {
        Ok(p) => {
            let mut metrics = MetricRecord {
                rho: spearman_rho(&target.gold, &p.ranking).ok().flatten(),
                tau: kendall_tau(&target.gold, &p.ranking).ok().flatten(),
                ..MetricRecord::default()
            };
            if let Some((edges, rejected)) = p.edges {
                metrics = metrics.with_prf(edge_prf(&target.gold_edges, &edges));
                record.rejected_edges = rejected;
                record.predicted_edges = Some(edges);
            }
            record.metrics = metrics;
            record.predicted_ranking = Some(p.ranking.groups().to_vec());
        }
        Err(e) => {
            record.format_violation = true;
            record.violation = Some(e.to_string());
        }
    }
    Ok(record)
}
