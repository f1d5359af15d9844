//! Run reports, their aggregates and the CSV/table surfaces.

use std::collections::BTreeMap;
use std::io::Write;

use quadrank_core::metrics::{macro_average_records, AggregatedRecord, MetricRecord};
use quadrank_core::{ArgumentId, EdgeSet};
use serde::{Deserialize, Serialize};

use crate::strategy::{GenerationParams, PromptStrategy};

pub const REPORT_FORMAT: &str = "quadrank-run/1";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum OrderingMode {
    #[default]
    Chronological,
    Toposort {
        k: usize,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphEntry {
    pub name: String,
    pub arguments: usize,
    pub relations: usize,
    /// Orders evaluated; below `k` when the graph has too few.
    pub orders: usize,
    pub not_enough_orders: bool,
}

/// One (graph, order, repetition) cell.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub graph: String,
    pub ordering: String,
    pub order_index: usize,
    pub repetition: usize,
    /// 2 when the format re-prompt was needed.
    pub attempts: u32,
    pub format_violation: bool,
    pub violation: Option<String>,
    /// Hash of the last request sent for this cell.
    pub request_hash: String,
    pub metrics: MetricRecord<f64>,
    /// Predicted ranking as tie groups, best first.
    pub predicted_ranking: Option<Vec<Vec<ArgumentId>>>,
    pub predicted_edges: Option<EdgeSet>,
    pub rejected_edges: usize,
}

/// Mean and population standard deviation across evaluated orders, each
/// order first averaged over repetitions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OrderSpread {
    pub orders: usize,
    pub rho_mean: Option<f64>,
    pub rho_std: Option<f64>,
    pub tau_mean: Option<f64>,
    pub tau_std: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub graph: String,
    pub scored: usize,
    pub excluded: usize,
    /// Means over the graph's scored records.
    pub metrics: MetricRecord<f64>,
    pub order_spread: Option<OrderSpread>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    /// Per-graph mean over repetitions, then macro over graphs.
    pub graph_first: AggregatedRecord<f64>,
    /// Macro over graphs within each repetition, then mean over repetitions.
    pub repetition_first: MetricRecord<f64>,
    /// Macro mean of the per-graph spread across orders.
    pub order_spread: Option<OrderSpread>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format: String,
    pub created_at: String,
    pub corpus_ids: Vec<String>,
    pub strategy: PromptStrategy,
    pub model_id: String,
    pub seed: u64,
    pub params: GenerationParams,
    pub template_sha256: String,
    pub exemplars: Vec<String>,
    pub ordering: OrderingMode,
    pub graphs: Vec<GraphEntry>,
    pub records: Vec<RunRecord>,
    pub per_graph: Vec<GraphSummary>,
    pub aggregate: Aggregates,
    pub records_total: usize,
    pub records_scored: usize,
    pub records_excluded: usize,
    pub format_violation_rate: f64,
    pub incomplete: bool,
    pub error: Option<String>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// JSON with the creation timestamp blanked, for comparing runs.
    pub fn to_canonical_json(&self) -> String {
        RunReport {
            created_at: String::new(),
            ..self.clone()
        }
        .to_json()
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let Some(m) = mean(values.iter().copied()) else {
        return (None, None);
    };
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64;
    (Some(m), Some(var.sqrt()))
}

fn mean_record<'a>(records: impl IntoIterator<Item = &'a MetricRecord<f64>> + Clone) -> MetricRecord<f64> {
    let field = |get: fn(&MetricRecord<f64>) -> Option<f64>| mean(records.clone().into_iter().filter_map(get));
    MetricRecord {
        rho: field(|r| r.rho),
        tau: field(|r| r.tau),
        precision: field(|r| r.precision),
        recall: field(|r| r.recall),
        f1: field(|r| r.f1),
    }
}

/// Fill in per-graph summaries, aggregates and accounting from `records`.
pub fn summarize(report: &mut RunReport) {
    report.records.sort_by(|a, b| {
        let pos = |r: &RunRecord| report.graphs.iter().position(|g| g.name == r.graph);
        (pos(a), a.order_index, a.repetition).cmp(&(pos(b), b.order_index, b.repetition))
    });
    let scored: Vec<&RunRecord> = report.records.iter().filter(|r| !r.format_violation).collect();
    report.records_total = report.graphs.iter().map(|g| g.orders).sum::<usize>() * report.params.repetitions;
    report.records_scored = scored.len();
    report.records_excluded = report.records.len() - scored.len();
    report.format_violation_rate = if report.records.is_empty() {
        0.0
    } else {
        report.records_excluded as f64 / report.records.len() as f64
    };

    let robustness = matches!(report.ordering, OrderingMode::Toposort { .. });
    report.per_graph = report
        .graphs
        .iter()
        .map(|g| {
            let mine: Vec<&RunRecord> = scored.iter().copied().filter(|r| r.graph == g.name).collect();
            let order_spread = robustness.then(|| {
                let mut by_order: BTreeMap<usize, Vec<&MetricRecord<f64>>> = BTreeMap::new();
                for r in &mine {
                    by_order.entry(r.order_index).or_default().push(&r.metrics);
                }
                let per_order: Vec<MetricRecord<f64>> = by_order.values().map(|v| mean_record(v.iter().copied())).collect();
                let rho: Vec<f64> = per_order.iter().filter_map(|m| m.rho).collect();
                let tau: Vec<f64> = per_order.iter().filter_map(|m| m.tau).collect();
                let (rho_mean, rho_std) = mean_std(&rho);
                let (tau_mean, tau_std) = mean_std(&tau);
                OrderSpread { orders: g.orders, rho_mean, rho_std, tau_mean, tau_std }
            });
            GraphSummary {
                graph: g.name.clone(),
                scored: mine.len(),
                excluded: report.records.iter().filter(|r| r.graph == g.name && r.format_violation).count(),
                metrics: mean_record(mine.iter().map(|r| &r.metrics)),
                order_spread,
            }
        })
        .collect();

    let graph_means: Vec<MetricRecord<f64>> = report.per_graph.iter().filter(|g| g.scored > 0).map(|g| g.metrics).collect();
    let per_repetition: Vec<MetricRecord<f64>> = (0..report.params.repetitions)
        .map(|rep| {
            let graph_means: Vec<MetricRecord<f64>> = report
                .graphs
                .iter()
                .filter_map(|g| {
                    let cells: Vec<&MetricRecord<f64>> = scored
                        .iter()
                        .filter(|r| r.graph == g.name && r.repetition == rep)
                        .map(|r| &r.metrics)
                        .collect();
                    (!cells.is_empty()).then(|| mean_record(cells.iter().copied()))
                })
                .collect();
            mean_record(graph_means.iter())
        })
        .collect();
    let spreads: Vec<OrderSpread> = report.per_graph.iter().filter_map(|g| g.order_spread).collect();
    report.aggregate = Aggregates {
        graph_first: macro_average_records(&graph_means),
        repetition_first: mean_record(per_repetition.iter()),
        order_spread: robustness.then(|| OrderSpread {
            orders: spreads.iter().map(|s| s.orders).sum(),
            rho_mean: mean(spreads.iter().filter_map(|s| s.rho_mean)),
            rho_std: mean(spreads.iter().filter_map(|s| s.rho_std)),
            tau_mean: mean(spreads.iter().filter_map(|s| s.tau_mean)),
            tau_std: mean(spreads.iter().filter_map(|s| s.tau_std)),
        }),
    };
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per record.
pub fn write_records_csv(report: &RunReport, out: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "graph", "ordering", "order_index", "repetition", "attempts", "format_violation", "rho", "tau", "precision",
        "recall", "f1", "rejected_edges",
    ])?;
    for r in &report.records {
        let m = &r.metrics;
        w.write_record([
            r.graph.clone(),
            r.ordering.clone(),
            r.order_index.to_string(),
            r.repetition.to_string(),
            r.attempts.to_string(),
            r.format_violation.to_string(),
            cell(m.rho),
            cell(m.tau),
            cell(m.precision),
            cell(m.recall),
            cell(m.f1),
            r.rejected_edges.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per graph.
pub fn write_per_graph_csv(report: &RunReport, out: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "graph", "scored", "excluded", "rho", "tau", "precision", "recall", "f1", "orders", "rho_order_std",
        "tau_order_std",
    ])?;
    for g in &report.per_graph {
        let m = &g.metrics;
        let s = g.order_spread.unwrap_or_default();
        w.write_record([
            g.graph.clone(),
            g.scored.to_string(),
            g.excluded.to_string(),
            cell(m.rho),
            cell(m.tau),
            cell(m.precision),
            cell(m.recall),
            cell(m.f1),
            g.order_spread.map(|s| s.orders.to_string()).unwrap_or_default(),
            cell(s.rho_std),
            cell(s.tau_std),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per metric for the whole split.
pub fn write_aggregate_csv(report: &RunReport, out: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "strategy", "metric", "graph_first_mean", "graphs_included", "graphs_excluded", "repetition_first_mean",
    ])?;
    let a = &report.aggregate;
    let rows = [
        ("rho", a.graph_first.rho, a.repetition_first.rho),
        ("tau", a.graph_first.tau, a.repetition_first.tau),
        ("precision", a.graph_first.precision, a.repetition_first.precision),
        ("recall", a.graph_first.recall, a.repetition_first.recall),
        ("f1", a.graph_first.f1, a.repetition_first.f1),
    ];
    for (name, macro_avg, rep_first) in rows {
        w.write_record([
            report.strategy.to_string(),
            name.to_string(),
            cell(macro_avg.map(|m| m.mean)),
            macro_avg.map(|m| m.included.to_string()).unwrap_or_default(),
            macro_avg.map(|m| m.excluded.to_string()).unwrap_or_default(),
            cell(rep_first),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn fixed(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"))
}

/// Plain-text table with one row per report.
pub fn render_summary(reports: &[RunReport]) -> String {
    let robustness = reports.iter().any(|r| r.aggregate.order_spread.is_some());
    let mut out = format!(
        "{:<14} {:<18} {:>7} {:>7} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "strategy", "model", "records", "invalid", "rho", "tau", "P", "R", "F1"
    );
    if robustness {
        out.push_str(&format!(" {:>8} {:>8}", "rho_sd", "tau_sd"));
    }
    out.push('\n');
    for r in reports {
        let a = &r.aggregate.graph_first;
        let m = |x: Option<quadrank_core::metrics::MacroAverage<f64>>| fixed(x.map(|v| v.mean));
        out.push_str(&format!(
            "{:<14} {:<18} {:>7} {:>7} {:>8} {:>8} {:>8} {:>8} {:>8}",
            r.strategy.as_str(),
            r.model_id,
            r.records.len(),
            format!("{:.1}%", 100.0 * r.format_violation_rate),
            m(a.rho),
            m(a.tau),
            m(a.precision),
            m(a.recall),
            m(a.f1),
        ));
        if robustness {
            let s = r.aggregate.order_spread.unwrap_or_default();
            out.push_str(&format!(" {:>8} {:>8}", fixed(s.rho_std), fixed(s.tau_std)));
        }
        out.push('\n');
    }
    out
}
