//! Length and position bias: correlations inside argument quartiles.

use std::collections::BTreeMap;
use std::io::Write;

use quadrank_core::metrics::{quartile_correlations, whitespace_tokens, MacroAverage, QuartileCorrelation};
use quadrank_core::{acceptability, gold_ranking, macro_average, quartile_split, Graph, QuartileKey, Ranking};
use serde::{Deserialize, Serialize};

use crate::report::RunReport;

#[derive(Debug, thiserror::Error)]
pub enum BiasError {
    #[error("report mentions graph {0:?}, which is not in the supplied corpora")]
    UnknownGraph(String),
    #[error("record for {0:?} does not rank that graph's arguments")]
    Mismatch(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasRow {
    pub bucket: String,
    pub rho: Option<MacroAverage<f64>>,
    pub tau: Option<MacroAverage<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasTable {
    pub key: QuartileKey,
    pub rows: Vec<BiasRow>,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Per-quartile ρ and τ for every scored record: averaged over each graph's
/// records first, then macro-averaged over graphs. Cells with no defined
/// value anywhere are `None`.
/// Per-bucket (rho values, tau values) of one graph.
type Cell = (Vec<f64>, Vec<f64>);

pub fn bias_table(report: &RunReport, graphs: &[Graph], key: QuartileKey) -> Result<BiasTable, BiasError> {
    let by_name: BTreeMap<&str, &Graph> = graphs.iter().map(|g| (g.name(), g)).collect();
    let mut cells: BTreeMap<&str, [Cell; 4]> = BTreeMap::new();
    let mut order: Vec<&str> = Vec::new();
    for record in report.records.iter().filter(|r| !r.format_violation) {
        let Some(groups) = &record.predicted_ranking else { continue };
        let graph = *by_name
            .get(record.graph.as_str())
            .ok_or_else(|| BiasError::UnknownGraph(record.graph.clone()))?;
        let gold = gold_ranking(&acceptability(graph));
        let predicted = Ranking::from_groups(groups.clone());
        let buckets = quartile_split(graph, key, whitespace_tokens);
        let qc: [QuartileCorrelation<f64>; 4] = quartile_correlations(&gold, &predicted, &buckets)
            .map_err(|_| BiasError::Mismatch(record.graph.clone()))?;
        let entry = cells.entry(graph.name()).or_insert_with(|| {
            order.push(graph.name());
            Default::default()
        });
        for (slot, c) in entry.iter_mut().zip(qc) {
            slot.0.extend(c.rho);
            slot.1.extend(c.tau);
        }
    }
    let rows = (0..4)
        .map(|b| {
            let rho = macro_average(order.iter().map(|g| mean(&cells[g][b].0))).ok();
            let tau = macro_average(order.iter().map(|g| mean(&cells[g][b].1))).ok();
            BiasRow {
                bucket: format!("{}{}", key.prefix(), b + 1),
                rho,
                tau,
            }
        })
        .collect();
    Ok(BiasTable { key, rows })
}

fn fixed(v: Option<MacroAverage<f64>>) -> String {
    v.map_or_else(|| "n/a".into(), |m| format!("{:.4}", m.mean))
}

impl BiasTable {
    pub fn render(&self) -> String {
        let mut out = format!("{:<6} {:>8} {:>8} {:>7}\n", "bucket", "rho", "tau", "graphs");
        for r in &self.rows {
            let graphs = r.rho.map_or(0, |m| m.included);
            out.push_str(&format!("{:<6} {:>8} {:>8} {:>7}\n", r.bucket, fixed(r.rho), fixed(r.tau), graphs));
        }
        out
    }

    pub fn write_csv(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bucket", "rho", "tau", "rho_graphs", "tau_graphs", "rho_undefined", "tau_undefined"])?;
        let num = |v: Option<MacroAverage<f64>>| v.map_or_else(|| "n/a".to_string(), |m| m.mean.to_string());
        let inc = |v: Option<MacroAverage<f64>>| v.map_or(0, |m| m.included).to_string();
        let exc = |v: Option<MacroAverage<f64>>| v.map_or(0, |m| m.excluded).to_string();
        for r in &self.rows {
            w.write_record([r.bucket.clone(), num(r.rho), num(r.tau), inc(r.rho), inc(r.tau), exc(r.rho), exc(r.tau)])?;
        }
        w.flush()?;
        Ok(())
    }
}
