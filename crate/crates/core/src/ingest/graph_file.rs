//! Canonical JSON graph file shared by every downstream command.
//!
//! ```json
//! {
//!   "format": "quadrank-graphs/1",
//!   "graphs": [
//!     {
//!       "name": "SobrietyTest",
//!       "arguments": [
//!         { "id": 1, "text": "...", "chronological_index": 0, "base_weight": 0.5 }
//!       ],
//!       "relations": [ { "source": 2, "target": 1, "kind": "support" } ]
//!     }
//!   ]
//! }
//! ```
//!
//! `chronological_index` defaults to the argument's position in the list and
//! `base_weight` to 0.5.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{graph_error, IngestError};
use crate::graph::{Argument, ArgumentId, BaseWeights, DebateGraph, Relation};
use crate::scalar::Weight;
use crate::Graph;

pub const GRAPH_FILE_FORMAT: &str = "quadrank-graphs/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub format: String,
    pub graphs: Vec<GraphRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub name: String,
    pub arguments: Vec<ArgumentRecord>,
    #[serde(default)]
    pub relations: Vec<Relation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArgumentRecord {
    pub id: ArgumentId,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chronological_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_weight: Option<f64>,
}

impl GraphRecord {
    pub fn from_graph<W: Weight>(graph: &DebateGraph<W>) -> Self {
        GraphRecord {
            name: graph.name().to_string(),
            arguments: graph
                .arguments()
                .iter()
                .map(|a| ArgumentRecord {
                    id: a.id,
                    text: a.text.clone(),
                    chronological_index: Some(a.chronological_index),
                    base_weight: graph.base_weight(a.id).map(Weight::as_f64),
                })
                .collect(),
            relations: graph.relations().to_vec(),
        }
    }

    pub fn into_graph(self) -> Result<Graph, IngestError> {
        let mut weights = BTreeMap::new();
        let arguments = self
            .arguments
            .into_iter()
            .enumerate()
            .map(|(i, a)| {
                weights.insert(a.id, a.base_weight.unwrap_or(0.5));
                Argument::new(a.id, a.text, a.chronological_index.unwrap_or(i))
            })
            .collect();
        DebateGraph::build(
            self.name.clone(),
            arguments,
            self.relations,
            BaseWeights::Explicit(weights),
        )
        .map_err(|e| graph_error(&self.name, e))
    }
}

pub fn read_graph_file<R: Read>(reader: R) -> Result<Vec<Graph>, IngestError> {
    let file: GraphFile =
        serde_json::from_reader(reader).map_err(|e| IngestError::GraphFile(e.to_string()))?;
    if file.format != GRAPH_FILE_FORMAT {
        return Err(IngestError::GraphFile(format!(
            "unsupported format {:?}, expected {GRAPH_FILE_FORMAT:?}",
            file.format
        )));
    }
    file.graphs.into_iter().map(GraphRecord::into_graph).collect()
}

pub fn write_graph_file<W: Weight, Out: Write>(
    graphs: &[DebateGraph<W>],
    mut out: Out,
) -> Result<(), IngestError> {
    let file = GraphFile {
        format: GRAPH_FILE_FORMAT.to_string(),
        graphs: graphs.iter().map(GraphRecord::from_graph).collect(),
    };
    serde_json::to_writer_pretty(&mut out, &file).map_err(|e| IngestError::GraphFile(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}
