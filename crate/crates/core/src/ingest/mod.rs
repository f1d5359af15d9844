//! Corpus ingestion: NoDE pair XML, the canonical graph file, corpus
//! statistics and the exemplar/evaluation split.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use thiserror::Error;

use crate::graph::GraphError;
use crate::Graph;

mod corpus;
mod graph_file;
mod node;

pub use corpus::{corpus_stats, select_exemplars, split_corpus, CorpusSplit, CorpusStats, ExemplarRole};
pub use graph_file::{read_graph_file, write_graph_file, GraphFile, GraphRecord, GRAPH_FILE_FORMAT};
pub use node::{
    canonical_text, graphs_from_pairs, parse_node_pairs, parse_node_xml, write_node_xml,
    Entailment, RawPair,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed XML at byte {position}: {message}")]
    MalformedXml { position: u64, message: String },
    #[error("<{element}> at byte {position} is missing attribute `{attribute}`")]
    MissingAttribute {
        element: &'static str,
        attribute: &'static str,
        position: u64,
    },
    #[error("pair {pair_id} has no <{child}> element")]
    MissingChild { pair_id: String, child: &'static str },
    #[error("pair {pair_id}: <{child}> has empty text")]
    EmptyText { pair_id: String, child: &'static str },
    #[error("pair {pair_id}: unknown entailment value {value:?} (expected YES or NO)")]
    UnknownEntailmentValue { pair_id: String, value: String },
    #[error("topic {topic}: argument {id} appears with two different texts")]
    ConflictingArgumentText { topic: String, id: String },
    #[error("topic {topic}: {source}")]
    Graph {
        topic: String,
        #[source]
        source: GraphError,
    },
    #[error("graph file: {0}")]
    GraphFile(String),
    #[error("unknown graph name {0:?}")]
    UnknownGraphName(String),
    #[error("exemplar {0:?} listed twice")]
    DuplicateExemplar(String),
    #[error("unsupported corpus file {0:?} (expected .xml or .json)")]
    UnsupportedFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Load a corpus file: NoDE pair XML (`.xml`) or a canonical graph file
/// (`.json`). XML pairs without a `topic` attribute fall back to the file
/// stem as graph name.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Graph>, IngestError> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let reader = BufReader::new(File::open(path)?);
    match ext.as_deref() {
        Some("xml") => {
            let stem = path.file_stem().and_then(|s| s.to_str());
            let pairs = parse_node_pairs(reader, stem)?;
            graphs_from_pairs(&pairs)
        }
        Some("json") => read_graph_file(reader),
        _ => Err(IngestError::UnsupportedFormat(path.display().to_string())),
    }
}

/// Load and concatenate several corpus files.
pub fn load_corpora<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<Graph>, IngestError> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(load_corpus(p)?);
    }
    Ok(out)
}

pub(crate) fn graph_error(topic: &str, source: GraphError) -> IngestError {
    IngestError::Graph {
        topic: topic.to_string(),
        source,
    }
}

