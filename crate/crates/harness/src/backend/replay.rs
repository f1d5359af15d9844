use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Backend, BackendError, Completion, CompletionRequest};
use crate::strategy::GenerationParams;

/// One line of a replay archive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub request_hash: String,
    pub prompt: String,
    pub params: serde_json::Value,
    pub response_text: String,
    pub timestamp: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
}

/// Answers from a recorded archive; never touches the network.
#[derive(Debug)]
pub struct ReplayBackend {
    responses: HashMap<String, String>,
    model: String,
}

impl ReplayBackend {
    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let file = File::open(path).map_err(|e| BackendError::Archive(format!("{}: {e}", path.display())))?;
        Self::from_reader(BufReader::new(file))
    }

    /// The first entry for a hash wins.
    pub fn from_reader(reader: impl BufRead) -> Result<Self, BackendError> {
        let mut responses = HashMap::new();
        let mut model = None;
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| BackendError::Archive(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: ArchiveEntry = serde_json::from_str(&line)
                .map_err(|e| BackendError::Archive(format!("line {}: {e}", n + 1)))?;
            if model.is_none() {
                model = entry.model.clone();
            }
            responses.entry(entry.request_hash).or_insert(entry.response_text);
        }
        Ok(ReplayBackend {
            responses,
            model: model.unwrap_or_else(|| "replay".into()),
        })
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl Backend for ReplayBackend {
    fn model_id(&self) -> String {
        self.model.clone()
    }

    fn send(&self, request: &CompletionRequest, _: &GenerationParams) -> Result<Completion, BackendError> {
        let hash = request.hash();
        let text = self.responses.get(&hash).ok_or(BackendError::ReplayMiss { hash })?;
        Ok(Completion {
            text: text.clone(),
            latency: Duration::ZERO,
            token_usage: None,
        })
    }
}

/// Passes requests to `inner` and appends each answered one to an archive.
pub struct RecordingBackend<B> {
    inner: B,
    out: Mutex<File>,
}

impl<B: Backend> RecordingBackend<B> {
    pub fn new(inner: B, archive: &Path) -> Result<Self, BackendError> {
        let out = OpenOptions::new()
            .create(true)
            .append(true)
            .open(archive)
            .map_err(|e| BackendError::Archive(format!("{}: {e}", archive.display())))?;
        Ok(RecordingBackend { inner, out: Mutex::new(out) })
    }
}

impl<B: Backend> Backend for RecordingBackend<B> {
    fn model_id(&self) -> String {
        self.inner.model_id()
    }

    fn send(&self, request: &CompletionRequest, params: &GenerationParams) -> Result<Completion, BackendError> {
        let completion = self.inner.send(request, params)?;
        let entry = ArchiveEntry {
            request_hash: request.hash(),
            prompt: request.prompt.clone(),
            params: request.params_json(),
            response_text: completion.text.clone(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            model: Some(self.inner.model_id()),
        };
        let mut line = serde_json::to_string(&entry).map_err(|e| BackendError::Archive(e.to_string()))?;
        line.push('\n');
        let mut out = self.out.lock().unwrap_or_else(|p| p.into_inner());
        out.write_all(line.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| BackendError::Archive(e.to_string()))?;
        Ok(completion)
    }
}
