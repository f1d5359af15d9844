//! Chat-completion backends. Every backend answers a [`CompletionRequest`];
//! [`complete`] adds retries with exponential backoff on top.

mod http;
mod mock;
mod replay;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::strategy::GenerationParams;

pub use http::{AdapterConfig, HttpBackend};
pub use mock::{MockBackend, MockKind};
pub use replay::{ArchiveEntry, RecordingBackend, ReplayBackend};

/// One prompt to send. `graph` and `variant` are diagnostics only and do not
/// enter the request hash.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub repetition: usize,
    /// 0 for the first prompt, 1 for the format re-prompt.
    pub attempt: u32,
    #[serde(skip)]
    pub graph: String,
    #[serde(skip)]
    pub variant: String,
}

impl CompletionRequest {
    pub fn new(prompt: impl Into<String>, params: &GenerationParams, repetition: usize) -> Self {
        CompletionRequest {
            prompt: prompt.into(),
            temperature: params.temperature,
            max_output_tokens: params.max_output_tokens,
            repetition,
            attempt: 0,
            graph: String::new(),
            variant: String::new(),
        }
    }

    /// Hex SHA-256 over the prompt, sampling settings, repetition and attempt.
    pub fn hash(&self) -> String {
        let key = serde_json::to_vec(self).expect("request serializes");
        hex::encode(Sha256::digest(key))
    }

    /// Settings recorded next to the prompt in a replay archive.
    pub fn params_json(&self) -> serde_json::Value {
        serde_json::json!({
            "temperature": self.temperature,
            "max_output_tokens": self.max_output_tokens,
            "repetition": self.repetition,
            "attempt": self.attempt,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Completion {
    pub text: String,
    pub latency: Duration,
    pub token_usage: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("rate limited after {attempts} attempt(s)")]
    RateLimited { attempts: u32 },
    #[error("credential variable {0} is not set")]
    AuthMissing(String),
    #[error("request timed out after {0:?}")]
    TimeoutExceeded(Duration),
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("unexpected response: {0}")]
    BadResponse(String),
    #[error("replay archive has no response for request {hash}")]
    ReplayMiss { hash: String },
    #[error("archive: {0}")]
    Archive(String),
}

impl BackendError {
    fn retryable(&self) -> bool {
        matches!(
            self,
            BackendError::Transport(_) | BackendError::RateLimited { .. } | BackendError::TimeoutExceeded(_)
        )
    }
}

pub trait Backend: Send + Sync {
    /// Stable identifier written into reports.
    fn model_id(&self) -> String;

    /// A single attempt, no retries.
    fn send(&self, request: &CompletionRequest, params: &GenerationParams) -> Result<Completion, BackendError>;
}

impl<B: Backend + ?Sized> Backend for &B {
    fn model_id(&self) -> String {
        (**self).model_id()
    }

    fn send(&self, request: &CompletionRequest, params: &GenerationParams) -> Result<Completion, BackendError> {
        (**self).send(request, params)
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn model_id(&self) -> String {
        (**self).model_id()
    }

    fn send(&self, request: &CompletionRequest, params: &GenerationParams) -> Result<Completion, BackendError> {
        (**self).send(request, params)
    }
}

/// Delay before retry `n` (0-based) is `base * 2^n`, capped at `max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Backoff {
    pub base: Duration,
    pub max: Duration,
}

impl Default for Backoff {
    fn default() -> Self {
        Backoff {
            base: Duration::from_millis(500),
            max: Duration::from_secs(30),
        }
    }
}

impl Backoff {
    pub fn delay(&self, retry: u32) -> Duration {
        self.base.saturating_mul(1u32 << retry.min(20)).min(self.max)
    }
}

/// Send `request`, retrying transport, rate-limit and timeout failures up to
/// `params.retry_limit` times.
pub fn complete(
    backend: &dyn Backend,
    request: &CompletionRequest,
    params: &GenerationParams,
    backoff: Backoff,
) -> Result<Completion, BackendError> {
    let mut retry = 0;
    loop {
        let started = Instant::now();
        match backend.send(request, params) {
            Ok(mut c) => {
                if c.latency.is_zero() {
                    c.latency = started.elapsed();
                }
                return Ok(c);
            }
            Err(e) if e.retryable() && retry < params.retry_limit => {
                log::warn!("attempt {} failed ({e}); retrying", retry + 1);
                std::thread::sleep(backoff.delay(retry));
                retry += 1;
            }
            Err(BackendError::RateLimited { .. }) => {
                return Err(BackendError::RateLimited { attempts: retry + 1 });
            }
            Err(e) => return Err(e),
        }
    }
}
