use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Backend, BackendError, Completion, CompletionRequest};
use crate::strategy::GenerationParams;

/// How to talk to one chat-completion HTTP API. The request body is `body`
/// with the prompt and sampling settings written at the given JSON pointers;
/// the answer is read from `response_path`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdapterConfig {
    pub model: String,
    pub endpoint: String,
    /// Environment variable holding the credential; `None` sends no auth.
    #[serde(default)]
    pub auth_env: Option<String>,
    #[serde(default = "default_auth_header")]
    pub auth_header: String,
    #[serde(default = "default_auth_prefix")]
    pub auth_prefix: String,
    #[serde(default)]
    pub headers: BTreeMap<String, String>,
    pub body: Value,
    pub prompt_path: String,
    #[serde(default)]
    pub temperature_path: Option<String>,
    #[serde(default)]
    pub max_tokens_path: Option<String>,
    pub response_path: String,
    #[serde(default)]
    pub usage_path: Option<String>,
}

fn default_auth_header() -> String {
    "Authorization".into()
}

fn default_auth_prefix() -> String {
    "Bearer ".into()
}

impl AdapterConfig {
    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::Archive(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| BackendError::Archive(format!("{}: {e}", path.display())))
    }

    /// Request body for one prompt.
    pub fn render_body(&self, request: &CompletionRequest) -> Result<Value, BackendError> {
        let mut body = self.body.clone();
        set_pointer(&mut body, &self.prompt_path, Value::from(request.prompt.clone()))?;
        if let Some(p) = &self.temperature_path {
            set_pointer(&mut body, p, Value::from(request.temperature))?;
        }
        if let Some(p) = &self.max_tokens_path {
            set_pointer(&mut body, p, Value::from(request.max_output_tokens))?;
        }
        Ok(body)
    }
}

/// Write `value` at RFC 6901 `pointer`, creating missing object members.
fn set_pointer(root: &mut Value, pointer: &str, value: Value) -> Result<(), BackendError> {
    if pointer.is_empty() {
        *root = value;
        return Ok(());
    }
    let bad = || BackendError::BadResponse(format!("cannot write JSON pointer {pointer:?} into the body template"));
    let tokens: Vec<String> = pointer
        .strip_prefix('/')
        .ok_or_else(bad)?
        .split('/')
        .map(|t| t.replace("~1", "/").replace("~0", "~"))
        .collect();
    let mut cur = root;
    for token in &tokens {
        if cur.is_null() {
            *cur = Value::Object(Default::default());
        }
        cur = match cur {
            Value::Object(map) => map.entry(token.clone()).or_insert(Value::Null),
            Value::Array(items) => {
                let i: usize = token.parse().map_err(|_| bad())?;
                if i == items.len() {
                    items.push(Value::Null);
                }
                items.get_mut(i).ok_or_else(bad)?
            }
            _ => return Err(bad()),
        };
    }
    *cur = value;
    Ok(())
}

pub struct HttpBackend {
    config: AdapterConfig,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(config: AdapterConfig, params: &GenerationParams) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(params.request_timeout)
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(HttpBackend { config, client })
    }

    pub fn config(&self) -> &AdapterConfig {
        &self.config
    }
}

impl Backend for HttpBackend {
    fn model_id(&self) -> String {
        self.config.model.clone()
    }

    fn send(&self, request: &CompletionRequest, params: &GenerationParams) -> Result<Completion, BackendError> {
        let cfg = &self.config;
        let mut builder = self.client.post(&cfg.endpoint).timeout(params.request_timeout);
        if let Some(var) = &cfg.auth_env {
            let key = std::env::var(var).map_err(|_| BackendError::AuthMissing(var.clone()))?;
            builder = builder.header(cfg.auth_header.as_str(), format!("{}{key}", cfg.auth_prefix));
        }
        for (k, v) in &cfg.headers {
            builder = builder.header(k.as_str(), v.as_str());
        }
        let started = Instant::now();
        let response = builder.json(&cfg.render_body(request)?).send().map_err(|e| {
            if e.is_timeout() {
                BackendError::TimeoutExceeded(params.request_timeout)
            } else {
                BackendError::Transport(e.to_string())
            }
        })?;
        let status = response.status();
        let body = response.text().map_err(|e| {
            if e.is_timeout() {
                BackendError::TimeoutExceeded(params.request_timeout)
            } else {
                BackendError::Transport(e.to_string())
            }
        })?;
        if status.as_u16() == 429 {
            return Err(BackendError::RateLimited { attempts: 1 });
        }
        if status.is_server_error() {
            return Err(BackendError::Transport(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(BackendError::Http {
                status: status.as_u16(),
                body: body.chars().take(500).collect(),
            });
        }
        let json: Value = serde_json::from_str(&body).map_err(|e| BackendError::BadResponse(e.to_string()))?;
        let text = json
            .pointer(&cfg.response_path)
            .and_then(Value::as_str)
            .ok_or_else(|| BackendError::BadResponse(format!("no string at {}", cfg.response_path)))?;
        let token_usage = cfg.usage_path.as_ref().and_then(|p| json.pointer(p)).and_then(Value::as_u64);
        Ok(Completion {
            text: text.to_string(),
            latency: started.elapsed(),
            token_usage,
        })
    }
}
