//! Blocking client for chat-completions-compatible HTTP endpoints.

use std::time::Duration;

use serde_json::{json, Value};

use super::{CompletionBackend, CompletionRequest};
use crate::error::{Error, Result};
use crate::textmetrics::{Embedder, EmbeddingVector};

pub const API_KEY_ENV: &str = "SUMEVAL_API_KEY";

#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay: Duration,
    pub multiplier: u32,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            base_delay: Duration::from_secs(1),
            multiplier: 2,
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (0-based).
    pub fn delay(&self, retry: u32) -> Duration {
        self.base_delay * self.multiplier.saturating_pow(retry)
    }
}

fn retryable(err: &Error) -> bool {
    match err {
        Error::HttpStatus(code) => *code == 429 || (500..600).contains(code),
        Error::BackendUnreachable(_) | Error::Timeout => true,
        _ => false,
    }
}

fn map_err(err: ureq::Error) -> Error {
    match err {
        ureq::Error::StatusCode(code) => Error::HttpStatus(code),
        ureq::Error::Timeout(_) => Error::Timeout,
        ureq::Error::Json(e) => Error::MalformedResponse(e.to_string()),
        other => Error::BackendUnreachable(other.to_string()),
    }
}

#[derive(Debug, Clone)]
pub struct HttpBackendConfig {
    /// Base URL up to and including the version segment, e.g.
    /// `http://localhost:8000/v1`.
    pub base_url: String,
    pub api_key: Option<String>,
    pub embedding_model: String,
    pub timeout: Duration,
    pub retry: RetryPolicy,
}

impl HttpBackendConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
            embedding_model: "text-embedding".into(),
            timeout: Duration::from_secs(300),
            retry: RetryPolicy::default(),
        }
    }
}

pub struct HttpBackend {
    cfg: HttpBackendConfig,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(cfg: HttpBackendConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout))
            .build()
            .into();
        Self { cfg, agent }
    }

    fn endpoint(&self, path: &str) -> String {
        format!("{}/{}", self.cfg.base_url.trim_end_matches('/'), path)
    }

    fn post_once(&self, url: &str, body: &Value) -> Result<Value> {
        let mut req = self
            .agent
            .post(url)
            .header("Content-Type", "application/json");
        if let Some(key) = &self.cfg.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req.send_json(body).map_err(map_err)?;
        resp.body_mut().read_json::<Value>().map_err(map_err)
    }

    fn post(&self, path: &str, body: &Value) -> Result<Value> {
        let url = self.endpoint(path);
        let mut attempt = 0;
        loop {
            match self.post_once(&url, body) {
                Ok(v) => return Ok(v),
                Err(e) if retryable(&e) && attempt + 1 < self.cfg.retry.attempts => {
                    let delay = self.cfg.retry.delay(attempt);
                    log::warn!("{url}: {e}; retrying in {delay:?}");
                    std::thread::sleep(delay);
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}

impl CompletionBackend for HttpBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<String> {
        let body = json!({
            "model": request.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        });
        let resp = self.post("chat/completions", &body)?;
        resp.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| Error::MalformedResponse("missing choices[0].message.content".into()))
    }
}

impl Embedder for HttpBackend {
    fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        let body = json!({ "model": self.cfg.embedding_model, "input": text });
        let resp = self.post("embeddings", &body)?;
        let values = resp
            .pointer("/data/0/embedding")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::MalformedResponse("missing data[0].embedding".into()))?
            .iter()
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| Error::MalformedResponse("non-numeric embedding".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        EmbeddingVector::new(values)
    }
}
