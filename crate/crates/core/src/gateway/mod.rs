//! Access to the LLM: prompt rendering, completion backends, the on-disk
//! response cache that makes runs replayable, embeddings, and parsing of the
//! structured completion formats.

mod cache;
mod embed;
pub mod http;
pub mod parse;
pub mod prompts;

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Condvar, Mutex};

use serde::{Deserialize, Serialize};

pub use cache::{CacheKey, ResponseCache};
pub use embed::{StubEmbedder, STUB_DIM};
pub use http::{HttpBackend, HttpBackendConfig, RetryPolicy};
pub use parse::{format_qa_block, parse_answer_list, parse_qa_block, QaPair};
pub use prompts::{render_prompt, TemplateId};

use crate::error::{Error, Result};
use crate::textmetrics::{Embedder, EmbeddingVector};

pub const DEFAULT_BACKEND_URL: &str = "http://localhost:8000/v1";
pub const DEFAULT_MODEL: &str = "default";
pub const DEFAULT_MAX_OUTPUT_TOKENS: u32 = 2048;
pub const DEFAULT_IN_FLIGHT: usize = 4;
pub const CACHE_DIR_ENV: &str = "SUMEVAL_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub model: String,
    /// Identifies the serving backend; part of the cache key.
    pub backend: String,
}

/// Anything that turns a request into completion text.
pub trait CompletionBackend: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<String>;
}

impl<F> CompletionBackend for F
where
    F: Fn(&CompletionRequest) -> Result<String> + Send + Sync,
{
    fn complete(&self, request: &CompletionRequest) -> Result<String> {
        self(request)
    }
}

/// Counting semaphore bounding concurrent backend calls.
struct Limiter {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Limiter {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn run<T>(&self, f: impl FnOnce() -> T) -> T {
        {
            let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
            while *free == 0 {
                free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
            }
            *free -= 1;
        }
        struct Release<'a>(&'a Limiter);
        impl Drop for Release<'_> {
            fn drop(&mut self) {
                *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
                self.0.cv.notify_one();
            }
        }
        let _release = Release(self);
        f()
    }
}

/// Shared entry point for every LLM call. Safe to use from many threads.
///
/// With a cache configured, hits are served from disk and misses go to the
/// backend and are written back. In strict replay mode a miss is an error
/// and the backend is never contacted.
pub struct Gateway {
    backend: Option<Arc<dyn CompletionBackend>>,
    embedder: Option<Arc<dyn Embedder>>,
    cache: Option<ResponseCache>,
    strict: bool,
    model: String,
    backend_id: String,
    max_output_tokens: u32,
    limiter: Limiter,
    backend_calls: AtomicUsize,
    requests: AtomicUsize,
}

pub struct GatewayBuilder {
    backend: Option<Arc<dyn CompletionBackend>>,
    embedder: Option<Arc<dyn Embedder>>,
    cache_dir: Option<PathBuf>,
    strict: bool,
    model: String,
    backend_id: String,
    max_output_tokens: u32,
    in_flight: usize,
}

impl Default for GatewayBuilder {
    fn default() -> Self {
        Self {
            backend: None,
            embedder: Some(Arc::new(StubEmbedder)),
            cache_dir: None,
            strict: false,
            model: DEFAULT_MODEL.into(),
            backend_id: DEFAULT_BACKEND_URL.into(),
            max_output_tokens: DEFAULT_MAX_OUTPUT_TOKENS,
            in_flight: DEFAULT_IN_FLIGHT,
        }
    }
}

impl GatewayBuilder {
    pub fn backend(mut self, backend: Arc<dyn CompletionBackend>) -> Self {
        self.backend = Some(backend);
        self
    }

    pub fn embedder(mut self, embedder: Option<Arc<dyn Embedder>>) -> Self {
        self.embedder = embedder;
        self
    }

    pub fn cache_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }

    pub fn strict_replay(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn model(mut self, model: impl Into<String>) -> Self {
        self.model = model.into();
        self
    }

    pub fn backend_id(mut self, id: impl Into<String>) -> Self {
        self.backend_id = id.into();
        self
    }

    pub fn max_output_tokens(mut self, n: u32) -> Self {
        self.max_output_tokens = n;
        self
    }

    pub fn in_flight(mut self, n: usize) -> Self {
        self.in_flight = n;
        self
    }

    pub fn build(self) -> Result<Gateway> {
        if self.strict && self.cache_dir.is_none() {
            return Err(Error::invalid(
                "replay_dir",
                "strict replay requires a cache directory",
            ));
        }
        Ok(Gateway {
            backend: self.backend,
            embedder: self.embedder,
            cache: self.cache_dir.map(ResponseCache::new),
            strict: self.strict,
            model: self.model,
            backend_id: self.backend_id,
            max_output_tokens: self.max_output_tokens,
            limiter: Limiter::new(self.in_flight),
            backend_calls: AtomicUsize::new(0),
            requests: AtomicUsize::new(0),
        })
    }
}

impl Gateway {
    pub fn builder() -> GatewayBuilder {
        GatewayBuilder::default()
    }

    /// Cache-only gateway that errors on any miss.
    pub fn strict_replay(dir: impl Into<PathBuf>) -> Result<Self> {
        Self::builder().cache_dir(dir).strict_replay(true).build()
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    pub fn backend_id(&self) -> &str {
        &self.backend_id
    }

    pub fn cache(&self) -> Option<&ResponseCache> {
        self.cache.as_ref()
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    /// Number of calls that reached the backend (cache hits excluded).
    pub fn backend_calls(&self) -> usize {
        self.backend_calls.load(Ordering::Relaxed)
    }

    /// Number of `complete` calls, hits and misses alike.
    pub fn requests(&self) -> usize {
        self.requests.load(Ordering::Relaxed)
    }

    pub fn request(&self, prompt: String, temperature: f64) -> CompletionRequest {
        CompletionRequest {
            prompt,
            temperature,
            max_output_tokens: self.max_output_tokens,
            model: self.model.clone(),
            backend: self.backend_id.clone(),
        }
    }

    pub fn complete(&self, request: &CompletionRequest) -> Result<String> {
        self.requests.fetch_add(1, Ordering::Relaxed);
        let key = CacheKey::of(request);
        if let Some(cache) = &self.cache {
            if let Some(text) = cache.get(&key)? {
                return Ok(text);
            }
            if self.strict {
                return Err(Error::ReplayMiss(key.hex().to_string()));
            }
        }
        let backend = self
            .backend
            .as_ref()
            .ok_or_else(|| Error::BackendUnreachable("no backend configured".into()))?;
        self.backend_calls.fetch_add(1, Ordering::Relaxed);
        let text = self.limiter.run(|| backend.complete(request))?;
        if let Some(cache) = &self.cache {
            cache.put(&key, &text)?;
        }
        Ok(text)
    }

    /// Renders `template` and completes it at `temperature`.
    pub fn complete_template(
        &self,
        template: TemplateId,
        slots: &[(&str, &str)],
        temperature: f64,
    ) -> Result<String> {
        let prompt = prompts::render(template, slots)?;
        self.complete(&self.request(prompt, temperature))
    }

    pub fn embedder(&self) -> Option<&dyn Embedder> {
        self.embedder.as_deref()
    }

    pub fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        self.embedder
            .as_ref()
            .ok_or(Error::MissingEmbedder)?
            .embed(text)
    }
}
