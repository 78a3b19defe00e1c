//! Completions-style HTTP endpoint client with retries and a response cache.
//!
//! Each prompt becomes one `POST` with body
//! `{"model", "prompt", "temperature", "max_tokens"}`; the text of the first
//! returned choice is the raw response. Responses are cached on disk keyed by
//! SHA-256 of `(model, prompt)`, so a rerun with a warm cache sends nothing.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use reqwest::StatusCode;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{render_prompts, DemoPlan, Prediction, PredictionRequest, Predictor, ProviderError, Result};
use crate::prompting::PromptTemplate;
use crate::response_mapper::{map_response, PhraseLists};
use crate::splitter::write_atomic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmConfig {
    pub endpoint: String,
    /// Environment variable holding the bearer token; no auth header when unset.
    #[serde(default)]
    pub api_key_env: Option<String>,
    pub model: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_concurrency")]
    pub max_concurrency: usize,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    /// First backoff delay; doubles on every retry.
    #[serde(default = "default_backoff_ms")]
    pub backoff_base_ms: u64,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
}

fn default_max_tokens() -> u32 {
    64
}
fn default_timeout_secs() -> u64 {
    60
}
fn default_concurrency() -> usize {
    4
}
fn default_max_retries() -> u32 {
    5
}
fn default_backoff_ms() -> u64 {
    500
}

impl LlmConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        LlmConfig {
            endpoint: endpoint.into(),
            api_key_env: None,
            model: model.into(),
            temperature: 0.0,
            max_tokens: default_max_tokens(),
            timeout_secs: default_timeout_secs(),
            max_concurrency: default_concurrency(),
            max_retries: default_max_retries(),
            backoff_base_ms: default_backoff_ms(),
            cache_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ProviderError::ConfigError(m));
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return bad(format!("temperature {} must be >= 0", self.temperature));
        }
        if self.max_tokens < 1 {
            return bad("max_tokens must be >= 1".into());
        }
        if self.max_concurrency < 1 {
            return bad("max_concurrency must be >= 1".into());
        }
        if self.endpoint.is_empty() || self.model.is_empty() {
            return bad("endpoint and model are required".into());
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    text: String,
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    model: String,
    prompt: String,
    raw: String,
}

/// Raw responses on disk, one JSON file per `(model, prompt)` hash.
#[derive(Debug)]
pub struct ResponseCache {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl ResponseCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ResponseCache {
            dir: dir.into(),
            write_lock: Mutex::new(()),
        }
    }

    pub fn key(model: &str, prompt: &str) -> String {
        let mut h = Sha256::new();
        h.update(model.as_bytes());
        h.update([0u8]);
        h.update(prompt.as_bytes());
        hex::encode(h.finalize())
    }

    fn path(&self, model: &str, prompt: &str) -> PathBuf {
        self.dir.join(format!("{}.json", Self::key(model, prompt)))
    }

    pub fn get(&self, model: &str, prompt: &str) -> Option<String> {
        let text = fs::read_to_string(self.path(model, prompt)).ok()?;
        let entry: CacheEntry = serde_json::from_str(&text).ok()?;
        (entry.model == model && entry.prompt == prompt).then_some(entry.raw)
    }

    pub fn put(&self, model: &str, prompt: &str, raw: &str) -> std::io::Result<()> {
        let entry = CacheEntry {
            model: model.to_string(),
            prompt: prompt.to_string(),
            raw: raw.to_string(),
        };
        let bytes = serde_json::to_vec(&entry).expect("cache entry serializes");
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        write_atomic(&self.path(model, prompt), &bytes)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmStats {
    pub requests_sent: usize,
    pub retries: usize,
    pub cache_hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmOutcome {
    pub predictions: Vec<Prediction>,
    pub stats: LlmStats,
}

enum Attempt {
    Done(String),
    Retry(String),
    Fail(ProviderError),
}

struct Client<'a> {
    config: &'a LlmConfig,
    http: reqwest::blocking::Client,
    token: Option<String>,
    cache: Option<ResponseCache>,
    sent: AtomicUsize,
    retries: AtomicUsize,
    hits: AtomicUsize,
}

impl Client<'_> {
    fn attempt(&self, prompt: &str) -> Attempt {
        let body = CompletionRequest {
            model: &self.config.model,
            prompt,
            temperature: self.config.temperature,
            max_tokens: self.config.max_tokens,
        };
        let mut req = self.http.post(&self.config.endpoint).json(&body);
        if let Some(token) = &self.token {
            req = req.bearer_auth(token);
        }
        self.sent.fetch_add(1, Ordering::Relaxed);
        let resp = match req.send() {
            Ok(r) => r,
            Err(e) if e.is_timeout() || e.is_connect() || e.is_request() => return Attempt::Retry(e.to_string()),
            Err(e) => return Attempt::Fail(ProviderError::EndpointError(e.to_string())),
        };
        let status = resp.status();
        if status == StatusCode::UNAUTHORIZED || status == StatusCode::FORBIDDEN {
            return Attempt::Fail(ProviderError::AuthError(format!("endpoint answered {status}")));
        }
        if status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error() {
            return Attempt::Retry(format!("endpoint answered {status}"));
        }
        if !status.is_success() {
            return Attempt::Fail(ProviderError::EndpointError(format!("endpoint answered {status}")));
        }
        match resp.json::<CompletionResponse>() {
            Ok(parsed) => match parsed.choices.into_iter().next() {
                Some(choice) => Attempt::Done(choice.text),
                None => Attempt::Fail(ProviderError::EndpointError("response has no choices".into())),
            },
            Err(e) => Attempt::Fail(ProviderError::EndpointError(format!("unreadable response: {e}"))),
        }
    }

    fn complete(&self, prompt: &str) -> Result<String> {
        if let Some(raw) = self.cache.as_ref().and_then(|c| c.get(&self.config.model, prompt)) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(raw);
        }
        let mut tries = 0;
        let raw = loop {
            match self.attempt(prompt) {
                Attempt::Done(raw) => break raw,
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(reason) => {
                    if tries >= self.config.max_retries {
                        return Err(ProviderError::EndpointError(format!(
                            "giving up after {} retries: {reason}",
                            tries
                        )));
                    }
                    let delay = self.config.backoff_base_ms.saturating_mul(1u64 << tries.min(20));
                    log::debug!("retrying in {delay} ms: {reason}");
                    thread::sleep(Duration::from_millis(delay));
                    tries += 1;
                    self.retries.fetch_add(1, Ordering::Relaxed);
                }
            }
        };
        if let Some(cache) = &self.cache {
            cache.put(&self.config.model, prompt, &raw)?;
        }
        Ok(raw)
    }
}

/// Sends one completion request per prompt with at most
/// `config.max_concurrency` in flight. Results keep input order. On failure,
/// responses already received stay in the cache.
pub fn predict_via_llm(config: &LlmConfig, prompts: &[(usize, String)], lists: &PhraseLists) -> Result<LlmOutcome> {
    config.validate()?;
    let token = match &config.api_key_env {
        Some(var) => Some(
            std::env::var(var)
                .map_err(|_| ProviderError::AuthError(format!("environment variable {var} is not set")))?,
        ),
        None => None,
    };
    let http = reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(config.timeout_secs))
        .build()
        .map_err(|e| ProviderError::ConfigError(e.to_string()))?;
    let client = Client {
        config,
        http,
        token,
        cache: config.cache_dir.as_ref().map(ResponseCache::new),
        sent: AtomicUsize::new(0),
        retries: AtomicUsize::new(0),
        hits: AtomicUsize::new(0),
    };

    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let results: Mutex<Vec<Option<Result<String>>>> = Mutex::new((0..prompts.len()).map(|_| None).collect());
    let workers = config.max_concurrency.min(prompts.len()).max(1);
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                if abort.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= prompts.len() {
                    break;
                }
                let out = client.complete(&prompts[i].1);
                if out.is_err() {
                    abort.store(true, Ordering::Relaxed);
                }
                results.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(out);
            });
        }
    });

    let stats = LlmStats {
        requests_sent: client.sent.load(Ordering::Relaxed),
        retries: client.retries.load(Ordering::Relaxed),
        cache_hits: client.hits.load(Ordering::Relaxed),
    };
    let results = results.into_inner().unwrap_or_else(|e| e.into_inner());
    let mut predictions = Vec::with_capacity(prompts.len());
    for ((record_id, _), result) in prompts.iter().zip(results) {
        match result {
            Some(Ok(raw)) => predictions.push(Prediction {
                record_id: *record_id,
                label: map_response(&raw, lists),
                raw: Some(raw),
            }),
            Some(Err(e)) => return Err(e),
            None => {} // skipped after another prompt failed
        }
    }
    if predictions.len() != prompts.len() {
        return Err(ProviderError::EndpointError("aborted after an earlier failure".into()));
    }
    Ok(LlmOutcome { predictions, stats })
}

/// Renders prompts from the request and queries the endpoint.
pub struct LlmPredictor {
    pub config: LlmConfig,
    pub template: PromptTemplate,
    pub demos: DemoPlan,
    pub lists: PhraseLists,
}

impl LlmPredictor {
    pub fn prompts(&self, request: &PredictionRequest) -> Result<Vec<(usize, String)>> {
        render_prompts(request, &self.template, &self.demos)
    }
}

impl Predictor for LlmPredictor {
    fn name(&self) -> &str {
        "llm"
    }

    fn predict(&self, request: &PredictionRequest) -> Result<Vec<Prediction>> {
        let prompts = self.prompts(request)?;
        Ok(predict_via_llm(&self.config, &prompts, &self.lists)?.predictions)
    }
}
