use super::backend::{BackendError, BackendStats, DecisionBackend};
use super::{build_prompt, parse_response, whitespace_tokens, DecisionRequest, DecisionResponse};
use crate::social::{build_conversation_prompt, parse_exchange, ConversationTask, Exchange};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

/// Environment variable holding the bearer token for the remote endpoint.
pub const API_KEY_ENV: &str = "CITYSIM_API_KEY";

const DECIDE_SYSTEM: &str = "You choose the next activity for a city resident. Reply with two integers only.";
const CHAT_SYSTEM: &str = "You summarise what two residents tell each other. Reply in the requested format only.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RemoteConfig {
    /// Full URL of an OpenAI-compatible chat-completions endpoint.
    pub endpoint: String,
    pub model: String,
    pub timeout_secs: u64,
    /// Extra attempts after the first failure.
    pub retries: u32,
    /// Concurrent requests per batch.
    pub max_parallel: usize,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://127.0.0.1:8000/v1/chat/completions".into(),
            model: "default".into(),
            timeout_secs: 30,
            retries: 2,
            max_parallel: 8,
        }
    }
}

#[derive(Default)]
struct Counters {
    requests: AtomicU64,
    http_calls: AtomicU64,
    failures: AtomicU64,
    prompt_tokens: AtomicU64,
    completion_tokens: AtomicU64,
}

/// Chat-completions client. Entries of a batch run concurrently, up to
/// `max_parallel` at a time.
pub struct RemoteBackend {
    config: RemoteConfig,
    agent: ureq::Agent,
    api_key: Option<String>,
    counters: Counters,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Self {
        let api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        Self::with_key(config, api_key)
    }

    pub fn with_key(config: RemoteConfig, api_key: Option<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs.max(1))))
            .build()
            .into();
        Self {
            config,
            agent,
            api_key,
            counters: Counters::default(),
        }
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn post_once(&self, system: &str, prompt: &str) -> Result<String, BackendError> {
        let body = json!({
            "model": self.config.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": prompt},
            ],
        });
        let mut req = self.agent.post(&self.config.endpoint);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        self.counters.http_calls.fetch_add(1, Ordering::Relaxed);
        let mut resp = req.send_json(&body).map_err(|e| match e {
            ureq::Error::StatusCode(code) => BackendError::Status(code),
            other => BackendError::Transport(other.to_string()),
        })?;
        let v: Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| BackendError::Malformed(e.to_string()))?;
        let text = v["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| BackendError::Malformed("missing choices[0].message.content".into()))?
            .to_string();
        let usage = &v["usage"];
        let prompt_tokens = usage["prompt_tokens"]
            .as_u64()
            .unwrap_or((whitespace_tokens(system) + whitespace_tokens(prompt)) as u64);
        let completion_tokens = usage["completion_tokens"]
            .as_u64()
            .unwrap_or(whitespace_tokens(&text) as u64);
        self.counters.prompt_tokens.fetch_add(prompt_tokens, Ordering::Relaxed);
        self.counters.completion_tokens.fetch_add(completion_tokens, Ordering::Relaxed);
        Ok(text)
    }

    /// Posts with retries on transport and status errors.
    fn post(&self, system: &str, prompt: &str) -> Result<String, BackendError> {
        self.counters.requests.fetch_add(1, Ordering::Relaxed);
        let mut last = None;
        for attempt in 0..=self.config.retries {
            match self.post_once(system, prompt) {
                Ok(text) => return Ok(text),
                Err(e) => {
                    log::debug!("remote attempt {} failed: {e}", attempt + 1);
                    last = Some(e);
                }
            }
        }
        self.counters.failures.fetch_add(1, Ordering::Relaxed);
        Err(last.expect("at least one attempt"))
    }

    fn parallel<T: Sync, R: Send>(&self, items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
        let width = self.config.max_parallel.max(1);
        let mut out = Vec::with_capacity(items.len());
        for chunk in items.chunks(width) {
            std::thread::scope(|scope| {
                let handles: Vec<_> = chunk.iter().map(|it| scope.spawn(|| f(it))).collect();
                out.extend(handles.into_iter().map(|h| h.join().expect("request worker panicked")));
            });
        }
        out
    }
}

impl DecisionBackend for RemoteBackend {
    fn name(&self) -> &str {
        "remote"
    }

    fn decide_batch(&self, batch: &[DecisionRequest]) -> Vec<Result<DecisionResponse, BackendError>> {
        self.parallel(batch, |req| {
            let text = self.post(DECIDE_SYSTEM, &build_prompt(req))?;
            Ok(parse_response(&text, req)?)
        })
    }

    fn communicate_batch(&self, batch: &[ConversationTask]) -> Vec<Result<Exchange, BackendError>> {
        self.parallel(batch, |task| {
            let text = self.post(CHAT_SYSTEM, &build_conversation_prompt(task))?;
            parse_exchange(&text).map_err(BackendError::Malformed)
        })
    }

    fn stats(&self) -> BackendStats {
        let c = &self.counters;
        BackendStats {
            requests: c.requests.load(Ordering::Relaxed),
            http_calls: c.http_calls.load(Ordering::Relaxed),
            failures: c.failures.load(Ordering::Relaxed),
            prompt_tokens: c.prompt_tokens.load(Ordering::Relaxed),
            completion_tokens: c.completion_tokens.load(Ordering::Relaxed),
        }
    }
}
