use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use arena_core::agent::Completer;
use arena_core::prompt::ChatMessage;
use arena_core::ArenaError;
use reqwest::blocking::Client;
use reqwest::header::RETRY_AFTER;
use serde::{Deserialize, Serialize};

use crate::endpoint::AgentEndpoint;
use crate::limit::{ConcurrencyLimit, Pacer};
use crate::{LlmError, Result};

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_tokens: Option<u32>,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    content: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClientStats {
    /// HTTP requests sent, retries included.
    pub requests: u64,
    pub completions: u64,
    pub failures: u64,
}

pub struct ChatClient {
    endpoint: AgentEndpoint,
    http: Client,
    key: Option<String>,
    limit: Option<Arc<ConcurrencyLimit>>,
    pacer: Pacer,
    requests: AtomicU64,
    completions: AtomicU64,
    failures: AtomicU64,
}

impl ChatClient {
    /// Builds a client, reading the API key from the endpoint's named
    /// environment variable.
    pub fn new(endpoint: AgentEndpoint) -> Result<Self> {
        let key = match &endpoint.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| LlmError::MissingKey(var.clone()))?),
            None => None,
        };
        Self::with_key(endpoint, key)
    }

    pub fn with_key(endpoint: AgentEndpoint, key: Option<String>) -> Result<Self> {
        if !(endpoint.base_url.starts_with("http://") || endpoint.base_url.starts_with("https://")) {
            return Err(LlmError::Config(format!("base_url `{}` is not http(s)", endpoint.base_url)));
        }
        if !(0.0..=2.0).contains(&endpoint.temperature) {
            return Err(LlmError::Config("temperature must be in [0, 2]".into()));
        }
        let http = Client::builder()
            .timeout(Duration::from_secs(endpoint.timeout_secs.max(1)))
            .build()
            .map_err(|e| LlmError::Config(e.to_string()))?;
        Ok(ChatClient {
            pacer: Pacer::per_minute(endpoint.requests_per_minute),
            endpoint,
            http,
            key,
            limit: None,
            requests: AtomicU64::new(0),
            completions: AtomicU64::new(0),
            failures: AtomicU64::new(0),
        })
    }

    /// Shares a global in-flight cap with other clients.
    pub fn with_limit(mut self, limit: Arc<ConcurrencyLimit>) -> Self {
        self.limit = Some(limit);
        self
    }

    pub fn endpoint(&self) -> &AgentEndpoint {
        &self.endpoint
    }

    pub fn stats(&self) -> ClientStats {
        ClientStats {
            requests: self.requests.load(Ordering::Relaxed),
            completions: self.completions.load(Ordering::Relaxed),
            failures: self.failures.load(Ordering::Relaxed),
        }
    }

    /// Sends the conversation and returns the assistant text, retrying
    /// rate limits, server errors and transport failures with backoff.
    pub fn complete(&self, messages: &[ChatMessage]) -> Result<String> {
        let policy = self.endpoint.retry;
        let mut rate_limited = 0u32;
        let mut attempt = 0u32;
        loop {
            let (err, retry_after) = match self.attempt(messages) {
                Ok(text) => {
                    self.completions.fetch_add(1, Ordering::Relaxed);
                    return Ok(text);
                }
                Err(x) => x,
            };
            if matches!(err, LlmError::Http { status: 429, .. }) {
                rate_limited += 1;
            }
            if !err.is_retryable() || attempt >= policy.max_retries {
                self.failures.fetch_add(1, Ordering::Relaxed);
                let attempts = attempt + 1;
                return Err(if rate_limited == attempts {
                    LlmError::RateLimited { attempts }
                } else {
                    err
                });
            }
            let wait = retry_after
                .unwrap_or_else(|| policy.delay(attempt))
                .min(Duration::from_millis(policy.max_delay_ms));
            tracing::warn!(model = %self.endpoint.model, attempt, ?wait, error = %err, "retrying");
            std::thread::sleep(wait);
            attempt += 1;
        }
    }

    fn attempt(&self, messages: &[ChatMessage]) -> std::result::Result<String, (LlmError, Option<Duration>)> {
        let _permit = self.limit.as_ref().map(|l| l.acquire());
        self.pacer.wait();
        let body = ChatRequest {
            model: &self.endpoint.model,
            messages,
            temperature: self.endpoint.temperature,
            max_tokens: self.endpoint.max_tokens,
        };
        let mut req = self.http.post(self.endpoint.url()).json(&body);
        if let Some(key) = &self.key {
            req = req.bearer_auth(key);
        }
        self.requests.fetch_add(1, Ordering::Relaxed);
        tracing::debug!(model = %self.endpoint.model, messages = messages.len(), "chat request");
        let resp = req.send().map_err(|e| {
            let err = if e.is_timeout() {
                LlmError::Timeout
            } else {
                LlmError::Transport(e.to_string())
            };
            (err, None)
        })?;
        let status = resp.status();
        let retry_after = resp
            .headers()
            .get(RETRY_AFTER)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Duration::from_secs);
        let text = resp
            .text()
            .map_err(|e| (LlmError::Transport(e.to_string()), None))?;
        if !status.is_success() {
            return Err((
                LlmError::Http {
                    status: status.as_u16(),
                    body: text.chars().take(500).collect(),
                },
                retry_after,
            ));
        }
        let parsed: ChatResponse =
            serde_json::from_str(&text).map_err(|e| (LlmError::Malformed(e.to_string()), None))?;
        let content = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| (LlmError::Malformed("no message content".into()), None))?;
        tracing::debug!(model = %self.endpoint.model, chars = content.len(), "chat response");
        Ok(content)
    }
}

impl Completer for ChatClient {
    fn complete(&self, messages: &[ChatMessage]) -> arena_core::Result<String> {
        ChatClient::complete(self, messages).map_err(|e| ArenaError::Transport(e.to_string()))
    }
}
