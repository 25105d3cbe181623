//! OpenAI-compatible chat-completions client for model-backed agents.
//!
//! API keys are read from the environment variable an endpoint names, never
//! from configuration files.

mod client;
mod endpoint;
mod limit;
pub mod mock;

pub use client::{ChatClient, ClientStats};
pub use endpoint::{AgentEndpoint, RetryPolicy};
pub use limit::ConcurrencyLimit;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("endpoint config: {0}")]
    Config(String),

    #[error("environment variable `{0}` is not set")]
    MissingKey(String),

    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },

    #[error("rate limited on all {attempts} attempts")]
    RateLimited { attempts: u32 },

    #[error("request timed out")]
    Timeout,

    #[error("transport: {0}")]
    Transport(String),

    #[error("malformed response: {0}")]
    Malformed(String),
}

impl LlmError {
    /// Whether another attempt could succeed.
    pub fn is_retryable(&self) -> bool {
        match self {
            LlmError::Http { status, .. } => *status == 429 || *status >= 500,
            LlmError::RateLimited { .. } | LlmError::Timeout | LlmError::Transport(_) => true,
            _ => false,
        }
    }
}

pub type Result<T, E = LlmError> = std::result::Result<T, E>;
