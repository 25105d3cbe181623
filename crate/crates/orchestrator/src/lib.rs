//! Tournament orchestration: configuration, scheduling to rating
//! convergence, the crash-safe store, and the HTTP gateway for human play.

pub mod config;
pub mod gateway;
pub mod roster;
pub mod schedule;
pub mod store;
pub mod tournament;

pub use config::{AgentSource, AgentSpec, Execution, TournamentConfig, UndercoverMode};
pub use roster::Roster;
pub use schedule::{PairingPolicy, Pairing, Scheduler};
pub use store::{LeaderboardFile, Reconciled, Store};
pub use gateway::{router, serve, GatewayState};
pub use tournament::{run_tournament, TournamentReport};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("store {path}: {reason}")]
    Store { path: PathBuf, reason: String },

    #[error(transparent)]
    Arena(#[from] arena_core::ArenaError),

    #[error(transparent)]
    Llm(#[from] arena_llm::LlmError),

    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
}

impl OrchestratorError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| OrchestratorError::Io { path, source }
    }
}

pub type Result<T, E = OrchestratorError> = std::result::Result<T, E>;
