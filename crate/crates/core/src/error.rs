use thiserror::Error;

use crate::env::{EnvKind, PlayerId};

/// Errors raised by environments, the match loop and the analyzers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArenaError {
    #[error("invalid config for {env}: {reason}")]
    InvalidConfig { env: EnvKind, reason: String },

    #[error("it is not {actor}'s turn")]
    WrongActor { actor: PlayerId },

    #[error("illegal action `{surface}`: {reason}")]
    IllegalAction { surface: String, reason: String },

    #[error("action belongs to {got}, state is {expected}")]
    EnvMismatch { expected: EnvKind, got: EnvKind },

    #[error("game is already over")]
    Terminal,

    #[error("duplicate card {0}")]
    DuplicateCard(String),

    #[error("invalid card `{0}`")]
    InvalidCard(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("corrupt record: {0}")]
    CorruptRecord(String),

    #[error("missing binding for placeholder `{0}`")]
    MissingBinding(String),

    #[error("unknown template `{0}`")]
    UnknownTemplate(String),

    #[error("agent transport failure: {0}")]
    Transport(String),

    #[error("{0}")]
    Empty(&'static str),
}

pub type Result<T, E = ArenaError> = std::result::Result<T, E>;
