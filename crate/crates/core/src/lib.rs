//! Seedable multi-agent game environments for evaluating language-model
//! agents, with TrueSkill rating, prompt/action grammars, a match loop and
//! the analysis metrics used to study agent behavior.

pub mod agent;
pub mod analysis;
pub mod cards;
pub mod env;
pub mod error;
pub mod games;
pub mod parse;
pub mod prompt;
pub mod rating;
pub mod record;
pub mod runner;
pub mod seed;
pub mod words;

pub use env::{reset, step, Action, ActionSet, ActionSpec, EnvConfig, EnvKind, GameState, Observation, Outcome, PlayerId, StepResult};
pub use error::{ArenaError, Result};
pub use record::MatchRecord;
pub use runner::{replay, run_match, MatchOptions, MatchSession};
pub use seed::Seed;
