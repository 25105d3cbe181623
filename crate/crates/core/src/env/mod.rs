//! Uniform turn-based multi-agent environment contract.
//!
//! Every game exposes the same surface: [`reset`] builds the initial state
//! from `(env, seed, config)`, [`GameState::observe`] produces the viewer's
//! [`Observation`], and [`step`] advances exactly one ply. Simultaneous-move
//! games (Bid) are modeled as one ply per player with hidden observations.

mod state;
mod types;

pub use state::{reset, step, EnvConfig, GameBody, GameState};
pub use types::{
    Action, ActionSet, ActionSpec, EnvKind, Observation, Outcome, PlayerId, StepResult,
};
