//! Prompt templates and chat-message assembly.
//!
//! Templates are plain text files keyed by environment and role
//! (`system`, `observation[_variant]`, `action[_variant]`, `guess`).
//! Placeholders are `{name}`; rendering fails on any unbound name.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::env::{EnvKind, Observation};
use crate::error::{ArenaError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "system".into(),
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "user".into(),
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "assistant".into(),
            content: content.into(),
        }
    }
}

macro_rules! templates {
    ($($env:literal / $role:literal),* $(,)?) => {
        &[$(($env, $role, include_str!(concat!("../templates/", $env, "/", $role, ".txt")))),*]
    };
}

const TEMPLATES: &[(&str, &str, &str)] = templates![
    "tictactoe" / "system",
    "tictactoe" / "observation_hint",
    "tictactoe" / "observation_nohint",
    "tictactoe" / "action",
    "connectfour" / "system",
    "connectfour" / "observation_hint",
    "connectfour" / "observation_nohint",
    "connectfour" / "action",
    "texas_holdem" / "system",
    "texas_holdem" / "observation",
    "texas_holdem" / "action",
    "undercover" / "system",
    "undercover" / "observation_clue",
    "undercover" / "observation_accusation",
    "undercover" / "action_clue",
    "undercover" / "action_accusation",
    "undercover" / "guess",
    "bargain" / "system",
    "bargain" / "observation_open",
    "bargain" / "observation_reply",
    "bargain" / "action",
    "bid" / "system",
    "bid" / "observation",
    "bid" / "action",
    "hanabi" / "system",
    "hanabi" / "observation",
    "hanabi" / "action",
];

/// Raw template body for `env` and `role` (e.g. `observation_hint`).
pub fn template(env: EnvKind, role: &str) -> Result<&'static str> {
    TEMPLATES
        .iter()
        .find(|(e, r, _)| *e == env.slug() && *r == role)
        .map(|(_, _, body)| body.trim_end_matches('\n'))
        .ok_or_else(|| ArenaError::UnknownTemplate(format!("{}/{role}", env.slug())))
}

/// Most specific template among `role_variant` and `role`.
fn template_for(env: EnvKind, role: &str, variant: &str) -> Result<&'static str> {
    if !variant.is_empty() {
        if let Ok(t) = template(env, &format!("{role}_{variant}")) {
            return Ok(t);
        }
    }
    template(env, role)
}

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{([A-Za-z_][A-Za-z0-9_]*)\}").expect("static regex"))
}

/// Names of every placeholder in `body`, in order of first appearance.
pub fn placeholders(body: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for cap in placeholder_re().captures_iter(body) {
        let name = cap[1].to_string();
        if !out.contains(&name) {
            out.push(name);
        }
    }
    out
}

pub fn render(body: &str, bindings: &BTreeMap<String, String>) -> Result<String> {
    if let Some(missing) = placeholders(body)
        .into_iter()
        .find(|p| !bindings.contains_key(p))
    {
        return Err(ArenaError::MissingBinding(missing));
    }
    Ok(placeholder_re()
        .replace_all(body, |cap: &regex::Captures<'_>| bindings[&cap[1]].clone())
        .into_owned())
}

/// Observation text followed by the action instruction for one turn.
pub fn turn_prompt(obs: &Observation) -> Result<String> {
    let bindings = bindings_for(obs);
    let observation = render(template_for(obs.env, "observation", &obs.variant)?, &bindings)?;
    let action = render(template_for(obs.env, "action", &obs.variant)?, &bindings)?;
    Ok(format!("{observation}\n\n{action}"))
}

/// The observation part of a turn prompt, without the action instruction.
pub fn observation_prompt(obs: &Observation) -> Result<String> {
    render(template_for(obs.env, "observation", &obs.variant)?, &bindings_for(obs))
}

fn bindings_for(obs: &Observation) -> BTreeMap<String, String> {
    let mut b = obs.text_blocks.clone();
    b.entry("player_name".into())
        .or_insert_with(|| obs.viewer.display_name());
    b
}

pub fn system_prompt(env: EnvKind) -> Result<String> {
    Ok(template(env, "system")?.to_string())
}

/// Stateless prompt for one turn: system message plus the turn's user message.
pub fn build_prompt(obs: &Observation) -> Result<Vec<ChatMessage>> {
    Ok(vec![
        ChatMessage::system(system_prompt(obs.env)?),
        ChatMessage::user(turn_prompt(obs)?),
    ])
}

/// Post-game guess prompt for Undercover.
pub fn guess_prompt(player_name: &str, others: &[String]) -> Result<String> {
    let mut b = BTreeMap::new();
    b.insert("player_name".to_string(), player_name.to_string());
    b.insert("others".to_string(), others.join(", "));
    render(template(EnvKind::Undercover, "guess")?, &b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_env_has_system_prompt() {
        for env in EnvKind::ALL {
            assert!(system_prompt(env).unwrap().starts_with("You "));
        }
    }

    #[test]
    fn missing_binding_is_error() {
        let b = BTreeMap::new();
        assert_eq!(
            render("hi {who}", &b),
            Err(ArenaError::MissingBinding("who".into()))
        );
    }

    #[test]
    fn renders_dollar_prefix() {
        let mut b = BTreeMap::new();
        b.insert("value".to_string(), "1.50".to_string());
        assert_eq!(render("is ${value}.", &b).unwrap(), "is $1.50.");
    }
}
