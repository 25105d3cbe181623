//! Agents: anything that turns an observation into a reply.
//!
//! Every agent answers in text, and the text goes through the same action
//! grammar whether it came from a model endpoint or a scripted bot. That keeps
//! error accounting identical across agent types.

mod bots;

use serde::{Deserialize, Serialize};

use crate::env::{EnvKind, Observation, PlayerId};
use crate::error::Result;
use crate::parse::{parse_action, ParseOutcome};
use crate::prompt::{guess_prompt, system_prompt, turn_prompt, ChatMessage};
use crate::seed::Seed;

pub use bots::{BotKind, ScriptedBot};

/// Chat-completion backend. The HTTP client lives in its own crate; tests
/// use closures or canned replies.
pub trait Completer: Send + Sync {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String>;
}

impl<F> Completer for F
where
    F: Fn(&[ChatMessage]) -> Result<String> + Send + Sync,
{
    fn complete(&self, messages: &[ChatMessage]) -> Result<String> {
        self(messages)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Scripted,
    Llm,
    Human,
}

/// Raw reply plus the messages sent to obtain it (model agents only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reply {
    pub text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub prompt: Vec<ChatMessage>,
}

impl Reply {
    pub fn text(text: impl Into<String>) -> Self {
        Reply {
            text: text.into(),
            prompt: Vec::new(),
        }
    }
}

pub trait Agent: Send {
    fn id(&self) -> &str;

    fn kind(&self) -> AgentKind;

    /// Called once per match before the first turn.
    fn begin_match(&mut self, _env: EnvKind, _seat: PlayerId, _seed: Seed) {}

    /// Replies to `obs`. `feedback` explains why the previous attempt at
    /// this turn was rejected, when retries are enabled.
    fn respond(&mut self, obs: &Observation, feedback: Option<&str>) -> Result<Reply>;

    /// Optional post-game guess of the other players' secret words
    /// (Undercover). `None` means the agent does not take part.
    fn guess(&mut self, _player: PlayerId, _others: &[PlayerId]) -> Result<Option<Reply>> {
        Ok(None)
    }
}

/// One attempt at one turn, as stored in match records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnAttempt {
    pub reply: Reply,
    pub parse: ParseOutcome,
}

/// Prompt, reply and parse for one turn.
pub fn agent_turn(agent: &mut dyn Agent, obs: &Observation, feedback: Option<&str>) -> Result<TurnAttempt> {
    let reply = agent.respond(obs, feedback)?;
    let parse = parse_action(obs.env, &reply.text, obs);
    Ok(TurnAttempt { reply, parse })
}

/// How much context a model sees each turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistoryMode {
    /// One growing conversation per match.
    #[default]
    Conversation,
    /// System prompt plus the current observation only.
    Stateless,
}

/// Agent backed by a chat-completion model.
pub struct LlmAgent {
    id: String,
    completer: Box<dyn Completer>,
    mode: HistoryMode,
    history: Vec<ChatMessage>,
    env: Option<EnvKind>,
}

impl LlmAgent {
    pub fn new(id: impl Into<String>, completer: Box<dyn Completer>, mode: HistoryMode) -> Self {
        LlmAgent {
            id: id.into(),
            completer,
            mode,
            history: Vec::new(),
            env: None,
        }
    }

    /// Sends `user` and returns the reply with the messages added this call.
    fn exchange(&mut self, env: EnvKind, user: String) -> Result<Reply> {
        let start = if self.history.is_empty() || self.mode == HistoryMode::Stateless {
            self.history = vec![ChatMessage::system(system_prompt(env)?)];
            0
        } else {
            self.history.len()
        };
        self.history.push(ChatMessage::user(user));
        let text = self.completer.complete(&self.history)?;
        let prompt = self.history[start..].to_vec();
        self.history.push(ChatMessage::assistant(text.clone()));
        Ok(Reply { text, prompt })
    }
}

impl Agent for LlmAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn kind(&self) -> AgentKind {
        AgentKind::Llm
    }

    fn begin_match(&mut self, env: EnvKind, _seat: PlayerId, _seed: Seed) {
        self.history.clear();
        self.env = Some(env);
    }

    fn respond(&mut self, obs: &Observation, feedback: Option<&str>) -> Result<Reply> {
        let mut user = turn_prompt(obs)?;
        if let Some(why) = feedback {
            user = format!("Your previous answer was rejected: {why}\n\n{user}");
        }
        self.exchange(obs.env, user)
    }

    fn guess(&mut self, player: PlayerId, others: &[PlayerId]) -> Result<Option<Reply>> {
        let names: Vec<String> = others.iter().map(|p| p.display_name()).collect();
        let user = guess_prompt(&player.display_name(), &names)?;
        let env = self.env.unwrap_or(EnvKind::Undercover);
        self.exchange(env, user).map(Some)
    }
}

/// Parses `player_k: word` lines from a guess reply. Later lines win.
pub fn parse_guesses(text: &str) -> std::collections::BTreeMap<PlayerId, String> {
    use std::sync::OnceLock;
    static RE: OnceLock<regex::Regex> = OnceLock::new();
    let re = RE.get_or_init(|| {
        regex::Regex::new(r"(?im)player[_\s]?(\d+)\s*:[ \t]*([^\n]+)").expect("static regex")
    });
    re.captures_iter(text)
        .filter_map(|c| {
            let seat: u8 = c[1].parse().ok()?;
            let word = c[2]
                .trim()
                .trim_matches(|ch: char| ch == '"' || ch == '\'' || ch == '.' || ch == '*')
                .trim()
                .to_string();
            (!word.is_empty()).then_some((PlayerId(seat), word))
        })
        .collect()
}
