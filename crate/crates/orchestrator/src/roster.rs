//! Turns roster entries into fresh agents for each match.

use std::collections::BTreeMap;
use std::sync::Arc;

use arena_core::agent::{Agent, Completer, LlmAgent, ScriptedBot};
use arena_core::prompt::ChatMessage;
use arena_llm::{ChatClient, ClientStats, ConcurrencyLimit};

use crate::config::{AgentSource, AgentSpec};
use crate::{OrchestratorError, Result};

struct SharedClient(Arc<ChatClient>);

impl Completer for SharedClient {
    fn complete(&self, messages: &[ChatMessage]) -> arena_core::Result<String> {
        Completer::complete(&*self.0, messages)
    }
}

enum Entry {
    Bot(arena_core::agent::BotKind),
    Model {
        client: Arc<ChatClient>,
        history: arena_core::agent::HistoryMode,
    },
}

/// Agent factory. Model agents share one HTTP client per endpoint and one
/// global in-flight limit; every match gets fresh agent state.
pub struct Roster {
    entries: BTreeMap<String, Entry>,
    order: Vec<String>,
    /// Agents that could not be built, with the reason.
    pub unavailable: BTreeMap<String, String>,
}

impl Roster {
    pub fn new(specs: &[AgentSpec], max_in_flight: usize) -> Self {
        let limit = Arc::new(ConcurrencyLimit::new(max_in_flight));
        let mut entries = BTreeMap::new();
        let mut unavailable = BTreeMap::new();
        let mut order = Vec::new();
        for spec in specs {
            order.push(spec.id.clone());
            let entry = match &spec.source {
                AgentSource::Bot(kind) => Entry::Bot(kind.clone()),
                AgentSource::Endpoint { endpoint, history } => match ChatClient::new(endpoint.clone()) {
                    Ok(c) => Entry::Model {
                        client: Arc::new(c.with_limit(limit.clone())),
                        history: *history,
                    },
                    Err(e) => {
                        tracing::warn!(agent = %spec.id, error = %e, "agent unavailable");
                        unavailable.insert(spec.id.clone(), e.to_string());
                        continue;
                    }
                },
            };
            entries.insert(spec.id.clone(), entry);
        }
        Roster {
            entries,
            order,
            unavailable,
        }
    }

    /// Roster ids in config order, including unavailable ones.
    pub fn ids(&self) -> &[String] {
        &self.order
    }

    pub fn is_available(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn instantiate(&self, id: &str) -> Result<Box<dyn Agent>> {
        match self.entries.get(id) {
            Some(Entry::Bot(kind)) => Ok(Box::new(ScriptedBot::new(id, kind.clone()))),
            Some(Entry::Model { client, history }) => Ok(Box::new(LlmAgent::new(
                id,
                Box::new(SharedClient(client.clone())),
                *history,
            ))),
            None => Err(OrchestratorError::UnknownAgent(id.to_string())),
        }
    }

    /// Request counters per model agent.
    pub fn request_stats(&self) -> BTreeMap<String, ClientStats> {
        self.entries
            .iter()
            .filter_map(|(id, e)| match e {
                Entry::Model { client, .. } => Some((id.clone(), client.stats())),
                Entry::Bot(_) => None,
            })
            .collect()
    }
}
