//! Tournament configuration, read from a TOML file.
//!
//! Endpoint credentials are never part of the file: an endpoint names the
//! environment variable that holds its key.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use arena_core::agent::{BotKind, HistoryMode};
use arena_core::rating::{ConvergenceParams, RatingConfig};
use arena_core::record::IllegalActionPolicy;
use arena_core::{EnvConfig, EnvKind, MatchOptions};
use arena_llm::AgentEndpoint;
use serde::{Deserialize, Deserializer, Serialize};

use crate::schedule::PairingPolicy;
use crate::{OrchestratorError, Result};

pub const TOURNAMENT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TournamentConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    /// Environments to play; any spelling accepted by `EnvKind::from_str`.
    #[serde(deserialize_with = "env_list")]
    pub envs: Vec<EnvKind>,
    pub agents: Vec<AgentSpec>,
    #[serde(default)]
    pub pairing: PairingPolicy,
    /// `min_games` is the per-agent floor in every environment.
    #[serde(default)]
    pub convergence: ConvergenceParams,
    /// Hard cap on games per environment.
    #[serde(default = "default_max_games")]
    pub max_games: u64,
    #[serde(default)]
    pub policy: IllegalActionPolicy,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub env_config: EnvConfig,
    #[serde(default)]
    pub rating: RatingConfig,
    #[serde(default)]
    pub undercover: UndercoverMode,
    #[serde(default)]
    pub execution: Execution,
    /// Post-game word guesses in Undercover.
    #[serde(default)]
    pub guess_phase: bool,
    /// Stamp wall-clock times on records; reruns then differ in those fields.
    #[serde(default)]
    pub record_timing: bool,
}

fn schema_version() -> u32 {
    TOURNAMENT_SCHEMA_VERSION
}

fn default_max_games() -> u64 {
    2_000
}

fn default_output() -> PathBuf {
    PathBuf::from("arena-out")
}

fn env_list<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<EnvKind>, D::Error> {
    Vec::<String>::deserialize(d)?
        .iter()
        .map(|s| s.parse().map_err(serde::de::Error::custom))
        .collect()
}

/// One roster entry: a scripted bot or a chat-completions endpoint.
///
/// ```toml
/// [[agents]]
/// id = "random"
/// bot = "random"
///
/// [[agents]]
/// id = "gpt"
/// endpoint = { base_url = "https://api.openai.com/v1", model = "gpt-4o", api_key_env = "OPENAI_API_KEY" }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub id: String,
    #[serde(flatten)]
    pub source: AgentSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AgentSource {
    Endpoint {
        endpoint: AgentEndpoint,
        #[serde(default)]
        history: HistoryMode,
    },
    Bot(BotKind),
}

impl AgentSpec {
    pub fn bot(id: impl Into<String>, kind: BotKind) -> Self {
        AgentSpec {
            id: id.into(),
            source: AgentSource::Bot(kind),
        }
    }
}

/// Undercover is played in its own mode: each evaluated agent takes the
/// undercover role against reference agents in every other seat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UndercoverMode {
    pub games_per_agent: u64,
    /// Reference agent ids, cycled over the four civilian seats.
    pub reference: Vec<String>,
    /// Evaluated agent ids; empty means every non-reference agent.
    pub evaluated: Vec<String>,
}

impl Default for UndercoverMode {
    fn default() -> Self {
        UndercoverMode {
            games_per_agent: 100,
            reference: Vec::new(),
            evaluated: Vec::new(),
        }
    }
}

/// Parallelism knobs. Results do not depend on `workers`; they do depend
/// on `batch`, the number of pairings drawn per scheduling round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Execution {
    pub workers: usize,
    pub batch: usize,
    /// Global cap on in-flight model requests.
    pub max_in_flight_requests: usize,
}

impl Default for Execution {
    fn default() -> Self {
        Execution {
            workers: 4,
            batch: 8,
            max_in_flight_requests: 8,
        }
    }
}

impl TournamentConfig {
    pub fn new(envs: Vec<EnvKind>, agents: Vec<AgentSpec>) -> Self {
        TournamentConfig {
            schema_version: TOURNAMENT_SCHEMA_VERSION,
            envs,
            agents,
            pairing: PairingPolicy::default(),
            convergence: ConvergenceParams::default(),
            max_games: default_max_games(),
            policy: IllegalActionPolicy::default(),
            seed: 0,
            output: default_output(),
            env_config: EnvConfig::default(),
            rating: RatingConfig::default(),
            undercover: UndercoverMode::default(),
            execution: Execution::default(),
            guess_phase: false,
            record_timing: false,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: TournamentConfig =
            toml::from_str(text).map_err(|e| OrchestratorError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(OrchestratorError::io(path))?;
        Self::from_toml(&text)
    }

    pub fn match_options(&self) -> MatchOptions {
        MatchOptions {
            config: self.env_config.clone(),
            policy: self.policy,
            guess_phase: self.guess_phase,
        }
    }

    pub fn agent(&self, id: &str) -> Option<&AgentSpec> {
        self.agents.iter().find(|a| a.id == id)
    }

    /// Undercover references, resolved.
    pub fn undercover_reference(&self) -> Vec<String> {
        self.undercover.reference.clone()
    }

    /// Undercover evaluated agents, resolved.
    pub fn undercover_evaluated(&self) -> Vec<String> {
        if !self.undercover.evaluated.is_empty() {
            return self.undercover.evaluated.clone();
        }
        self.agents
            .iter()
            .map(|a| a.id.clone())
            .filter(|id| !self.undercover.reference.contains(id))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(OrchestratorError::Config(m));
        if self.schema_version != TOURNAMENT_SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {}", self.schema_version));
        }
        if self.envs.is_empty() {
            return bad("`envs` is empty".into());
        }
        let mut ids = BTreeSet::new();
        for a in &self.agents {
            if a.id.trim().is_empty() {
                return bad("agent with an empty id".into());
            }
            if !ids.insert(a.id.as_str()) {
                return bad(format!("duplicate agent id `{}`", a.id));
            }
        }
        if self.execution.batch == 0 || self.execution.workers == 0 {
            return bad("execution.batch and execution.workers must be positive".into());
        }
        for &env in &self.envs {
            self.env_config.validate(env)?;
            if env == EnvKind::Undercover {
                let reference = self.undercover_reference();
                if reference.is_empty() {
                    return bad("undercover needs at least one reference agent".into());
                }
                for id in reference.iter().chain(&self.undercover_evaluated()) {
                    if !ids.contains(id.as_str()) {
                        return bad(format!("undercover agent `{id}` is not in the roster"));
                    }
                }
                if self.undercover_evaluated().is_empty() {
                    return bad("undercover has no evaluated agent".into());
                }
            } else if self.agents.len() < env.seats() {
                return bad(format!(
                    "{env} needs {} agents, roster has {}",
                    env.seats(),
                    self.agents.len()
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
envs = ["tictactoe", "connect_four", "undercover"]
seed = 7
max_games = 300

[convergence]
min_games = 20

[[agents]]
id = "rand"
bot = "random"

[[agents]]
id = "eq"
bot = "equity_threshold"
samples = 200

[[agents]]
id = "bidder"
bot = "bid_fraction"
fraction = 0.5

[[agents]]
id = "model"
endpoint = { base_url = "http://localhost:9/v1", model = "m", api_key_env = "SOME_KEY" }
history = "stateless"

[undercover]
games_per_agent = 10
reference = ["rand"]
"#;

    #[test]
    fn sample_parses() {
        let c = TournamentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(c.envs, [EnvKind::TicTacToe, EnvKind::ConnectFour, EnvKind::Undercover]);
        assert_eq!(c.convergence.min_games, 20);
        assert_eq!(c.convergence.sigma_threshold, 1.0);
        assert_eq!(c.agents[1].source, AgentSource::Bot(BotKind::EquityThreshold { samples: 200 }));
        assert_eq!(c.agents[2].source, AgentSource::Bot(BotKind::BidFraction { fraction: 0.5 }));
        match &c.agents[3].source {
            AgentSource::Endpoint { endpoint, history } => {
                assert_eq!(endpoint.temperature, 0.0);
                assert_eq!(endpoint.api_key_env.as_deref(), Some("SOME_KEY"));
                assert_eq!(*history, HistoryMode::Stateless);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(c.undercover_evaluated(), ["eq", "bidder", "model"]);
        assert!(c.env_config.hints_enabled);
    }

    #[test]
    fn defaults_follow_protocol() {
        let c = TournamentConfig::new(vec![EnvKind::TicTacToe], vec![]);
        assert_eq!(c.convergence.min_games, 50);
        assert_eq!(c.undercover.games_per_agent, 100);
    }

    #[test]
    fn rejects_bad_configs() {
        let dup = "envs = [\"bid\"]\n[[agents]]\nid = \"a\"\nbot = \"random\"\n[[agents]]\nid = \"a\"\nbot = \"random\"\n";
        assert!(TournamentConfig::from_toml(dup).is_err());
        let lonely = "envs = [\"bid\"]\n[[agents]]\nid = \"a\"\nbot = \"random\"\n";
        assert!(TournamentConfig::from_toml(lonely).is_err());
        let unknown_env = "envs = [\"chess\"]\nagents = []\n";
        assert!(TournamentConfig::from_toml(unknown_env).is_err());
        let no_ref = "envs = [\"undercover\"]\n[[agents]]\nid = \"a\"\nbot = \"clue_bot\"\n";
        assert!(TournamentConfig::from_toml(no_ref).is_err());
        let typo = "envs = [\"bid\"]\nagents = []\nseeds = 3\n";
        assert!(TournamentConfig::from_toml(typo).is_err());
    }
}
