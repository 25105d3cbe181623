//! Match records: one JSON object per match, appended to a JSON Lines file.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::agent::{AgentKind, TurnAttempt};
use crate::env::{ActionSpec, EnvConfig, EnvKind, GameState, Observation, Outcome, PlayerId};
use crate::error::{ArenaError, Result};
use crate::seed::Seed;

pub const RECORD_SCHEMA_VERSION: u32 = 1;

/// What to do when an agent's reply is not a legal action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct IllegalActionPolicy {
    pub max_retries: u32,
    pub on_exhaustion: Exhaustion,
}

impl Default for IllegalActionPolicy {
    fn default() -> Self {
        IllegalActionPolicy {
            max_retries: 0,
            on_exhaustion: Exhaustion::Forfeit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exhaustion {
    #[default]
    Forfeit,
    RandomLegal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchStatus {
    InProgress,
    Completed,
    /// Ended by a forfeit under the illegal-action policy.
    IllegalTerminated,
    /// Transport failure; kept for audit, never rated.
    Aborted,
}

/// How a turn's action was finally decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    Parsed,
    RandomFallback,
    Forfeit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnEntry {
    pub ply: u32,
    pub actor: PlayerId,
    pub observation: Observation,
    pub attempts: Vec<TurnAttempt>,
    pub resolution: Resolution,
    /// Action applied to the state; absent on forfeit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub applied: Option<ActionSpec>,
    pub rewards: Vec<f64>,
}

impl TurnEntry {
    /// Whether any attempt this turn failed to yield a legal action.
    pub fn had_violation(&self) -> bool {
        self.attempts.iter().any(|a| a.parse.action().is_none())
    }
}

/// Post-game word guesses of one seat (Undercover).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuessEntry {
    pub seat: PlayerId,
    pub raw: String,
    pub guesses: BTreeMap<PlayerId, String>,
    pub truth: BTreeMap<PlayerId, String>,
}

/// Wall-clock metadata. Omitted unless requested so reruns stay
/// byte-identical.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub schema_version: u32,
    pub id: String,
    pub env: EnvKind,
    pub seed: Seed,
    pub config: EnvConfig,
    pub policy: IllegalActionPolicy,
    /// Agent id per seat.
    pub agents: Vec<String>,
    pub agent_kinds: Vec<AgentKind>,
    pub human_participant: bool,
    pub turns: Vec<TurnEntry>,
    pub status: MatchStatus,
    pub outcome: Outcome,
    /// Total reward per seat.
    pub rewards: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violator: Option<PlayerId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abort_reason: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub guesses: Vec<GuessEntry>,
    pub final_state: GameState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl MatchRecord {
    /// Whether this match may feed model ratings.
    pub fn is_rateable(&self) -> bool {
        !self.human_participant
            && matches!(self.status, MatchStatus::Completed | MatchStatus::IllegalTerminated)
    }

    pub fn seat_of(&self, agent: &str) -> Vec<PlayerId> {
        self.agents
            .iter()
            .enumerate()
            .filter(|(_, a)| a.as_str() == agent)
            .map(|(i, _)| PlayerId::from(i))
            .collect()
    }

    pub fn to_json_line(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| ArenaError::CorruptRecord(e.to_string()))
    }
}

pub fn write_jsonl<W: Write>(mut w: W, records: &[MatchRecord]) -> Result<()> {
    for r in records {
        writeln!(w, "{}", r.to_json_line()?).map_err(|e| ArenaError::Transport(e.to_string()))?;
    }
    Ok(())
}

/// Records read from a JSON Lines stream plus any unreadable trailing line.
#[derive(Debug, Default)]
pub struct LoadedRecords {
    pub records: Vec<MatchRecord>,
    /// 1-based line number and content of a corrupt final line.
    pub truncated_tail: Option<(usize, String)>,
}

/// Reads records. A corrupt last line (a torn write) is reported and
/// skipped; corruption anywhere else is an error.
pub fn read_jsonl<R: BufRead>(r: R) -> Result<LoadedRecords> {
    let lines: Vec<String> = r
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| ArenaError::CorruptRecord(e.to_string()))?;
    let last = lines.iter().rposition(|l| !l.trim().is_empty());
    let mut out = LoadedRecords::default();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<MatchRecord>(line) {
            Ok(rec) => out.records.push(rec),
            Err(_) if Some(i) == last => out.truncated_tail = Some((i + 1, line.clone())),
            Err(e) => {
                return Err(ArenaError::CorruptRecord(format!("line {}: {e}", i + 1)));
            }
        }
    }
    Ok(out)
}
