//! On-disk tournament store.
//!
//! ```text
//! <dir>/records.jsonl     one MatchRecord per line, append-only
//! <dir>/ratings.json      rating update log plus periodic snapshots
//! <dir>/leaderboard.json  ranked tables with origin and normalized scores
//! <dir>/leaderboard.txt   the same, for people
//! <dir>/config.json       snapshot of the tournament config
//! <dir>/analysis/         analysis outputs
//! ```
//!
//! Records are the source of truth. A record is appended and synced before
//! any rating update that cites it; ratings are rewritten atomically. After
//! a crash, [`Store::reconcile`] applies every rateable record missing from
//! the log, which is a no-op for records already applied.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use arena_core::rating::{
    metric_for, normalize_scores, GameResult, Leaderboard, MetricKind, RatingConfig, RatingEvent, Standing,
};
use arena_core::record::{read_jsonl, LoadedRecords};
use arena_core::{EnvKind, MatchRecord};
use serde::{Deserialize, Serialize};

use crate::{OrchestratorError, Result};

pub const RECORDS: &str = "records.jsonl";
pub const RATINGS: &str = "ratings.json";
pub const LEADERBOARD: &str = "leaderboard.json";
pub const LEADERBOARD_TEXT: &str = "leaderboard.txt";
pub const CONFIG_SNAPSHOT: &str = "config.json";
pub const ANALYSIS: &str = "analysis";

pub const STORE_SCHEMA_VERSION: u32 = 1;
const SNAPSHOT_EVERY: usize = 50;

/// Standings after the first `events` log entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub events: usize,
    pub standings: BTreeMap<EnvKind, BTreeMap<String, Standing>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingsFile {
    pub schema_version: u32,
    pub config: RatingConfig,
    pub log: Vec<RatingEvent>,
    pub snapshots: Vec<Snapshot>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub agent: String,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized: Option<f64>,
    pub mu: f64,
    pub sigma: f64,
    pub games: u64,
    pub wins: u64,
    pub draws: u64,
    pub losses: u64,
    pub average_reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvBoard {
    pub metric: MetricKind,
    pub rows: Vec<LeaderboardRow>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LeaderboardFile {
    pub schema_version: u32,
    pub envs: BTreeMap<EnvKind, EnvBoard>,
    /// Agents dropped during the run, with the reason.
    #[serde(default)]
    pub inactive: BTreeMap<String, String>,
}

impl LeaderboardFile {
    /// Ranked tables. Agents that never played an evaluated seat are left out.
    pub fn build(lb: &Leaderboard, inactive: &BTreeMap<String, String>) -> Self {
        let mut envs = BTreeMap::new();
        for &env in lb.standings.keys() {
            let ranked: Vec<_> = lb.ranked(env).into_iter().filter(|(_, s, _)| s.games > 0).collect();
            let origin: BTreeMap<String, f64> = ranked.iter().map(|(a, _, x)| (a.clone(), *x)).collect();
            let norm = normalize_scores(&origin).ok();
            let rows = ranked
                .into_iter()
                .map(|(agent, s, score)| LeaderboardRow {
                    normalized: norm.as_ref().map(|n| n[&agent]),
                    agent,
                    score,
                    mu: s.rating.mu,
                    sigma: s.rating.sigma,
                    games: s.games,
                    wins: s.wins,
                    draws: s.draws,
                    losses: s.losses,
                    average_reward: s.average_reward(),
                })
                .collect();
            envs.insert(env, EnvBoard { metric: metric_for(env), rows });
        }
        LeaderboardFile {
            schema_version: STORE_SCHEMA_VERSION,
            envs,
            inactive: inactive.clone(),
        }
    }

    pub fn origin_table(&self) -> BTreeMap<EnvKind, BTreeMap<String, f64>> {
        self.envs
            .iter()
            .map(|(e, b)| (*e, b.rows.iter().map(|r| (r.agent.clone(), r.score)).collect()))
            .collect()
    }

    pub fn normalized_table(&self) -> BTreeMap<EnvKind, BTreeMap<String, f64>> {
        self.envs
            .iter()
            .map(|(e, b)| {
                (
                    *e,
                    b.rows
                        .iter()
                        .filter_map(|r| r.normalized.map(|n| (r.agent.clone(), n)))
                        .collect(),
                )
            })
            .collect()
    }

    pub fn render_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        for (env, board) in &self.envs {
            let _ = writeln!(out, "[{env}] ranked by {:?}", board.metric);
            let _ = writeln!(
                out,
                "{:<24} {:>9} {:>7} {:>8} {:>6} {:>5} {:>5} {:>5}",
                "agent", "score", "norm", "sigma", "games", "W", "D", "L"
            );
            for r in &board.rows {
                let norm = r.normalized.map_or("-".to_string(), |n| format!("{n:.2}"));
                let _ = writeln!(
                    out,
                    "{:<24} {:>9.3} {:>7} {:>8.3} {:>6} {:>5} {:>5} {:>5}",
                    r.agent, r.score, norm, r.sigma, r.games, r.wins, r.draws, r.losses
                );
            }
            out.push('\n');
        }
        for (agent, why) in &self.inactive {
            let _ = writeln!(out, "inactive: {agent}: {why}");
        }
        out
    }
}

/// Outcome of [`Store::reconcile`].
#[derive(Debug)]
pub struct Reconciled {
    pub leaderboard: Leaderboard,
    pub records: Vec<MatchRecord>,
    /// Rating updates applied during reconciliation.
    pub applied: usize,
    /// 1-based line number and content of a torn final line that was cut.
    pub truncated_tail: Option<(usize, String)>,
}

#[derive(Debug, Clone)]
pub struct Store {
    dir: PathBuf,
}

/// Result a finished record contributes to ratings, if any.
pub fn game_result(record: &MatchRecord, evaluated_seats: Vec<usize>) -> Option<GameResult> {
    record.is_rateable().then(|| GameResult {
        record_id: record.id.clone(),
        env: record.env,
        agents: record.agents.clone(),
        outcome: record.outcome.clone(),
        rewards: record.rewards.clone(),
        evaluated_seats,
    })
}

/// Evaluated seats of an Undercover-mode record: the undercover seat.
pub fn evaluated_seats(record: &MatchRecord) -> Vec<usize> {
    match (&record.final_state.body, record.env) {
        (arena_core::env::GameBody::Undercover(u), EnvKind::Undercover) => vec![u.undercover.index()],
        _ => Vec::new(),
    }
}

impl Store {
    /// Opens a store directory, creating it if needed.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(dir.join(ANALYSIS)).map_err(OrchestratorError::io(&dir))?;
        Ok(Store { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn has_records(&self) -> bool {
        std::fs::metadata(self.path(RECORDS)).is_ok_and(|m| m.len() > 0)
    }

    /// Appends one record and syncs it to disk.
    pub fn append_record(&self, record: &MatchRecord) -> Result<()> {
        let path = self.path(RECORDS);
        let line = record.to_json_line()?;
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(OrchestratorError::io(&path))?;
        f.write_all(format!("{line}\n").as_bytes())
            .and_then(|_| f.sync_data())
            .map_err(OrchestratorError::io(&path))
    }

    /// Reads every record; a torn last line is reported, not fatal.
    pub fn load_records(&self) -> Result<LoadedRecords> {
        let path = self.path(RECORDS);
        match File::open(&path) {
            Ok(f) => Ok(read_jsonl(BufReader::new(f))?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(LoadedRecords::default()),
            Err(e) => Err(OrchestratorError::io(&path)(e)),
        }
    }

    /// Cuts a torn last line so later appends start on a clean line.
    fn cut_tail(&self, line_no: usize) -> Result<()> {
        let path = self.path(RECORDS);
        let bytes = std::fs::read(&path).map_err(OrchestratorError::io(&path))?;
        let mut offset = 0usize;
        for _ in 1..line_no {
            match bytes[offset..].iter().position(|&b| b == b'\n') {
                Some(p) => offset += p + 1,
                None => break,
            }
        }
        let f = OpenOptions::new().write(true).open(&path).map_err(OrchestratorError::io(&path))?;
        f.set_len(offset as u64)
            .and_then(|_| f.sync_all())
            .map_err(OrchestratorError::io(&path))
    }

    pub fn save_ratings(&self, lb: &Leaderboard) -> Result<()> {
        let mut snapshots = Vec::new();
        let mut fold = Leaderboard::new(lb.config.clone());
        for (i, ev) in lb.log.iter().enumerate() {
            fold.apply(&ev.result)?;
            if (i + 1) % SNAPSHOT_EVERY == 0 {
                snapshots.push(Snapshot { events: i + 1, standings: fold.standings.clone() });
            }
        }
        if lb.log.len() % SNAPSHOT_EVERY != 0 || lb.log.is_empty() {
            snapshots.push(Snapshot { events: lb.log.len(), standings: fold.standings.clone() });
        }
        let file = RatingsFile {
            schema_version: STORE_SCHEMA_VERSION,
            config: lb.config.clone(),
            log: lb.log.clone(),
            snapshots,
        };
        self.write_json(RATINGS, &file)
    }

    /// Loads the rating log and checks it against its own snapshots.
    pub fn load_ratings(&self, config: &RatingConfig) -> Result<Leaderboard> {
        let path = self.path(RATINGS);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Leaderboard::new(config.clone())),
            Err(e) => return Err(OrchestratorError::io(&path)(e)),
        };
        let file: RatingsFile = serde_json::from_str(&text).map_err(|e| self.corrupt(RATINGS, e))?;
        let lb = Leaderboard::from_log(file.config.clone(), &file.log)?;
        if let Some(last) = file.snapshots.last() {
            if last.events == file.log.len() && last.standings != lb.standings {
                return Err(self.corrupt(RATINGS, "snapshot disagrees with the update log"));
            }
        }
        Ok(lb)
    }

    /// Brings ratings up to date with records. Idempotent.
    pub fn reconcile(&self, config: &RatingConfig) -> Result<Reconciled> {
        let loaded = self.load_records()?;
        if let Some((line, _)) = &loaded.truncated_tail {
            tracing::warn!(line, "cutting torn final record line");
            self.cut_tail(*line)?;
        }
        let mut lb = self.load_ratings(config)?;
        let mut applied = 0;
        for r in &loaded.records {
            if let Some(g) = game_result(r, evaluated_seats(r)) {
                if lb.apply(&g)? {
                    applied += 1;
                }
            }
        }
        if applied > 0 {
            self.save_ratings(&lb)?;
        }
        Ok(Reconciled {
            leaderboard: lb,
            records: loaded.records,
            applied,
            truncated_tail: loaded.truncated_tail,
        })
    }

    pub fn save_leaderboard(&self, lb: &Leaderboard, inactive: &BTreeMap<String, String>) -> Result<LeaderboardFile> {
        let file = LeaderboardFile::build(lb, inactive);
        self.write_json(LEADERBOARD, &file)?;
        self.write_text(LEADERBOARD_TEXT, &file.render_text())?;
        Ok(file)
    }

    pub fn load_leaderboard(&self) -> Result<LeaderboardFile> {
        let path = self.path(LEADERBOARD);
        let text = std::fs::read_to_string(&path).map_err(OrchestratorError::io(&path))?;
        serde_json::from_str(&text).map_err(|e| self.corrupt(LEADERBOARD, e))
    }

    pub fn write_analysis(&self, name: &str, text: &str) -> Result<()> {
        self.write_text(&format!("{ANALYSIS}/{name}"), text)
    }

    /// Names of files under `analysis/`, sorted.
    pub fn analysis_files(&self) -> Result<Vec<String>> {
        let dir = self.path(ANALYSIS);
        let mut names: Vec<String> = std::fs::read_dir(&dir)
            .map_err(OrchestratorError::io(&dir))?
            .filter_map(|e| e.ok())
            .filter(|e| e.file_type().is_ok_and(|t| t.is_file()))
            .filter_map(|e| e.file_name().into_string().ok())
            .collect();
        names.sort();
        Ok(names)
    }

    pub fn read_analysis(&self, name: &str) -> Result<String> {
        if name.contains(['/', '\\']) || name.starts_with('.') {
            return Err(self.corrupt(ANALYSIS, format!("bad analysis name `{name}`")));
        }
        let path = self.path(ANALYSIS).join(name);
        std::fs::read_to_string(&path).map_err(OrchestratorError::io(&path))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| self.corrupt(name, e))?;
        text.push('\n');
        self.write_text(name, &text)
    }

    /// Atomic replace: temp file, sync, rename.
    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        let path = self.path(name);
        let tmp = path.with_extension("tmp");
        let mut f = File::create(&tmp).map_err(OrchestratorError::io(&tmp))?;
        f.write_all(text.as_bytes())
            .and_then(|_| f.sync_all())
            .map_err(OrchestratorError::io(&tmp))?;
        std::fs::rename(&tmp, &path).map_err(OrchestratorError::io(&path))
    }

    fn corrupt(&self, name: &str, why: impl std::fmt::Display) -> OrchestratorError {
        OrchestratorError::Store {
            path: self.path(name),
            reason: why.to_string(),
        }
    }
}
