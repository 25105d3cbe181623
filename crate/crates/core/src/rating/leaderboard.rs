use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::trueskill::{trueskill_update_1v1, MatchResult, Rating, TrueskillParams};
use crate::env::{EnvKind, Outcome, PlayerId};
use crate::error::{ArenaError, Result};

/// Which origin score an environment's leaderboard is ranked by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// TrueSkill mean.
    Trueskill,
    /// Percentage of games won.
    WinRate,
    /// Mean per-game reward.
    AverageReward,
}

pub fn metric_for(env: EnvKind) -> MetricKind {
    match env {
        EnvKind::Undercover => MetricKind::WinRate,
        EnvKind::Bid | EnvKind::Hanabi => MetricKind::AverageReward,
        _ => MetricKind::Trueskill,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RatingConfig {
    pub trueskill: TrueskillParams,
    /// Per-environment draw probability overriding `trueskill.draw_probability`.
    pub draw_probability: BTreeMap<EnvKind, f64>,
}

impl Default for RatingConfig {
    fn default() -> Self {
        RatingConfig {
            trueskill: TrueskillParams::default(),
            draw_probability: [
                (EnvKind::TicTacToe, 0.1),
                (EnvKind::ConnectFour, 0.1),
                (EnvKind::Bargain, 0.1),
            ]
            .into_iter()
            .collect(),
        }
    }
}

impl RatingConfig {
    pub fn params_for(&self, env: EnvKind) -> TrueskillParams {
        match self.draw_probability.get(&env) {
            Some(&eps) => self.trueskill.with_draw_probability(eps),
            None => self.trueskill,
        }
    }
}

/// What the leaderboard needs to know about one finished game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameResult {
    pub record_id: String,
    pub env: EnvKind,
    /// Agent id per seat.
    pub agents: Vec<String>,
    pub outcome: Outcome,
    pub rewards: Vec<f64>,
    /// Seats whose results count; empty means every seat.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evaluated_seats: Vec<usize>,
}

impl GameResult {
    fn counted_seats(&self) -> Vec<usize> {
        if self.evaluated_seats.is_empty() {
            (0..self.agents.len()).collect()
        } else {
            self.evaluated_seats.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standing {
    pub rating: Rating,
    pub games: u64,
    pub wins: u64,
    pub draws: u64,
    pub losses: u64,
    pub total_reward: f64,
}

impl Standing {
    fn new(rating: Rating) -> Self {
        Standing {
            rating,
            games: 0,
            wins: 0,
            draws: 0,
            losses: 0,
            total_reward: 0.0,
        }
    }

    pub fn average_reward(&self) -> f64 {
        if self.games == 0 {
            0.0
        } else {
            self.total_reward / self.games as f64
        }
    }

    pub fn win_rate(&self) -> f64 {
        if self.games == 0 {
            0.0
        } else {
            100.0 * self.wins as f64 / self.games as f64
        }
    }

    pub fn origin_score(&self, metric: MetricKind) -> f64 {
        match metric {
            MetricKind::Trueskill => self.rating.mu,
            MetricKind::WinRate => self.win_rate(),
            MetricKind::AverageReward => self.average_reward(),
        }
    }
}

/// One applied game, with the ratings before and after (empty for
/// environments that are not TrueSkill-rated or for self-play).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingEvent {
    pub result: GameResult,
    pub before: Vec<Rating>,
    pub after: Vec<Rating>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub config: RatingConfig,
    pub standings: BTreeMap<EnvKind, BTreeMap<String, Standing>>,
    pub log: Vec<RatingEvent>,
    #[serde(skip)]
    applied: BTreeSet<String>,
}

impl Leaderboard {
    pub fn new(config: RatingConfig) -> Self {
        Leaderboard {
            config,
            standings: BTreeMap::new(),
            log: Vec::new(),
            applied: BTreeSet::new(),
        }
    }

    /// Rebuilds a leaderboard as the left fold of an update log.
    pub fn from_log(config: RatingConfig, log: &[RatingEvent]) -> Result<Self> {
        let mut lb = Leaderboard::new(config);
        for ev in log {
            lb.apply(&ev.result)?;
        }
        Ok(lb)
    }

    pub fn contains(&self, record_id: &str) -> bool {
        self.applied.contains(record_id)
    }

    /// Registers an agent so it appears before its first game.
    pub fn register(&mut self, env: EnvKind, agent: &str) {
        let init = self.config.trueskill.initial();
        self.standings
            .entry(env)
            .or_default()
            .entry(agent.to_string())
            .or_insert_with(|| Standing::new(init));
    }

    pub fn standing(&self, env: EnvKind, agent: &str) -> Option<&Standing> {
        self.standings.get(&env)?.get(agent)
    }

    pub fn rating(&self, env: EnvKind, agent: &str) -> Rating {
        self.standing(env, agent)
            .map_or_else(|| self.config.trueskill.initial(), |s| s.rating)
    }

    /// Applies one game. Returns `false` if the record was already applied.
    pub fn apply(&mut self, result: &GameResult) -> Result<bool> {
        if self.applied.contains(&result.record_id) {
            return Ok(false);
        }
        if result.agents.len() != result.env.seats() {
            return Err(ArenaError::InvalidInput(format!(
                "{} needs {} agents, got {}",
                result.env,
                result.env.seats(),
                result.agents.len()
            )));
        }
        let winners = result.outcome.winners();
        let seats = result.counted_seats();
        let rated = metric_for(result.env) == MetricKind::Trueskill
            && result.agents.len() == 2
            && result.agents[0] != result.agents[1];
        for (seat, a) in result.agents.iter().enumerate() {
            if rated || seats.contains(&seat) {
                self.register(result.env, a);
            }
        }
        let mut counted: BTreeSet<&str> = BTreeSet::new();
        for &seat in &seats {
            let agent = result.agents[seat].as_str();
            if !counted.insert(agent) {
                continue;
            }
            let st = self
                .standings
                .get_mut(&result.env)
                .and_then(|m| m.get_mut(agent))
                .expect("registered");
            st.games += 1;
            st.total_reward += result.rewards.get(seat).copied().unwrap_or(0.0);
            if winners.contains(&PlayerId(seat as u8)) {
                st.wins += 1;
            } else if winners.is_empty() {
                st.draws += 1;
            } else {
                st.losses += 1;
            }
        }

        let (mut before, mut after) = (Vec::new(), Vec::new());
        if rated {
            let mr = match result.outcome {
                Outcome::Win(PlayerId(0)) => MatchResult::AWins,
                Outcome::Win(_) => MatchResult::BWins,
                Outcome::Draw | Outcome::Failure => MatchResult::Draw,
                ref o => {
                    return Err(ArenaError::InvalidInput(format!(
                        "cannot rate outcome {o:?}"
                    )))
                }
            };
            let ra = self.rating(result.env, &result.agents[0]);
            let rb = self.rating(result.env, &result.agents[1]);
            let params = self.config.params_for(result.env);
            let (na, nb) = trueskill_update_1v1(ra, rb, mr, &params)?;
            let col = self.standings.get_mut(&result.env).expect("registered");
            col.get_mut(&result.agents[0]).expect("registered").rating = na;
            col.get_mut(&result.agents[1]).expect("registered").rating = nb;
            before = vec![ra, rb];
            after = vec![na, nb];
        }
        self.applied.insert(result.record_id.clone());
        self.log.push(RatingEvent {
            result: result.clone(),
            before,
            after,
        });
        Ok(true)
    }

    /// Restores the idempotency index after deserialization.
    pub fn reindex(&mut self) {
        self.applied = self.log.iter().map(|e| e.result.record_id.clone()).collect();
    }

    /// Agents ranked by origin score, best first (ties by name).
    pub fn ranked(&self, env: EnvKind) -> Vec<(String, Standing, f64)> {
        let metric = metric_for(env);
        let mut rows: Vec<(String, Standing, f64)> = self
            .standings
            .get(&env)
            .into_iter()
            .flatten()
            .map(|(a, s)| (a.clone(), s.clone(), s.origin_score(metric)))
            .collect();
        rows.sort_by(|x, y| y.2.total_cmp(&x.2).then_with(|| x.0.cmp(&y.0)));
        rows
    }

    /// Rating after each game, per agent (TrueSkill environments only).
    pub fn histories(&self, env: EnvKind) -> BTreeMap<String, Vec<Rating>> {
        let mut h: BTreeMap<String, Vec<Rating>> = BTreeMap::new();
        for a in self.standings.get(&env).into_iter().flatten().map(|(a, _)| a) {
            h.insert(a.clone(), Vec::new());
        }
        for ev in self.log.iter().filter(|e| e.result.env == env) {
            if ev.after.is_empty() {
                let seats = ev.result.counted_seats();
                let mut seen = BTreeSet::new();
                for s in seats {
                    let a = &ev.result.agents[s];
                    if seen.insert(a.clone()) {
                        let r = self.config.trueskill.initial();
                        h.entry(a.clone()).or_default().push(r);
                    }
                }
            } else {
                for (a, r) in ev.result.agents.iter().zip(&ev.after) {
                    h.entry(a.clone()).or_default().push(*r);
                }
            }
        }
        h
    }

    /// Origin scores as env → agent → score.
    pub fn origin_table(&self) -> BTreeMap<EnvKind, BTreeMap<String, f64>> {
        self.standings
            .keys()
            .map(|&env| {
                (
                    env,
                    self.ranked(env)
                        .into_iter()
                        .map(|(a, _, s)| (a, s))
                        .collect(),
                )
            })
            .collect()
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for &env in self.standings.keys() {
            let metric = metric_for(env);
            let _ = writeln!(out, "[{env}] ranked by {metric:?}");
            let _ = writeln!(
                out,
                "{:<24} {:>9} {:>8} {:>6} {:>5} {:>5} {:>5} {:>10}",
                "agent", "score", "sigma", "games", "W", "D", "L", "avg_reward"
            );
            for (agent, s, score) in self.ranked(env) {
                let _ = writeln!(
                    out,
                    "{:<24} {:>9.3} {:>8.3} {:>6} {:>5} {:>5} {:>5} {:>10.4}",
                    agent,
                    score,
                    s.rating.sigma,
                    s.games,
                    s.wins,
                    s.draws,
                    s.losses,
                    s.average_reward()
                );
            }
            out.push('\n');
        }
        out
    }
}

impl Default for Leaderboard {
    fn default() -> Self {
        Leaderboard::new(RatingConfig::default())
    }
}
