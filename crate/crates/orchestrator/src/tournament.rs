//! The tournament loop: schedule, play, persist, rate, until convergence
//! or the game cap.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{SystemTime, UNIX_EPOCH};

use arena_core::agent::Agent;
use arena_core::analysis::{ablation_report, render_ablation, AblationCell};
use arena_core::env::GameBody;
use arena_core::rating::{has_converged, metric_for, Leaderboard, MetricKind};
use arena_core::record::{MatchStatus, Timing};
use arena_core::{reset, run_match, EnvKind, MatchOptions, MatchRecord, Seed};
use arena_llm::ClientStats;
use serde::Serialize;

use crate::config::TournamentConfig;
use crate::roster::Roster;
use crate::schedule::Scheduler;
use crate::store::{game_result, LeaderboardFile, Store, CONFIG_SNAPSHOT};
use crate::{OrchestratorError, Result};

/// One match to play.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub id: String,
    pub env: EnvKind,
    pub seats: Vec<String>,
    pub seed: Seed,
    /// Seats whose results count for ratings; empty means all.
    pub evaluated: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvSummary {
    pub games: u64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TournamentReport {
    pub envs: BTreeMap<EnvKind, EnvSummary>,
    pub inactive: BTreeMap<String, String>,
    /// Model request counters, retries included.
    pub requests: BTreeMap<String, ClientStats>,
    #[serde(skip)]
    pub leaderboard: LeaderboardFile,
    #[serde(skip)]
    pub ratings: Leaderboard,
}

/// Plays one job with fresh agents from the roster.
/// Plays one job. With `timing`, wall-clock start and end are stamped on
/// the record.
pub fn play_job(roster: &Roster, job: &Job, options: &MatchOptions, timing: bool) -> Result<MatchRecord> {
    let started = timing.then(unix_ms);
    let mut agents: Vec<Box<dyn Agent>> = job
        .seats
        .iter()
        .map(|id| roster.instantiate(id))
        .collect::<Result<_>>()?;
    let mut refs: Vec<&mut dyn Agent> = agents.iter_mut().map(|a| &mut **a as &mut dyn Agent).collect();
    let mut record = run_match(job.id.clone(), job.env, &mut refs, job.seed, options)?;
    record.timing = started.map(|started_unix_ms| Timing {
        started_unix_ms,
        finished_unix_ms: unix_ms(),
    });
    Ok(record)
}

fn unix_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

/// Runs jobs on up to `workers` threads; results come back in job order.
pub fn play_batch(
    roster: &Roster,
    jobs: &[Job],
    options: &MatchOptions,
    workers: usize,
    timing: bool,
) -> Vec<Result<MatchRecord>> {
    let workers = workers.clamp(1, jobs.len().max(1));
    let mut slots: Vec<Option<Result<MatchRecord>>> = (0..jobs.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    (w..jobs.len())
                        .step_by(workers)
                        .map(|i| (i, play_job(roster, &jobs[i], options, timing)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("match worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every job ran")).collect()
}

/// Agent whose failed call aborted the match, if it can be told.
fn culprit(record: &MatchRecord) -> Option<String> {
    let seat = record.final_state.to_act()?;
    record.agents.get(seat.index()).cloned()
}

struct Run<'a> {
    config: &'a TournamentConfig,
    roster: Roster,
    store: Store,
    options: MatchOptions,
    lb: Leaderboard,
    inactive: BTreeMap<String, String>,
    cells: Vec<AblationCell>,
}

impl Run<'_> {
    fn active(&self) -> BTreeSet<String> {
        self.roster
            .ids()
            .iter()
            .filter(|id| self.roster.is_available(id) && !self.inactive.contains_key(*id))
            .cloned()
            .collect()
    }

    /// Persists and rates a batch, in job order.
    fn absorb(&mut self, jobs: &[Job], results: Vec<Result<MatchRecord>>, kept: &mut Vec<MatchRecord>) -> Result<()> {
        for (job, res) in jobs.iter().zip(results) {
            let record = res?;
            self.store.append_record(&record)?;
            if record.status == MatchStatus::Aborted {
                let why = record.abort_reason.clone().unwrap_or_default();
                if let Some(agent) = culprit(&record) {
                    tracing::warn!(%agent, reason = %why, "agent marked inactive");
                    self.inactive.entry(agent).or_insert(why);
                }
            } else if let Some(g) = game_result(&record, job.evaluated.clone()) {
                self.lb.apply(&g)?;
            }
            kept.push(record);
        }
        self.store.save_ratings(&self.lb)
    }

    fn converged(&self, env: EnvKind, sched: &Scheduler, active: &BTreeSet<String>) -> bool {
        let floor = self.config.convergence.min_games as u64;
        let enough = active
            .iter()
            .all(|a| self.lb.standing(env, a).map_or(0, |s| s.games) >= floor);
        if !enough || !sched.covered(active) {
            return false;
        }
        if metric_for(env) != MetricKind::Trueskill {
            return true;
        }
        let hist: BTreeMap<_, _> = self
            .lb
            .histories(env)
            .into_iter()
            .filter(|(a, _)| active.contains(a))
            .collect();
        has_converged(&hist, &self.config.convergence)
    }

    fn run_pairs(&mut self, env: EnvKind) -> Result<(EnvSummary, Vec<MatchRecord>)> {
        let ids = self.roster.ids().to_vec();
        let mut sched = Scheduler::new(
            env,
            self.config.pairing,
            ids,
            Seed(self.config.seed),
            self.config.convergence.min_games as u64,
        );
        for id in self.active() {
            self.lb.register(env, &id);
        }
        let mut records = Vec::new();
        let mut games = 0u64;
        let converged = loop {
            let active = self.active();
            if self.converged(env, &sched, &active) {
                break true;
            }
            if games >= self.config.max_games || active.len() < 2 {
                break false;
            }
            let room = (self.config.max_games - games).min(self.config.execution.batch as u64);
            let jobs: Vec<Job> = (0..room)
                .filter_map(|_| sched.next(&self.lb, &active))
                .map(|p| Job {
                    id: p.match_id(),
                    env,
                    seats: p.seats,
                    seed: p.seed,
                    evaluated: Vec::new(),
                })
                .collect();
            let results = play_batch(
                &self.roster,
                &jobs,
                &self.options,
                self.config.execution.workers,
                self.config.record_timing,
            );
            games += jobs.len() as u64;
            self.absorb(&jobs, results, &mut records)?;
        };
        tracing::info!(%env, games, converged, "environment finished");
        Ok((EnvSummary { games, converged }, records))
    }

    fn run_undercover(&mut self) -> Result<(EnvSummary, Vec<MatchRecord>)> {
        let env = EnvKind::Undercover;
        let reference = self.config.undercover_reference();
        let base = Seed(self.config.seed).derive(env as u64 + 1);
        let mut records = Vec::new();
        let mut games = 0u64;
        for agent in self.config.undercover_evaluated() {
            if !self.active().contains(&agent) {
                continue;
            }
            self.lb.register(env, &agent);
            let mut g = 0u64;
            while g < self.config.undercover.games_per_agent {
                let active = self.active();
                if !active.contains(&agent) || reference.iter().any(|r| !active.contains(r)) {
                    break;
                }
                let n = (self.config.undercover.games_per_agent - g).min(self.config.execution.batch as u64);
                let jobs = (g..g + n)
                    .map(|k| self.undercover_job(&agent, &reference, k, base.derive(k)))
                    .collect::<Result<Vec<_>>>()?;
                let results = play_batch(
                &self.roster,
                &jobs,
                &self.options,
                self.config.execution.workers,
                self.config.record_timing,
            );
                g += n;
                games += n;
                self.absorb(&jobs, results, &mut records)?;
            }
        }
        let done = self
            .config
            .undercover_evaluated()
            .iter()
            .all(|a| self.lb.standing(env, a).is_some_and(|s| s.games >= self.config.undercover.games_per_agent));
        Ok((EnvSummary { games, converged: done }, records))
    }

    /// Every evaluated agent sees the same deals: game `k` uses the same
    /// seed, word pair and undercover seat whoever is evaluated.
    fn undercover_job(&self, agent: &str, reference: &[String], k: u64, seed: Seed) -> Result<Job> {
        let state = reset(EnvKind::Undercover, seed, &self.options.config)?;
        let GameBody::Undercover(u) = &state.body else {
            unreachable!("undercover reset yields an undercover body")
        };
        let spy = u.undercover.index();
        let mut civilians = reference.iter().cycle();
        let seats = (0..EnvKind::Undercover.seats())
            .map(|s| {
                if s == spy {
                    agent.to_string()
                } else {
                    civilians.next().expect("non-empty reference").clone()
                }
            })
            .collect();
        Ok(Job {
            id: format!("undercover-{agent}-{k:03}"),
            env: EnvKind::Undercover,
            seats,
            seed,
            evaluated: vec![spy],
        })
    }
}

/// Runs every configured environment and writes the store.
pub fn run_tournament(config: &TournamentConfig) -> Result<TournamentReport> {
    config.validate()?;
    let store = Store::open(&config.output)?;
    if store.has_records() {
        return Err(OrchestratorError::Config(format!(
            "{} already holds records; choose a fresh output directory",
            config.output.display()
        )));
    }
    store.write_json(CONFIG_SNAPSHOT, config)?;
    let roster = Roster::new(&config.agents, config.execution.max_in_flight_requests);
    let mut run = Run {
        config,
        inactive: roster.unavailable.clone(),
        roster,
        store,
        options: config.match_options(),
        lb: Leaderboard::new(config.rating.clone()),
        cells: Vec::new(),
    };
    let mut envs = BTreeMap::new();
    for &env in &config.envs {
        let (summary, records) = if env == EnvKind::Undercover {
            run.run_undercover()?
        } else {
            run.run_pairs(env)?
        };
        run.cells.extend(ablation_report(&records));
        envs.insert(env, summary);
    }

    run.store.save_ratings(&run.lb)?;
    let board = run.store.save_leaderboard(&run.lb, &run.inactive)?;
    run.store.write_json("analysis/origin.json", &board.origin_table())?;
    run.store.write_json("analysis/normalized.json", &board.normalized_table())?;
    run.store.write_analysis("error_rates.txt", &render_ablation(&run.cells))?;
    let report = TournamentReport {
        envs,
        inactive: run.inactive.clone(),
        requests: run.roster.request_stats(),
        leaderboard: board,
        ratings: run.lb,
    };
    run.store.write_json("analysis/summary.json", &report)?;
    Ok(report)
}
