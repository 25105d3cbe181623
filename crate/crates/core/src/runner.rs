//! The match loop and record replay.
//!
//! [`MatchSession`] owns one game and its growing record. Headless matches
//! drive it through [`run_match`]; the HTTP gateway drives it one submitted
//! reply at a time.

use rand_chacha::ChaCha8Rng;

use crate::agent::{agent_turn, Agent, AgentKind, Reply, TurnAttempt};
use crate::env::{reset, step, EnvConfig, EnvKind, GameBody, GameState, Observation, Outcome, PlayerId, StepResult};
use crate::error::{ArenaError, Result};
use crate::parse::{parse_action, ParseOutcome};
use crate::record::{
    Exhaustion, GuessEntry, IllegalActionPolicy, MatchRecord, MatchStatus, Resolution, TurnEntry,
    RECORD_SCHEMA_VERSION,
};
use crate::seed::{streams, Seed};

#[derive(Debug, Clone, PartialEq)]
pub struct MatchOptions {
    pub config: EnvConfig,
    pub policy: IllegalActionPolicy,
    /// Ask every agent for the other players' words after Undercover games.
    pub guess_phase: bool,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions {
            config: EnvConfig::default(),
            policy: IllegalActionPolicy::default(),
            guess_phase: false,
        }
    }
}

/// Result of feeding one reply into a session.
#[derive(Debug, Clone, PartialEq)]
pub enum Submission {
    Applied(StepResult),
    /// Rejected; the same actor should try again with this feedback.
    Retry { feedback: String },
    FellBack(StepResult),
    Forfeited(StepResult),
}

pub struct MatchSession {
    record: MatchRecord,
    state: GameState,
    fallback: ChaCha8Rng,
    pending: Vec<TurnAttempt>,
}

impl MatchSession {
    pub fn new(
        id: impl Into<String>,
        env: EnvKind,
        seed: Seed,
        agents: Vec<(String, AgentKind)>,
        options: &MatchOptions,
    ) -> Result<Self> {
        if agents.len() != env.seats() {
            return Err(ArenaError::InvalidInput(format!(
                "{env} needs {} agents, got {}",
                env.seats(),
                agents.len()
            )));
        }
        let state = reset(env, seed, &options.config)?;
        let human = agents.iter().any(|(_, k)| *k == AgentKind::Human);
        let (ids, kinds) = agents.into_iter().unzip();
        let record = MatchRecord {
            schema_version: RECORD_SCHEMA_VERSION,
            id: id.into(),
            env,
            seed,
            config: options.config.clone(),
            policy: options.policy,
            agents: ids,
            agent_kinds: kinds,
            human_participant: human,
            turns: Vec::new(),
            status: MatchStatus::InProgress,
            outcome: Outcome::Ongoing,
            rewards: vec![0.0; env.seats()],
            violator: None,
            abort_reason: None,
            guesses: Vec::new(),
            final_state: state.clone(),
            timing: None,
        };
        Ok(MatchSession {
            record,
            state,
            fallback: seed.rng(streams::FALLBACK),
            pending: Vec::new(),
        })
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn record(&self) -> &MatchRecord {
        &self.record
    }

    pub fn is_over(&self) -> bool {
        self.record.status != MatchStatus::InProgress
    }

    pub fn to_act(&self) -> Option<PlayerId> {
        if self.is_over() {
            None
        } else {
            self.state.to_act()
        }
    }

    pub fn observation(&self) -> Option<Observation> {
        self.to_act().map(|p| self.state.observe(p))
    }

    /// Feeds one agent reply for the current actor through the grammar and
    /// the illegal-action policy.
    pub fn submit(&mut self, actor: PlayerId, reply: Reply) -> Result<Submission> {
        let obs = self.expect_turn(actor)?;
        let parse = parse_action(obs.env, &reply.text, &obs);
        self.submit_attempt(actor, obs, TurnAttempt { reply, parse })
    }

    fn expect_turn(&self, actor: PlayerId) -> Result<Observation> {
        if self.is_over() {
            return Err(ArenaError::Terminal);
        }
        match self.state.to_act() {
            Some(p) if p == actor => Ok(self.state.observe(actor)),
            _ => Err(ArenaError::WrongActor { actor }),
        }
    }

    fn submit_attempt(&mut self, actor: PlayerId, obs: Observation, attempt: TurnAttempt) -> Result<Submission> {
        let parsed = attempt.parse.action().cloned();
        let detail = match &attempt.parse {
            ParseOutcome::Failed { detail, .. } => detail.clone(),
            ParseOutcome::Parsed { .. } => String::new(),
        };
        self.pending.push(attempt);
        if let Some(action) = parsed {
            let (next, res) = step(&self.state, actor, &action)?;
            self.commit(actor, obs, Resolution::Parsed, Some(action), next, &res);
            return Ok(Submission::Applied(res));
        }
        if self.pending.len() as u32 <= self.record.policy.max_retries {
            return Ok(Submission::Retry { feedback: detail });
        }
        match self.record.policy.on_exhaustion {
            Exhaustion::RandomLegal => {
                let action = obs
                    .legal_actions
                    .sample(&mut self.fallback)
                    .ok_or(ArenaError::Empty("no legal action for the fallback"))?;
                let (next, res) = step(&self.state, actor, &action)?;
                self.commit(actor, obs, Resolution::RandomFallback, Some(action), next, &res);
                Ok(Submission::FellBack(res))
            }
            Exhaustion::Forfeit => {
                let (next, res) = self.state.forfeit(actor)?;
                self.record.violator = Some(actor);
                self.commit(actor, obs, Resolution::Forfeit, None, next, &res);
                Ok(Submission::Forfeited(res))
            }
        }
    }

    /// Validates a human move without recording failures; humans are asked
    /// again instead of forfeiting.
    pub fn submit_human(&mut self, actor: PlayerId, text: &str) -> Result<StepResult> {
        let obs = self.expect_turn(actor)?;
        let parse = parse_action(obs.env, text, &obs);
        let Some(action) = parse.action().cloned() else {
            let detail = match &parse {
                ParseOutcome::Failed { detail, .. } => detail.clone(),
                ParseOutcome::Parsed { .. } => unreachable!(),
            };
            return Err(ArenaError::IllegalAction {
                surface: text.to_string(),
                reason: detail,
            });
        };
        let (next, res) = step(&self.state, actor, &action)?;
        self.pending.push(TurnAttempt {
            reply: Reply::text(text),
            parse,
        });
        self.commit(actor, obs, Resolution::Parsed, Some(action), next, &res);
        Ok(res)
    }

    fn commit(
        &mut self,
        actor: PlayerId,
        observation: Observation,
        resolution: Resolution,
        applied: Option<crate::env::ActionSpec>,
        next: GameState,
        res: &StepResult,
    ) {
        self.record.turns.push(TurnEntry {
            ply: self.state.ply,
            actor,
            observation,
            attempts: std::mem::take(&mut self.pending),
            resolution,
            applied,
            rewards: res.rewards.clone(),
        });
        for (total, r) in self.record.rewards.iter_mut().zip(&res.rewards) {
            *total += r;
        }
        self.state = next;
        if res.terminal {
            self.record.outcome = res.outcome.clone();
            self.record.status = if resolution == Resolution::Forfeit {
                MatchStatus::IllegalTerminated
            } else {
                MatchStatus::Completed
            };
        }
        self.record.final_state = self.state.clone();
    }

    /// Stops the match after a transport failure. Attempts gathered for the
    /// current turn are kept in a final partial entry.
    pub fn abort(&mut self, reason: impl Into<String>) {
        if let Some(actor) = self.state.to_act() {
            if !self.pending.is_empty() {
                let observation = self.state.observe(actor);
                self.record.turns.push(TurnEntry {
                    ply: self.state.ply,
                    actor,
                    observation,
                    attempts: std::mem::take(&mut self.pending),
                    resolution: Resolution::Forfeit,
                    applied: None,
                    rewards: vec![0.0; self.state.seats()],
                });
            }
        }
        self.record.status = MatchStatus::Aborted;
        self.record.abort_reason = Some(reason.into());
    }

    pub fn add_guess(&mut self, seat: PlayerId, raw: String) -> Result<()> {
        let GameBody::Undercover(u) = &self.state.body else {
            return Err(ArenaError::InvalidInput("guesses only apply to Undercover".into()));
        };
        let truth = (0..self.state.seats())
            .map(PlayerId::from)
            .filter(|p| *p != seat)
            .map(|p| (p, u.word_of(p).to_string()))
            .collect();
        self.record.guesses.push(GuessEntry {
            seat,
            guesses: crate::agent::parse_guesses(&raw),
            raw,
            truth,
        });
        Ok(())
    }

    pub fn finish(self) -> MatchRecord {
        self.record
    }
}

/// Default record id: environment and seed.
pub fn default_match_id(env: EnvKind, seed: Seed) -> String {
    format!("{}-{}", env.slug(), seed)
}

/// Plays one match to the end. Transport failures abort the match and are
/// reported in the record rather than as an error.
pub fn run_match(
    id: impl Into<String>,
    env: EnvKind,
    agents: &mut [&mut dyn Agent],
    seed: Seed,
    options: &MatchOptions,
) -> Result<MatchRecord> {
    let roster = agents
        .iter()
        .map(|a| (a.id().to_string(), a.kind()))
        .collect();
    let mut session = MatchSession::new(id, env, seed, roster, options)?;
    for (i, a) in agents.iter_mut().enumerate() {
        a.begin_match(env, PlayerId::from(i), seed);
    }
    let mut feedback: Option<String> = None;
    while let Some(actor) = session.to_act() {
        let obs = session.state.observe(actor);
        let agent = &mut *agents[actor.index()];
        let attempt = match agent_turn(agent, &obs, feedback.as_deref()) {
            Ok(a) => a,
            Err(e) => {
                session.abort(e.to_string());
                return Ok(session.finish());
            }
        };
        feedback = match session.submit_attempt(actor, obs, attempt)? {
            Submission::Retry { feedback } => Some(feedback),
            _ => None,
        };
    }
    if options.guess_phase && env == EnvKind::Undercover && session.record.status != MatchStatus::Aborted {
        let seats: Vec<PlayerId> = (0..env.seats()).map(PlayerId::from).collect();
        for (i, a) in agents.iter_mut().enumerate() {
            let me = PlayerId::from(i);
            let others: Vec<PlayerId> = seats.iter().copied().filter(|p| *p != me).collect();
            match a.guess(me, &others) {
                Ok(Some(reply)) => session.add_guess(me, reply.text)?,
                Ok(None) => {}
                Err(e) => {
                    session.abort(e.to_string());
                    break;
                }
            }
        }
    }
    Ok(session.finish())
}

/// Re-applies the recorded actions from the seed and checks the result
/// against the recorded final state.
pub fn replay(record: &MatchRecord) -> Result<GameState> {
    let mut state = reset(record.env, record.seed, &record.config)?;
    for (i, turn) in record.turns.iter().enumerate() {
        let corrupt = |why: String| ArenaError::CorruptRecord(format!("turn {}: {why}", i + 1));
        if record.status == MatchStatus::Aborted && turn.applied.is_none() && i + 1 == record.turns.len() {
            break;
        }
        state = match (&turn.applied, turn.resolution) {
            (Some(action), _) => step(&state, turn.actor, action).map_err(|e| corrupt(e.to_string()))?.0,
            (None, Resolution::Forfeit) => state.forfeit(turn.actor).map_err(|e| corrupt(e.to_string()))?.0,
            (None, r) => return Err(corrupt(format!("{r:?} turn without an action"))),
        };
    }
    if state != record.final_state {
        return Err(ArenaError::CorruptRecord(
            "replayed state differs from the recorded final state".into(),
        ));
    }
    Ok(state)
}
