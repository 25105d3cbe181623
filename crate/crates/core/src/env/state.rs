use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::types::{Action, ActionSet, ActionSpec, EnvKind, Observation, Outcome, PlayerId, StepResult};
use crate::error::{ArenaError, Result};
use crate::games::bargain::{bargain_generate, bargain_outcome, BargainConfig, BargainState};
use crate::games::bid::{bid_generate, BidConfig, BidState};
use crate::games::connect4::C4State;
use crate::games::hanabi::{HanabiConfig, HanabiState};
use crate::games::holdem::{HoldemConfig, HoldemState};
use crate::games::tictactoe::TttState;
use crate::games::undercover::{
    undercover_assign, Phase, UndercoverAction, UndercoverConfig, UndercoverOutcome,
    UndercoverState, SEATS,
};
use crate::games::{BoardStatus, Mark};
use crate::seed::{streams, Seed};
use crate::words::builtin_corpus;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Every knob an environment exposes. Missing fields take the frozen defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    pub schema_version: u32,
    /// Include the legal-position enumeration in board-game observations.
    pub hints_enabled: bool,
    pub holdem: HoldemConfig,
    pub hanabi: HanabiConfig,
    pub undercover: UndercoverConfig,
    pub bargain: BargainConfig,
    pub bid: BidConfig,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            hints_enabled: true,
            holdem: HoldemConfig::default(),
            hanabi: HanabiConfig::default(),
            undercover: UndercoverConfig::default(),
            bargain: BargainConfig::default(),
            bid: BidConfig::default(),
        }
    }
}

impl EnvConfig {
    pub fn validate(&self, env: EnvKind) -> Result<()> {
        let invalid = |reason: String| ArenaError::InvalidConfig { env, reason };
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(invalid(format!(
                "unsupported schema version {}",
                self.schema_version
            )));
        }
        match env {
            EnvKind::TexasHoldem => self.holdem.validate().map_err(invalid),
            EnvKind::Bargain => self.bargain.validate().map_err(invalid),
            EnvKind::Bid => self.bid.validate().map_err(invalid),
            EnvKind::Undercover => match self.undercover.undercover_seat {
                Some(s) if s >= SEATS => Err(invalid(format!(
                    "undercover seat {s} outside 0..{SEATS}"
                ))),
                _ => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "env", content = "state", rename_all = "snake_case")]
pub enum GameBody {
    TicTacToe(TttState),
    ConnectFour(C4State),
    TexasHoldem(HoldemState),
    Undercover(UndercoverState),
    Bargain(BargainState),
    Bid(BidState),
    Hanabi(HanabiState),
}

/// Full situation of one match: the game body plus the bookkeeping the
/// uniform contract needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub env: EnvKind,
    pub seed: Seed,
    pub ply: u32,
    pub hints_enabled: bool,
    pub forfeited_by: Option<PlayerId>,
    /// Cumulative rewards per seat.
    pub returns: Vec<f64>,
    pub body: GameBody,
}

pub fn reset(env: EnvKind, seed: Seed, config: &EnvConfig) -> Result<GameState> {
    config.validate(env)?;
    let body = match env {
        EnvKind::TicTacToe => GameBody::TicTacToe(TttState::default()),
        EnvKind::ConnectFour => GameBody::ConnectFour(C4State::default()),
        EnvKind::TexasHoldem => GameBody::TexasHoldem(HoldemState::deal(seed, config.holdem)),
        EnvKind::Undercover => {
            let pair = match &config.undercover.pair {
                Some(p) => p.clone(),
                None => builtin_corpus()
                    .choose(&mut seed.rng(streams::INSTANCE))
                    .cloned()
                    .ok_or(ArenaError::Empty("word-pair corpus is empty"))?,
            };
            let state = match config.undercover.undercover_seat {
                Some(s) => UndercoverState::new(pair, PlayerId(s as u8), seed),
                None => undercover_assign(pair, seed),
            };
            GameBody::Undercover(state)
        }
        EnvKind::Bargain => GameBody::Bargain(BargainState::new(
            bargain_generate(seed, &config.bargain),
            config.bargain,
        )),
        EnvKind::Bid => GameBody::Bid(BidState::new(bid_generate(seed, &config.bid), seed)),
        EnvKind::Hanabi => GameBody::Hanabi(HanabiState::deal(seed, config.hanabi)?),
    };
    Ok(GameState {
        env,
        seed,
        ply: 0,
        hints_enabled: config.hints_enabled,
        forfeited_by: None,
        returns: vec![0.0; env.seats()],
        body,
    })
}

/// Advances one ply. The input state is left untouched; illegal actions are
/// reported and never applied.
pub fn step(state: &GameState, actor: PlayerId, action: &ActionSpec) -> Result<(GameState, StepResult)> {
    if state.is_terminal() {
        return Err(ArenaError::Terminal);
    }
    if state.to_act() != Some(actor) {
        return Err(ArenaError::WrongActor { actor });
    }
    let got = action.payload.env();
    if got != state.env {
        return Err(ArenaError::EnvMismatch {
            expected: state.env,
            got,
        });
    }
    let mut next = state.clone();
    let mut rewards = vec![0.0; state.env.seats()];
    let mismatch = || ArenaError::EnvMismatch {
        expected: state.env,
        got,
    };
    match (&mut next.body, &action.payload) {
        (GameBody::TicTacToe(s), Action::TicTacToe(m)) => s.apply(*m)?,
        (GameBody::ConnectFour(s), Action::ConnectFour(m)) => s.apply(*m)?,
        (GameBody::TexasHoldem(s), Action::TexasHoldem(a)) => s.apply(*a)?,
        (GameBody::Undercover(s), Action::Undercover(a)) => s.apply(actor, a)?,
        (GameBody::Bargain(s), Action::Bargain(a)) => {
            let text = match &action.message {
                Some(m) => format!("{} {}", m.trim(), action.surface),
                None => action.surface.clone(),
            };
            s.apply(*a, &text)?
        }
        (GameBody::Bid(s), Action::Bid(b)) => s.apply(*b)?,
        (GameBody::Hanabi(s), Action::Hanabi(a)) => {
            let delta = s.apply(*a)? as f64;
            rewards.iter_mut().for_each(|r| *r = delta);
        }
        _ => return Err(mismatch()),
    }
    next.ply += 1;
    let terminal = next.is_terminal();
    if terminal && next.env != EnvKind::Hanabi {
        rewards = next.terminal_rewards();
    }
    for (acc, r) in next.returns.iter_mut().zip(&rewards) {
        *acc += r;
    }
    let outcome = next.outcome();
    Ok((
        next,
        StepResult {
            rewards,
            terminal,
            outcome,
        },
    ))
}

fn win_loss(winners: &[PlayerId], seats: usize) -> Vec<f64> {
    (0..seats)
        .map(|i| {
            if winners.contains(&PlayerId(i as u8)) {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

impl GameState {
    pub fn seats(&self) -> usize {
        self.env.seats()
    }

    pub fn is_terminal(&self) -> bool {
        if self.forfeited_by.is_some() {
            return true;
        }
        match &self.body {
            GameBody::TicTacToe(s) => s.status() != BoardStatus::Ongoing,
            GameBody::ConnectFour(s) => s.status() != BoardStatus::Ongoing,
            GameBody::TexasHoldem(s) => s.finished,
            GameBody::Undercover(s) => s.phase == Phase::Done,
            GameBody::Bargain(s) => s.is_over(),
            GameBody::Bid(s) => s.is_over(),
            GameBody::Hanabi(s) => s.finished,
        }
    }

    /// Seat expected to act next; `None` once the game is over.
    pub fn to_act(&self) -> Option<PlayerId> {
        if self.is_terminal() {
            return None;
        }
        Some(match &self.body {
            GameBody::TicTacToe(s) => PlayerId(s.to_move().seat() as u8),
            GameBody::ConnectFour(s) => PlayerId(s.to_move().seat() as u8),
            GameBody::TexasHoldem(s) => PlayerId(s.to_act as u8),
            GameBody::Undercover(s) => s.to_act?,
            GameBody::Bargain(s) => s.to_act,
            GameBody::Bid(s) => s.to_act,
            GameBody::Hanabi(s) => PlayerId(s.to_act as u8),
        })
    }

    /// Legal moves for `viewer`; empty unless `viewer` is the seat to act.
    pub fn legal_actions(&self, viewer: PlayerId) -> ActionSet {
        if self.to_act() != Some(viewer) {
            return ActionSet::finite(Vec::new());
        }
        let specs = |actions: Vec<Action>| {
            ActionSet::finite(
                actions
                    .into_iter()
                    .map(|a| ActionSpec::new(a, viewer))
                    .collect(),
            )
        };
        match &self.body {
            GameBody::TicTacToe(s) => {
                specs(s.legal_moves().into_iter().map(Action::TicTacToe).collect())
            }
            GameBody::ConnectFour(s) => {
                specs(s.legal_moves().into_iter().map(Action::ConnectFour).collect())
            }
            GameBody::TexasHoldem(s) => specs(
                s.legal_actions()
                    .into_iter()
                    .map(Action::TexasHoldem)
                    .collect(),
            ),
            GameBody::Undercover(s) => match s.phase {
                Phase::Clues => ActionSet::Clue {
                    actor: viewer,
                    forbidden: s.word_of(viewer).to_string(),
                },
                _ => specs(
                    s.legal_votes(viewer)
                        .into_iter()
                        .map(|p| Action::Undercover(UndercoverAction::Vote(p)))
                        .collect(),
                ),
            },
            GameBody::Bargain(s) => {
                specs(s.legal_actions().into_iter().map(Action::Bargain).collect())
            }
            GameBody::Bid(s) => ActionSet::BidRange {
                actor: viewer,
                max_cents_exclusive: s.instance.values[viewer.index()].cents(),
            },
            GameBody::Hanabi(s) => {
                specs(s.legal_actions().into_iter().map(Action::Hanabi).collect())
            }
        }
    }

    pub fn observe(&self, viewer: PlayerId) -> Observation {
        let seat = viewer.index();
        let hints = self.hints_enabled;
        let (variant, text_blocks) = match &self.body {
            GameBody::TicTacToe(s) => (board_variant(hints), s.text_blocks(seat, hints)),
            GameBody::ConnectFour(s) => (board_variant(hints), s.text_blocks(seat, hints)),
            GameBody::TexasHoldem(s) => ("", s.text_blocks(seat)),
            GameBody::Undercover(s) => {
                let v = if s.phase == Phase::Clues { "clue" } else { "accusation" };
                (v, s.text_blocks(viewer))
            }
            GameBody::Bargain(s) => {
                let v = if s.pending.is_some_and(|(p, _)| p != viewer) {
                    "reply"
                } else {
                    "open"
                };
                (v, s.text_blocks(viewer))
            }
            GameBody::Bid(s) => ("", s.text_blocks(viewer)),
            GameBody::Hanabi(s) => ("", s.text_blocks(seat)),
        };
        Observation {
            env: self.env,
            viewer,
            variant: variant.to_string(),
            text_blocks,
            legal_actions: self.legal_actions(viewer),
            hints_enabled: hints,
        }
    }

    pub fn outcome(&self) -> Outcome {
        if !self.is_terminal() {
            return Outcome::Ongoing;
        }
        if let (Some(f), EnvKind::TicTacToe | EnvKind::ConnectFour) = (self.forfeited_by, self.env) {
            return Outcome::Win(PlayerId(1 - f.0));
        }
        match &self.body {
            GameBody::TicTacToe(s) => self.board_outcome(s.status()),
            GameBody::ConnectFour(s) => self.board_outcome(s.status()),
            GameBody::TexasHoldem(s) => match s.winner() {
                Some(w) => Outcome::Win(PlayerId(w as u8)),
                None => Outcome::Draw,
            },
            GameBody::Undercover(s) => match s.outcome() {
                UndercoverOutcome::UndercoverWin => Outcome::Win(s.undercover),
                UndercoverOutcome::CiviliansWin => Outcome::TeamWin(s.civilians()),
                UndercoverOutcome::Ongoing => Outcome::Ongoing,
            },
            GameBody::Bargain(s) => bargain_outcome(s).unwrap_or(Outcome::Ongoing),
            GameBody::Bid(s) => s.outcome(),
            GameBody::Hanabi(s) => {
                if self.forfeited_by.is_some() || s.lost_all_lives() {
                    Outcome::Failure
                } else {
                    Outcome::TeamWin(vec![PlayerId(0), PlayerId(1)])
                }
            }
        }
    }

    fn board_outcome(&self, status: BoardStatus) -> Outcome {
        match status {
            BoardStatus::Won(m) => Outcome::Win(PlayerId(m.seat() as u8)),
            BoardStatus::Draw => Outcome::Draw,
            BoardStatus::Ongoing => Outcome::Ongoing,
        }
    }

    /// Rewards paid on the terminal ply (Hanabi pays per ply instead).
    fn terminal_rewards(&self) -> Vec<f64> {
        let n = self.seats();
        match &self.body {
            GameBody::TexasHoldem(s) => s.net().to_vec(),
            GameBody::Bargain(s) => s.payoffs().iter().map(|&v| v as f64).collect(),
            GameBody::Bid(s) => s.rewards().to_vec(),
            GameBody::Hanabi(_) => vec![0.0; n],
            _ => match self.outcome() {
                Outcome::Win(p) => win_loss(&[p], n),
                Outcome::TeamWin(ps) => win_loss(&ps, n),
                _ => vec![0.0; n],
            },
        }
    }

    /// Ends the game with `seat` as the loser (illegal-action policy).
    pub fn forfeit(&self, seat: PlayerId) -> Result<(GameState, StepResult)> {
        if self.is_terminal() {
            return Err(ArenaError::Terminal);
        }
        let mut next = self.clone();
        next.forfeited_by = Some(seat);
        match &mut next.body {
            GameBody::TexasHoldem(s) => s.forfeit(seat.index()),
            GameBody::Undercover(s) => s.forfeit(seat),
            GameBody::Bargain(s) => s.forfeit(seat),
            GameBody::Bid(s) => s.forfeit(seat),
            GameBody::Hanabi(s) => s.finished = true,
            GameBody::TicTacToe(_) | GameBody::ConnectFour(_) => {}
        }
        let rewards = next.terminal_rewards();
        for (acc, r) in next.returns.iter_mut().zip(&rewards) {
            *acc += r;
        }
        let outcome = next.outcome();
        Ok((
            next,
            StepResult {
                rewards,
                terminal: true,
                outcome,
            },
        ))
    }

    /// Board mark of the given seat, for the two board games.
    pub fn mark_of(&self, seat: PlayerId) -> Option<Mark> {
        matches!(self.env, EnvKind::TicTacToe | EnvKind::ConnectFour)
            .then(|| Mark::for_seat(seat.index()))
    }
}

fn board_variant(hints: bool) -> &'static str {
    if hints {
        "hint"
    } else {
        "nohint"
    }
}
