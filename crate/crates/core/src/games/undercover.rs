//! Undercover: five seats, one holds a different-but-related secret word.
//!
//! Each round every living seat gives one clue in seat order, then every
//! living seat casts a sealed vote. The plurality target is eliminated
//! (ties broken by a seeded uniform draw). Civilians win the moment the
//! undercover is eliminated; the undercover wins by surviving two rounds.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::PlayerId;
use crate::error::{ArenaError, Result};
use crate::seed::{streams, Seed};
use crate::words::WordPair;

pub const SEATS: usize = 5;
pub const MAX_ROUNDS: u8 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndercoverAction {
    Clue(String),
    Vote(PlayerId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Clues,
    Voting,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndercoverOutcome {
    UndercoverWin,
    CiviliansWin,
    Ongoing,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UndercoverConfig {
    /// Fixed word pair; when absent one is drawn from the built-in corpus by seed.
    pub pair: Option<WordPair>,
    /// Fixed undercover seat; when absent it is drawn uniformly by seed.
    pub undercover_seat: Option<usize>,
}

/// A clue is legal when non-empty and free of the speaker's secret word
/// (case-insensitive substring match).
pub fn clue_is_legal(clue: &str, secret: &str) -> bool {
    let clue = clue.trim();
    !clue.is_empty() && !clue.to_lowercase().contains(&secret.trim().to_lowercase())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clue {
    pub seat: PlayerId,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndercoverState {
    pub pair: WordPair,
    pub undercover: PlayerId,
    pub alive: [bool; SEATS],
    pub round: u8,
    pub phase: Phase,
    /// Clues per round (index 0 = round 1).
    pub clues: Vec<Vec<Clue>>,
    /// Votes per round: voter → target.
    pub votes: Vec<BTreeMap<PlayerId, PlayerId>>,
    pub eliminated: Vec<PlayerId>,
    pub to_act: Option<PlayerId>,
    pub seed: Seed,
    pub forfeited_by: Option<PlayerId>,
}

/// Deals the pair: one uniformly chosen seat gets the undercover word.
pub fn undercover_assign(pair: WordPair, seed: Seed) -> UndercoverState {
    let seat = seed.rng(streams::ROLES).gen_range(0..SEATS);
    UndercoverState::new(pair, PlayerId(seat as u8), seed)
}

/// Plurality elimination with a seeded uniform draw among tied leaders.
///
/// `alive` lists the living seats; each must vote exactly once for another
/// living seat.
pub fn undercover_tally(
    votes: &BTreeMap<PlayerId, PlayerId>,
    alive: &[PlayerId],
    seed: Seed,
) -> Result<PlayerId> {
    for (voter, target) in votes {
        if !alive.contains(voter) {
            return Err(ArenaError::InvalidInput(format!("{voter} is not alive")));
        }
        if voter == target {
            return Err(ArenaError::InvalidInput(format!("{voter} voted for themself")));
        }
        if !alive.contains(target) {
            return Err(ArenaError::InvalidInput(format!(
                "{target} is not a living player"
            )));
        }
    }
    if votes.len() != alive.len() {
        return Err(ArenaError::InvalidInput(
            "every living player must vote".into(),
        ));
    }
    let mut counts: BTreeMap<PlayerId, usize> = BTreeMap::new();
    for target in votes.values() {
        *counts.entry(*target).or_default() += 1;
    }
    let top = counts.values().copied().max().unwrap_or(0);
    let leaders: Vec<PlayerId> = counts
        .iter()
        .filter(|(_, &c)| c == top)
        .map(|(p, _)| *p)
        .collect();
    leaders
        .choose(&mut seed.rng(streams::TIE_BREAK))
        .copied()
        .ok_or(ArenaError::Empty("no votes cast"))
}

impl UndercoverState {
    pub fn new(pair: WordPair, undercover: PlayerId, seed: Seed) -> Self {
        UndercoverState {
            pair,
            undercover,
            alive: [true; SEATS],
            round: 1,
            phase: Phase::Clues,
            clues: vec![Vec::new()],
            votes: vec![BTreeMap::new()],
            eliminated: Vec::new(),
            to_act: Some(PlayerId(0)),
            seed,
            forfeited_by: None,
        }
    }

    pub fn word_of(&self, seat: PlayerId) -> &str {
        if seat == self.undercover {
            &self.pair.undercover_word
        } else {
            &self.pair.civilian_word
        }
    }

    pub fn alive_seats(&self) -> Vec<PlayerId> {
        (0..SEATS)
            .filter(|&i| self.alive[i])
            .map(|i| PlayerId(i as u8))
            .collect()
    }

    fn next_alive_after(&self, seat: PlayerId) -> Option<PlayerId> {
        ((seat.index() + 1)..SEATS)
            .find(|&i| self.alive[i])
            .map(|i| PlayerId(i as u8))
    }

    fn first_alive(&self) -> PlayerId {
        self.alive_seats()[0]
    }

    pub fn current_clues(&self) -> &[Clue] {
        &self.clues[self.round as usize - 1]
    }

    pub fn legal_votes(&self, voter: PlayerId) -> Vec<PlayerId> {
        self.alive_seats()
            .into_iter()
            .filter(|&p| p != voter)
            .collect()
    }

    pub fn apply(&mut self, actor: PlayerId, action: &UndercoverAction) -> Result<()> {
        if self.phase == Phase::Done {
            return Err(ArenaError::Terminal);
        }
        if self.to_act != Some(actor) {
            return Err(ArenaError::WrongActor { actor });
        }
        let r = self.round as usize - 1;
        match (self.phase, action) {
            (Phase::Clues, UndercoverAction::Clue(text)) => {
                if !clue_is_legal(text, self.word_of(actor)) {
                    return Err(ArenaError::IllegalAction {
                        surface: format!("{}: {text}", actor.display_name()),
                        reason: "clue is empty or contains the secret word".into(),
                    });
                }
                self.clues[r].push(Clue {
                    seat: actor,
                    text: text.trim().to_string(),
                });
                match self.next_alive_after(actor) {
                    Some(next) => self.to_act = Some(next),
                    None => {
                        self.phase = Phase::Voting;
                        self.to_act = Some(self.first_alive());
                    }
                }
            }
            (Phase::Voting, UndercoverAction::Vote(target)) => {
                if !self.legal_votes(actor).contains(target) {
                    return Err(ArenaError::IllegalAction {
                        surface: format!("vote: {}.", target.display_name()),
                        reason: "must vote for another living player".into(),
                    });
                }
                self.votes[r].insert(actor, *target);
                match self.next_alive_after(actor) {
                    Some(next) => self.to_act = Some(next),
                    None => self.resolve_votes()?,
                }
            }
            _ => {
                return Err(ArenaError::IllegalAction {
                    surface: format!("{action:?}"),
                    reason: "action does not match the current phase".into(),
                })
            }
        }
        Ok(())
    }

    fn resolve_votes(&mut self) -> Result<()> {
        let r = self.round as usize - 1;
        let out = undercover_tally(
            &self.votes[r],
            &self.alive_seats(),
            self.seed.derive(self.round as u64),
        )?;
        self.alive[out.index()] = false;
        self.eliminated.push(out);
        if out == self.undercover || self.round >= MAX_ROUNDS {
            self.phase = Phase::Done;
            self.to_act = None;
        } else {
            self.round += 1;
            self.phase = Phase::Clues;
            self.clues.push(Vec::new());
            self.votes.push(BTreeMap::new());
            self.to_act = Some(self.first_alive());
        }
        Ok(())
    }

    /// Forfeit by `seat` hands the win to the opposing side.
    pub fn forfeit(&mut self, seat: PlayerId) {
        self.forfeited_by = Some(seat);
        self.phase = Phase::Done;
        self.to_act = None;
    }

    pub fn outcome(&self) -> UndercoverOutcome {
        if self.phase != Phase::Done {
            return UndercoverOutcome::Ongoing;
        }
        if let Some(f) = self.forfeited_by {
            return if f == self.undercover {
                UndercoverOutcome::CiviliansWin
            } else {
                UndercoverOutcome::UndercoverWin
            };
        }
        if self.eliminated.contains(&self.undercover) {
            UndercoverOutcome::CiviliansWin
        } else {
            UndercoverOutcome::UndercoverWin
        }
    }

    pub fn civilians(&self) -> Vec<PlayerId> {
        (0..SEATS)
            .map(|i| PlayerId(i as u8))
            .filter(|&p| p != self.undercover)
            .collect()
    }

    pub fn text_blocks(&self, seat: PlayerId) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("player_name".into(), seat.display_name());
        m.insert("word".into(), self.word_of(seat).to_string());
        let messages: String = self
            .current_clues()
            .iter()
            .map(|c| format!("\n{}: {}", c.seat.display_name(), c.text))
            .collect();
        m.insert("messages".into(), messages);
        m.insert("round".into(), self.round.to_string());
        let earlier: Vec<String> = self
            .clues
            .iter()
            .take(self.round as usize - 1)
            .enumerate()
            .map(|(i, round)| {
                let lines: String = round
                    .iter()
                    .map(|c| format!("\n{}: {}", c.seat.display_name(), c.text))
                    .collect();
                format!("Round {}:{lines}", i + 1)
            })
            .collect();
        m.insert("history".into(), earlier.join("\n"));
        m.insert(
            "eliminated".into(),
            self.eliminated
                .iter()
                .map(|p| p.display_name())
                .collect::<Vec<_>>()
                .join(", "),
        );
        m
    }
}

/// Result classification once a voting phase has been resolved.
pub fn undercover_outcome(state: &UndercoverState) -> Result<UndercoverOutcome> {
    let mid_phase = match state.phase {
        Phase::Done => false,
        Phase::Clues => !state.current_clues().is_empty(),
        Phase::Voting => true,
    };
    if mid_phase {
        return Err(ArenaError::InvalidInput(
            "outcome requested in the middle of a phase".into(),
        ));
    }
    Ok(state.outcome())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> WordPair {
        WordPair::new("Moon", "Sun")
    }

    fn votes(pairs: &[(u8, u8)]) -> BTreeMap<PlayerId, PlayerId> {
        pairs
            .iter()
            .map(|&(a, b)| (PlayerId(a), PlayerId(b)))
            .collect()
    }

    fn all_seats() -> Vec<PlayerId> {
        (0..5).map(PlayerId).collect()
    }

    #[test]
    fn assign_gives_one_undercover_word() {
        let s = undercover_assign(pair(), Seed(3));
        let words: Vec<&str> = (0..5).map(|i| s.word_of(PlayerId(i))).collect();
        assert_eq!(words.iter().filter(|w| **w == "Moon").count(), 4);
        assert_eq!(words.iter().filter(|w| **w == "Sun").count(), 1);
        assert_eq!(undercover_assign(pair(), Seed(3)).undercover, s.undercover);
    }

    #[test]
    fn plurality_elimination() {
        let v = votes(&[(1, 0), (2, 0), (3, 0), (4, 1), (0, 1)]);
        assert_eq!(undercover_tally(&v, &all_seats(), Seed(0)).unwrap(), PlayerId(0));
    }

    #[test]
    fn tie_is_deterministic_per_seed() {
        let v = votes(&[(0, 1), (1, 0), (2, 0), (3, 1), (4, 2)]);
        let a = undercover_tally(&v, &all_seats(), Seed(8)).unwrap();
        assert_eq!(a, undercover_tally(&v, &all_seats(), Seed(8)).unwrap());
        assert!(a == PlayerId(0) || a == PlayerId(1));
    }

    #[test]
    fn self_and_dead_votes_rejected() {
        let v = votes(&[(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)]);
        assert!(undercover_tally(&v, &all_seats(), Seed(0)).is_err());
        let alive: Vec<PlayerId> = (1..5).map(PlayerId).collect();
        let v = votes(&[(1, 0), (2, 1), (3, 1), (4, 1)]);
        assert!(undercover_tally(&v, &alive, Seed(0)).is_err());
    }

    fn play_round(s: &mut UndercoverState, target: PlayerId) {
        for p in s.alive_seats() {
            s.apply(p, &UndercoverAction::Clue("It is round.".into())).unwrap();
        }
        for p in s.alive_seats() {
            let t = if p == target {
                s.legal_votes(p)[0]
            } else {
                target
            };
            s.apply(p, &UndercoverAction::Vote(t)).unwrap();
        }
    }

    #[test]
    fn undercover_eliminated_in_round_one() {
        let mut s = UndercoverState::new(pair(), PlayerId(2), Seed(1));
        play_round(&mut s, PlayerId(2));
        assert_eq!(undercover_outcome(&s).unwrap(), UndercoverOutcome::CiviliansWin);
    }

    #[test]
    fn civilian_eliminated_continues_then_undercover_wins() {
        let mut s = UndercoverState::new(pair(), PlayerId(2), Seed(1));
        play_round(&mut s, PlayerId(0));
        assert_eq!(undercover_outcome(&s).unwrap(), UndercoverOutcome::Ongoing);
        assert_eq!(s.round, 2);
        assert_eq!(s.to_act, Some(PlayerId(1)));
        play_round(&mut s, PlayerId(1));
        assert_eq!(undercover_outcome(&s).unwrap(), UndercoverOutcome::UndercoverWin);
        assert_eq!(s.eliminated.len(), 2);
    }

    #[test]
    fn clue_with_secret_word_is_illegal() {
        let mut s = UndercoverState::new(pair(), PlayerId(2), Seed(1));
        let err = s
            .apply(PlayerId(0), &UndercoverAction::Clue("The moon is bright".into()))
            .unwrap_err();
        assert!(matches!(err, ArenaError::IllegalAction { .. }));
    }

    #[test]
    fn outcome_mid_phase_is_error() {
        let mut s = UndercoverState::new(pair(), PlayerId(2), Seed(1));
        s.apply(PlayerId(0), &UndercoverAction::Clue("It glows.".into()))
            .unwrap();
        assert!(undercover_outcome(&s).is_err());
    }
}
