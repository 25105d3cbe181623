//! Heads-up no-limit Texas Hold'em, one hand per game, with the five
//! abstract actions Fold / Check and Call / Raise Half Pot / Raise Full Pot /
//! All in.
//!
//! Raise sizes are computed on the pot after calling and rounded up to whole
//! chips. A bet is capped at what the opponent can still match, so heads-up
//! play never needs side pots.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::cards::{format_cards, full_deck, Card};
use crate::error::{ArenaError, Result};
use crate::seed::{streams, Seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HoldemAction {
    Fold,
    CheckCall,
    RaiseHalfPot,
    RaiseFullPot,
    AllIn,
}

impl HoldemAction {
    pub const ALL: [HoldemAction; 5] = [
        HoldemAction::Fold,
        HoldemAction::CheckCall,
        HoldemAction::RaiseHalfPot,
        HoldemAction::RaiseFullPot,
        HoldemAction::AllIn,
    ];

    pub fn label(self) -> &'static str {
        match self {
            HoldemAction::Fold => "Fold",
            HoldemAction::CheckCall => "Check and Call",
            HoldemAction::RaiseHalfPot => "Raise Half Pot",
            HoldemAction::RaiseFullPot => "Raise Full Pot",
            HoldemAction::AllIn => "All in",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Round {
    Preflop,
    Flop,
    Turn,
    River,
    Showdown,
}

impl Round {
    pub fn community_len(self) -> usize {
        match self {
            Round::Preflop => 0,
            Round::Flop => 3,
            Round::Turn => 4,
            Round::River | Round::Showdown => 5,
        }
    }

    fn next(self) -> Round {
        match self {
            Round::Preflop => Round::Flop,
            Round::Flop => Round::Turn,
            Round::Turn => Round::River,
            Round::River | Round::Showdown => Round::Showdown,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HoldemConfig {
    pub starting_stack: u32,
    pub small_blind: u32,
    pub big_blind: u32,
    /// Seat holding the button (posts the small blind, acts first preflop).
    pub button: usize,
}

impl Default for HoldemConfig {
    fn default() -> Self {
        HoldemConfig {
            starting_stack: 100,
            small_blind: 1,
            big_blind: 2,
            button: 0,
        }
    }
}

impl HoldemConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.button > 1 {
            return Err("button must be seat 0 or 1".into());
        }
        if self.small_blind == 0 || self.big_blind < self.small_blind {
            return Err("blinds must satisfy 0 < small <= big".into());
        }
        if self.big_blind >= self.starting_stack {
            return Err("starting stack must exceed the big blind".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoldemDecision {
    pub seat: usize,
    pub round: Round,
    pub action: HoldemAction,
    /// Chips actually moved into the pot.
    pub amount: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoldemState {
    pub config: HoldemConfig,
    pub hole: [[Card; 2]; 2],
    /// All five board cards, fixed at deal time; `round` decides how many are visible.
    pub board: [Card; 5],
    pub stacks: [u32; 2],
    /// Chips committed over the whole hand.
    pub contributed: [u32; 2],
    /// Chips committed in the current betting round.
    pub round_bets: [u32; 2],
    pub round: Round,
    pub to_act: usize,
    pub acted: [bool; 2],
    pub folded: Option<usize>,
    pub finished: bool,
    pub history: Vec<HoldemDecision>,
}

impl HoldemState {
    pub fn deal(seed: Seed, config: HoldemConfig) -> Self {
        let mut deck = full_deck();
        deck.shuffle(&mut seed.rng(streams::DEAL));
        let hole = [[deck[0], deck[1]], [deck[2], deck[3]]];
        let board = [deck[4], deck[5], deck[6], deck[7], deck[8]];
        Self::with_cards(config, hole, board)
    }

    /// A hand with chosen cards; used by tests and fixed scenarios.
    pub fn with_cards(config: HoldemConfig, hole: [[Card; 2]; 2], board: [Card; 5]) -> Self {
        let sb = config.button;
        let bb = 1 - sb;
        let mut stacks = [config.starting_stack; 2];
        let mut round_bets = [0; 2];
        stacks[sb] -= config.small_blind;
        stacks[bb] -= config.big_blind;
        round_bets[sb] = config.small_blind;
        round_bets[bb] = config.big_blind;
        HoldemState {
            config,
            hole,
            board,
            stacks,
            contributed: round_bets,
            round_bets,
            round: Round::Preflop,
            to_act: sb,
            acted: [false; 2],
            folded: None,
            finished: false,
            history: Vec::new(),
        }
    }

    pub fn pot(&self) -> u32 {
        self.contributed[0] + self.contributed[1]
    }

    pub fn total_chips(&self) -> u32 {
        self.stacks[0] + self.stacks[1] + self.pot()
    }

    pub fn community(&self) -> &[Card] {
        &self.board[..self.round.community_len()]
    }

    pub fn to_call(&self, seat: usize) -> u32 {
        self.round_bets[1 - seat].saturating_sub(self.round_bets[seat])
    }

    /// Extra chips (beyond calling) a raise would add, before capping.
    pub fn raise_size(&self, seat: usize, action: HoldemAction) -> Option<u32> {
        let pot_after_call = self.pot() + self.to_call(seat);
        match action {
            HoldemAction::RaiseHalfPot => Some(pot_after_call.div_ceil(2)),
            HoldemAction::RaiseFullPot => Some(pot_after_call),
            _ => None,
        }
    }

    pub fn legal_actions(&self) -> Vec<HoldemAction> {
        if self.finished {
            return Vec::new();
        }
        let me = self.to_act;
        let opp = 1 - me;
        let mut out = vec![HoldemAction::Fold, HoldemAction::CheckCall];
        if self.stacks[opp] == 0 {
            return out;
        }
        let to_call = self.to_call(me);
        for a in [HoldemAction::RaiseHalfPot, HoldemAction::RaiseFullPot] {
            let size = self.raise_size(me, a).unwrap_or(0);
            if to_call + size < self.stacks[me] {
                out.push(a);
            }
        }
        if self.stacks[me] > 0 {
            out.push(HoldemAction::AllIn);
        }
        out
    }

    fn commit(&mut self, seat: usize, amount: u32) {
        debug_assert!(amount <= self.stacks[seat]);
        self.stacks[seat] -= amount;
        self.round_bets[seat] += amount;
        self.contributed[seat] += amount;
    }

    pub fn apply(&mut self, action: HoldemAction) -> Result<()> {
        if self.finished {
            return Err(ArenaError::Terminal);
        }
        if !self.legal_actions().contains(&action) {
            return Err(ArenaError::IllegalAction {
                surface: format!("Action: {}", action.label()),
                reason: "not available in this betting state".into(),
            });
        }
        let me = self.to_act;
        let opp = 1 - me;
        let to_call = self.to_call(me);
        let round = self.round;
        let mut reopened = false;
        let amount = match action {
            HoldemAction::Fold => {
                self.folded = Some(me);
                self.finished = true;
                0
            }
            HoldemAction::CheckCall => to_call.min(self.stacks[me]),
            HoldemAction::RaiseHalfPot | HoldemAction::RaiseFullPot => {
                let size = self.raise_size(me, action).unwrap_or(0);
                reopened = true;
                to_call + size.min(self.stacks[opp])
            }
            HoldemAction::AllIn => {
                let amount = self.stacks[me].min(to_call + self.stacks[opp]);
                reopened = amount > to_call;
                amount
            }
        };
        self.commit(me, amount);
        self.history.push(HoldemDecision {
            seat: me,
            round,
            action,
            amount,
        });
        if self.finished {
            self.settle();
            return Ok(());
        }
        self.acted[me] = true;
        if reopened {
            self.acted[opp] = false;
        }
        let equal = self.round_bets[0] == self.round_bets[1];
        if self.acted[opp] && equal {
            self.close_round();
        } else {
            self.to_act = opp;
        }
        Ok(())
    }

    fn close_round(&mut self) {
        let all_in = self.stacks[0] == 0 || self.stacks[1] == 0;
        if all_in || self.round == Round::River {
            self.round = Round::Showdown;
            self.finished = true;
            self.settle();
            return;
        }
        self.round = self.round.next();
        self.round_bets = [0; 2];
        self.acted = [false; 2];
        // Postflop the big blind acts first.
        self.to_act = 1 - self.config.button;
    }

    fn settle(&mut self) {
        let pot = self.pot();
        match self.folded {
            Some(loser) => self.stacks[1 - loser] += pot,
            None => match self.showdown_winner() {
                Some(w) => self.stacks[w] += pot,
                None => {
                    self.stacks[0] += pot / 2;
                    self.stacks[1] += pot - pot / 2;
                }
            },
        }
        self.contributed = [0; 2];
        self.round_bets = [0; 2];
    }

    /// Winner at showdown over the full board, `None` on a split pot.
    pub fn showdown_winner(&self) -> Option<usize> {
        let rank = |seat: usize| {
            let mut cards = self.board.to_vec();
            cards.extend_from_slice(&self.hole[seat]);
            crate::cards::evaluate_unchecked(&cards)
        };
        let (a, b) = (rank(0), rank(1));
        match a.cmp(&b) {
            std::cmp::Ordering::Greater => Some(0),
            std::cmp::Ordering::Less => Some(1),
            std::cmp::Ordering::Equal => None,
        }
    }

    /// Forfeit is resolved as a fold by the offending seat.
    pub fn forfeit(&mut self, seat: usize) {
        if self.finished {
            return;
        }
        self.folded = Some(seat);
        self.finished = true;
        self.settle();
    }

    /// Net chips won per seat; only meaningful once finished.
    pub fn net(&self) -> [f64; 2] {
        let s = self.config.starting_stack as f64;
        [self.stacks[0] as f64 - s, self.stacks[1] as f64 - s]
    }

    pub fn winner(&self) -> Option<usize> {
        match self.stacks[0].cmp(&self.stacks[1]) {
            std::cmp::Ordering::Greater => Some(0),
            std::cmp::Ordering::Less => Some(1),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn text_blocks(&self, seat: usize) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("private".into(), format_cards(&self.hole[seat]));
        m.insert("public".into(), format_cards(self.community()));
        m.insert("remaining".into(), self.stacks[seat].to_string());
        m.insert("chips".into(), self.contributed[seat].to_string());
        m.insert(
            "available".into(),
            self.legal_actions()
                .iter()
                .map(|a| a.label())
                .collect::<Vec<_>>()
                .join(", "),
        );
        let opp = self
            .history
            .iter()
            .rev()
            .find(|d| d.seat != seat)
            .map_or_else(|| "None".to_string(), |d| d.action.label().to_string());
        m.insert("opponent_action".into(), opp);
        m
    }
}
