//! Two-player, two-color Hanabi with two-card hands.
//!
//! Deck per color: three 1s, two each of 2–4, one 5 (20 cards total).
//! The game ends when the last life token is lost, both fireworks are
//! complete, or the last card is drawn from the deck.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{ArenaError, Result};
use crate::seed::{streams, Seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    Red,
    Yellow,
}

impl Color {
    pub const ALL: [Color; 2] = [Color::Red, Color::Yellow];

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "Red",
            Color::Yellow => "Yellow",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

pub const MAX_RANK: u8 = 5;
pub const HAND_SIZE: usize = 2;
const RANK_COPIES: [u8; 5] = [3, 2, 2, 2, 1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HanabiCard {
    pub color: Color,
    pub rank: u8,
}

impl fmt::Display for HanabiCard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.color.name(), self.rank)
    }
}

/// Slots are 0-based internally and 1-based in the text surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HanabiAction {
    Play(u8),
    Discard(u8),
    RevealColor(Color),
    RevealRank(u8),
}

impl HanabiAction {
    pub fn label(&self) -> String {
        match self {
            HanabiAction::Play(s) => format!("Play Card {}", s + 1),
            HanabiAction::Discard(s) => format!("Discard Card {}", s + 1),
            HanabiAction::RevealColor(c) => format!("Reveal {} Cards for another player", c.name()),
            HanabiAction::RevealRank(r) => format!("Reveal Rank {r} Cards for another player"),
        }
    }

    /// Coarse class used by the action-distribution analysis.
    pub fn class(&self) -> &'static str {
        match self {
            HanabiAction::Play(_) => "play",
            HanabiAction::Discard(_) => "discard",
            HanabiAction::RevealColor(_) | HanabiAction::RevealRank(_) => "reveal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    /// Sum over colors of the firework's top card (max 10).
    #[default]
    TopSum,
    /// Sum of the values of every successfully played card (max 30).
    AllValues,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HanabiConfig {
    pub info_tokens: u8,
    pub life_tokens: u8,
    pub score_mode: ScoreMode,
}

impl Default for HanabiConfig {
    fn default() -> Self {
        HanabiConfig {
            info_tokens: 3,
            life_tokens: 1,
            score_mode: ScoreMode::TopSum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Knowledge {
    pub color: bool,
    pub rank: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeldCard {
    pub card: HanabiCard,
    pub known: Knowledge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HanabiState {
    pub config: HanabiConfig,
    pub deck: Vec<HanabiCard>,
    pub hands: [Vec<HeldCard>; 2],
    pub fireworks: [u8; 2],
    pub info_tokens: u8,
    pub life_tokens: u8,
    pub discards: Vec<HanabiCard>,
    pub to_act: usize,
    pub last_action: [Option<HanabiAction>; 2],
    pub last_played: Option<HanabiCard>,
    pub finished: bool,
}

pub fn full_hanabi_deck() -> Vec<HanabiCard> {
    let mut deck = Vec::with_capacity(20);
    for color in Color::ALL {
        for (i, &n) in RANK_COPIES.iter().enumerate() {
            for _ in 0..n {
                deck.push(HanabiCard {
                    color,
                    rank: i as u8 + 1,
                });
            }
        }
    }
    deck
}

/// Points for a firework configuration under `mode`.
pub fn score_fireworks(fireworks: &[u8; 2], mode: ScoreMode) -> u32 {
    fireworks
        .iter()
        .map(|&top| match mode {
            ScoreMode::TopSum => top as u32,
            ScoreMode::AllValues => (top as u32) * (top as u32 + 1) / 2,
        })
        .sum()
}

pub fn hanabi_score(state: &HanabiState) -> u32 {
    score_fireworks(&state.fireworks, state.config.score_mode)
}

impl HanabiState {
    pub fn deal(seed: Seed, config: HanabiConfig) -> Result<Self> {
        if config.info_tokens == 0 || config.life_tokens == 0 {
            return Err(ArenaError::InvalidConfig {
                env: crate::env::EnvKind::Hanabi,
                reason: "info and life tokens must be positive".into(),
            });
        }
        let mut deck = full_hanabi_deck();
        deck.shuffle(&mut seed.rng(streams::DEAL));
        let mut hands: [Vec<HeldCard>; 2] = [Vec::new(), Vec::new()];
        for _ in 0..HAND_SIZE {
            for hand in hands.iter_mut() {
                let card = deck.pop().expect("20-card deck");
                hand.push(HeldCard {
                    card,
                    known: Knowledge::default(),
                });
            }
        }
        Ok(HanabiState {
            config,
            deck,
            hands,
            fireworks: [0; 2],
            info_tokens: config.info_tokens,
            life_tokens: config.life_tokens,
            discards: Vec::new(),
            to_act: 0,
            last_action: [None; 2],
            last_played: None,
            finished: false,
        })
    }

    pub fn score(&self) -> u32 {
        hanabi_score(self)
    }

    pub fn legal_actions(&self) -> Vec<HanabiAction> {
        if self.finished {
            return Vec::new();
        }
        let me = self.to_act;
        let other = &self.hands[1 - me];
        let mut out = Vec::new();
        for slot in 0..self.hands[me].len() as u8 {
            out.push(HanabiAction::Play(slot));
        }
        if self.info_tokens < self.config.info_tokens {
            for slot in 0..self.hands[me].len() as u8 {
                out.push(HanabiAction::Discard(slot));
            }
        }
        if self.info_tokens >= 1 {
            for color in Color::ALL {
                if other.iter().any(|h| h.card.color == color) {
                    out.push(HanabiAction::RevealColor(color));
                }
            }
            for rank in 1..=MAX_RANK {
                if other.iter().any(|h| h.card.rank == rank) {
                    out.push(HanabiAction::RevealRank(rank));
                }
            }
        }
        out
    }

    fn draw_into(&mut self, seat: usize) {
        if let Some(card) = self.deck.pop() {
            self.hands[seat].push(HeldCard {
                card,
                known: Knowledge::default(),
            });
            if self.deck.is_empty() {
                self.finished = true;
            }
        }
    }

    /// Applies `action` for the seat to act. Returns the score change.
    pub fn apply(&mut self, action: HanabiAction) -> Result<i64> {
        if self.finished {
            return Err(ArenaError::Terminal);
        }
        if !self.legal_actions().contains(&action) {
            return Err(ArenaError::IllegalAction {
                surface: format!("Action: {}", action.label()),
                reason: "not available".into(),
            });
        }
        let before = self.score() as i64;
        let me = self.to_act;
        match action {
            HanabiAction::Play(slot) => {
                let held = self.hands[me].remove(slot as usize);
                let c = held.card.color.index();
                if self.fireworks[c] + 1 == held.card.rank {
                    self.fireworks[c] = held.card.rank;
                    if held.card.rank == MAX_RANK && self.info_tokens < self.config.info_tokens {
                        self.info_tokens += 1;
                    }
                } else {
                    self.discards.push(held.card);
                    self.life_tokens -= 1;
                }
                self.last_played = Some(held.card);
                self.draw_into(me);
            }
            HanabiAction::Discard(slot) => {
                let held = self.hands[me].remove(slot as usize);
                self.discards.push(held.card);
                self.info_tokens += 1;
                self.last_played = Some(held.card);
                self.draw_into(me);
            }
            HanabiAction::RevealColor(color) => {
                self.info_tokens -= 1;
                for h in self.hands[1 - me].iter_mut() {
                    if h.card.color == color {
                        h.known.color = true;
                    }
                }
            }
            HanabiAction::RevealRank(rank) => {
                self.info_tokens -= 1;
                for h in self.hands[1 - me].iter_mut() {
                    if h.card.rank == rank {
                        h.known.rank = true;
                    }
                }
            }
        }
        self.last_action[me] = Some(action);
        if self.life_tokens == 0 || self.fireworks.iter().all(|&t| t == MAX_RANK) {
            self.finished = true;
        }
        self.to_act = 1 - me;
        Ok(self.score() as i64 - before)
    }

    pub fn lost_all_lives(&self) -> bool {
        self.life_tokens == 0
    }

    /// Every card of the initial deck, wherever it currently sits.
    pub fn card_multiset(&self) -> Vec<HanabiCard> {
        let mut all: Vec<HanabiCard> = self.deck.clone();
        all.extend(self.hands.iter().flatten().map(|h| h.card));
        all.extend(self.discards.iter().copied());
        for color in Color::ALL {
            for rank in 1..=self.fireworks[color.index()] {
                all.push(HanabiCard { color, rank });
            }
        }
        all.sort();
        all
    }

    fn describe_known(h: &HeldCard) -> String {
        let color = if h.known.color {
            h.card.color.name().to_string()
        } else {
            "unknown color".to_string()
        };
        let rank = if h.known.rank {
            format!("rank {}", h.card.rank)
        } else {
            "unknown rank".to_string()
        };
        format!("{color}, {rank}")
    }

    pub fn text_blocks(&self, seat: usize) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let other = 1 - seat;
        m.insert(
            "other_hands".into(),
            self.hands[other]
                .iter()
                .enumerate()
                .map(|(i, h)| format!("card {}: {}", i + 1, h.card))
                .collect::<Vec<_>>()
                .join(", "),
        );
        m.insert(
            "fireworks".into(),
            Color::ALL
                .iter()
                .map(|c| format!("{} {}", c.name(), self.fireworks[c.index()]))
                .collect::<Vec<_>>()
                .join(", "),
        );
        m.insert(
            "tokens".into(),
            format!(
                "{} info tokens and {} life tokens",
                self.info_tokens, self.life_tokens
            ),
        );
        m.insert(
            "revealed".into(),
            self.hands[seat]
                .iter()
                .enumerate()
                .map(|(i, h)| format!("card {}: {}", i + 1, Self::describe_known(h)))
                .collect::<Vec<_>>()
                .join("; "),
        );
        m.insert("deck_size".into(), self.deck.len().to_string());
        m.insert(
            "opponent_action".into(),
            self.last_action[other].map_or_else(|| "None".into(), |a| a.label()),
        );
        m.insert(
            "last_played".into(),
            self.last_played
                .map_or_else(|| "None".into(), |c| c.to_string()),
        );
        m.insert(
            "available".into(),
            self.legal_actions()
                .iter()
                .map(|a| a.label())
                .collect::<Vec<_>>()
                .join(", "),
        );
        m
    }
}
