//! Bargain: two players divide a pool of hats, balls and apples.
//!
//! Each player privately values the item types so that the whole pool is
//! worth a fixed total to them. Players alternate messages; a message either
//! proposes a plan (the counts the proposer takes) or accepts the
//! opponent's pending plan with "Deal". One round is one message from each
//! player; no deal after the last round is a failure.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Outcome, PlayerId};
use crate::error::{ArenaError, Result};
use crate::seed::{streams, Seed};

pub const ITEM_NAMES: [&str; 3] = ["hats", "balls", "apples"];

/// Counts of (hats, balls, apples).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ItemCounts(pub [u32; 3]);

impl ItemCounts {
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn fits_in(&self, pool: &ItemCounts) -> bool {
        self.0.iter().zip(pool.0.iter()).all(|(a, b)| a <= b)
    }

    pub fn complement(&self, pool: &ItemCounts) -> ItemCounts {
        ItemCounts([
            pool.0[0] - self.0[0],
            pool.0[1] - self.0[1],
            pool.0[2] - self.0[2],
        ])
    }

    pub fn value(&self, unit_values: &[u32; 3]) -> u32 {
        self.0.iter().zip(unit_values).map(|(c, v)| c * v).sum()
    }
}

impl fmt::Display for ItemCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} hats {} balls {} apples",
            self.0[0], self.0[1], self.0[2]
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BargainAction {
    Deal,
    Propose(ItemCounts),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BargainConfig {
    pub min_total_items: u32,
    pub max_total_items: u32,
    pub min_count: u32,
    pub max_count: u32,
    pub total_value: u32,
    pub max_rounds: u32,
}

impl Default for BargainConfig {
    fn default() -> Self {
        BargainConfig {
            min_total_items: 5,
            max_total_items: 7,
            min_count: 1,
            max_count: 5,
            total_value: 10,
            max_rounds: 10,
        }
    }
}

impl BargainConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.min_total_items > self.max_total_items || self.min_count > self.max_count {
            return Err("empty item-count range".into());
        }
        if self.max_count * 3 < self.min_total_items || self.min_count * 3 > self.max_total_items {
            return Err("no count vector satisfies the item bounds".into());
        }
        if self.total_value == 0 || self.max_rounds == 0 {
            return Err("total value and rounds must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BargainInstance {
    pub counts: ItemCounts,
    /// Unit values per player.
    pub values: [[u32; 3]; 2],
}

impl BargainInstance {
    pub fn is_valid(&self, cfg: &BargainConfig) -> bool {
        let total = self.counts.total();
        (cfg.min_total_items..=cfg.max_total_items).contains(&total)
            && self
                .counts
                .0
                .iter()
                .all(|c| (cfg.min_count..=cfg.max_count).contains(c))
            && self
                .values
                .iter()
                .all(|v| self.counts.value(v) == cfg.total_value)
            && (0..3).all(|i| self.values[0][i] > 0 || self.values[1][i] > 0)
    }
}

/// Uniform draw from the valid instance set by rejection sampling over the
/// bounding box of counts and unit values.
pub fn bargain_generate(seed: Seed, cfg: &BargainConfig) -> BargainInstance {
    let mut rng = seed.rng(streams::INSTANCE);
    loop {
        let counts = ItemCounts([
            rng.gen_range(cfg.min_count..=cfg.max_count),
            rng.gen_range(cfg.min_count..=cfg.max_count),
            rng.gen_range(cfg.min_count..=cfg.max_count),
        ]);
        if !(cfg.min_total_items..=cfg.max_total_items).contains(&counts.total()) {
            continue;
        }
        let mut draw_values = || {
            [
                rng.gen_range(0..=cfg.total_value),
                rng.gen_range(0..=cfg.total_value),
                rng.gen_range(0..=cfg.total_value),
            ]
        };
        let inst = BargainInstance {
            counts,
            values: [draw_values(), draw_values()],
        };
        if inst.is_valid(cfg) {
            return inst;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BargainStatus {
    Negotiating,
    Deal {
        proposer: PlayerId,
        proposer_share: ItemCounts,
    },
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BargainMessage {
    pub seat: PlayerId,
    pub action: BargainAction,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BargainState {
    pub config: BargainConfig,
    pub instance: BargainInstance,
    pub messages: Vec<BargainMessage>,
    /// Latest plan on the table: (proposer, counts the proposer takes).
    pub pending: Option<(PlayerId, ItemCounts)>,
    pub status: BargainStatus,
    pub to_act: PlayerId,
    pub forfeited_by: Option<PlayerId>,
}

impl BargainState {
    pub fn new(instance: BargainInstance, config: BargainConfig) -> Self {
        BargainState {
            config,
            instance,
            messages: Vec::new(),
            pending: None,
            status: BargainStatus::Negotiating,
            to_act: PlayerId(0),
            forfeited_by: None,
        }
    }

    /// 1-based round of the next message.
    pub fn round(&self) -> u32 {
        self.messages.len() as u32 / 2 + 1
    }

    pub fn is_over(&self) -> bool {
        self.status != BargainStatus::Negotiating
    }

    pub fn legal_actions(&self) -> Vec<BargainAction> {
        if self.is_over() {
            return Vec::new();
        }
        let mut out = Vec::new();
        if matches!(self.pending, Some((p, _)) if p != self.to_act) {
            out.push(BargainAction::Deal);
        }
        let pool = self.instance.counts.0;
        for h in 0..=pool[0] {
            for b in 0..=pool[1] {
                for a in 0..=pool[2] {
                    out.push(BargainAction::Propose(ItemCounts([h, b, a])));
                }
            }
        }
        out
    }

    pub fn apply(&mut self, action: BargainAction, text: &str) -> Result<()> {
        if self.is_over() {
            return Err(ArenaError::Terminal);
        }
        let me = self.to_act;
        match action {
            BargainAction::Deal => match self.pending {
                Some((proposer, share)) if proposer != me => {
                    self.status = BargainStatus::Deal {
                        proposer,
                        proposer_share: share,
                    };
                }
                _ => {
                    return Err(ArenaError::IllegalAction {
                        surface: format!("{}: Deal.", me.display_name()),
                        reason: "no opponent plan to accept".into(),
                    })
                }
            },
            BargainAction::Propose(counts) => {
                if !counts.fits_in(&self.instance.counts) {
                    return Err(ArenaError::IllegalAction {
                        surface: format!("{}: {counts}", me.display_name()),
                        reason: "plan claims more items than the pool holds".into(),
                    });
                }
                self.pending = Some((me, counts));
            }
        }
        self.messages.push(BargainMessage {
            seat: me,
            action,
            text: text.to_string(),
        });
        if !self.is_over() && self.messages.len() as u32 >= 2 * self.config.max_rounds {
            self.status = BargainStatus::Failure;
        }
        self.to_act = PlayerId(1 - me.0);
        Ok(())
    }

    pub fn forfeit(&mut self, seat: PlayerId) {
        self.forfeited_by = Some(seat);
        self.status = BargainStatus::Failure;
    }

    /// Each player's share of the pool once a deal is struck.
    pub fn shares(&self) -> Option<[ItemCounts; 2]> {
        match self.status {
            BargainStatus::Deal {
                proposer,
                proposer_share,
            } => {
                let other = proposer_share.complement(&self.instance.counts);
                let mut s = [other; 2];
                s[proposer.index()] = proposer_share;
                Some(s)
            }
            _ => None,
        }
    }

    /// Value each player obtains (zero on failure).
    pub fn payoffs(&self) -> [u32; 2] {
        match self.shares() {
            Some(s) => [
                s[0].value(&self.instance.values[0]),
                s[1].value(&self.instance.values[1]),
            ],
            None => [0, 0],
        }
    }

    pub fn text_blocks(&self, seat: PlayerId) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let pool = self.instance.counts.0;
        let v = self.instance.values[seat.index()];
        m.insert("round".into(), self.round().to_string());
        m.insert("player_name".into(), seat.display_name());
        for (i, name) in ITEM_NAMES.iter().enumerate() {
            m.insert((*name).into(), pool[i].to_string());
        }
        m.insert("value_hat".into(), v[0].to_string());
        m.insert("value_ball".into(), v[1].to_string());
        m.insert("value_apple".into(), v[2].to_string());
        if let Some(last) = self.messages.last().filter(|msg| msg.seat != seat) {
            m.insert("bargaining".into(), last.text.clone());
        }
        if let Some((_, share)) = self.pending.filter(|(p, _)| *p != seat) {
            let mine = share.complement(&self.instance.counts);
            for (i, name) in ITEM_NAMES.iter().enumerate() {
                m.insert(format!("oppo_{name}"), share.0[i].to_string());
                m.insert(format!("my_{name}"), mine.0[i].to_string());
            }
        }
        m
    }
}

/// Final result: higher obtained value wins, equal values draw, no deal fails.
/// A forfeit hands the win to the other player.
pub fn bargain_outcome(state: &BargainState) -> Result<Outcome> {
    if !state.is_over() {
        return Err(ArenaError::InvalidInput("negotiation still running".into()));
    }
    if let Some(f) = state.forfeited_by {
        return Ok(Outcome::Win(PlayerId(1 - f.0)));
    }
    if state.status == BargainStatus::Failure {
        return Ok(Outcome::Failure);
    }
    let [a, b] = state.payoffs();
    Ok(match a.cmp(&b) {
        std::cmp::Ordering::Greater => Outcome::Win(PlayerId(0)),
        std::cmp::Ordering::Less => Outcome::Win(PlayerId(1)),
        std::cmp::Ordering::Equal => Outcome::Draw,
    })
}
