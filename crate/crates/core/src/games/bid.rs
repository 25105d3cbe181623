//! Bid: a two-player first-price sealed-bid auction.
//!
//! Each player holds a private valuation and submits one bid strictly below
//! it. The highest bid wins and earns valuation minus bid; exact ties are
//! broken by a seeded coin.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::env::{Outcome, PlayerId};
use crate::error::{ArenaError, Result};
use crate::seed::{streams, Seed};

/// Currency amount in whole cents, rendered as `$x.xx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BidAmount(u32);

impl BidAmount {
    pub fn from_cents(cents: u32) -> Self {
        BidAmount(cents)
    }

    pub fn cents(self) -> u32 {
        self.0
    }

    pub fn dollars(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for BidAmount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "${}.{:02}", self.0 / 100, self.0 % 100)
    }
}

impl FromStr for BidAmount {
    type Err = ArenaError;

    /// Accepts `$12.5`, `12.50`, `12`; at most two decimals.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || ArenaError::InvalidInput(format!("malformed amount `{s}`"));
        let t = s.trim().trim_start_matches('$').trim();
        let (whole, frac) = match t.split_once('.') {
            Some((w, f)) => (w, f),
            None => (t, ""),
        };
        if whole.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        if !whole.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
            || frac.len() > 2
        {
            return Err(bad());
        }
        let w: u32 = if whole.is_empty() {
            0
        } else {
            whole.parse().map_err(|_| bad())?
        };
        let f: u32 = match frac.len() {
            0 => 0,
            1 => frac.parse::<u32>().map_err(|_| bad())? * 10,
            _ => frac.parse().map_err(|_| bad())?,
        };
        w.checked_mul(100)
            .and_then(|c| c.checked_add(f))
            .map(BidAmount)
            .ok_or_else(bad)
    }
}

impl Serialize for BidAmount {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BidAmount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BidConfig {
    pub min_value_cents: u32,
    pub max_value_cents: u32,
}

impl Default for BidConfig {
    fn default() -> Self {
        BidConfig {
            min_value_cents: 100,
            max_value_cents: 10_000,
        }
    }
}

impl BidConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.min_value_cents == 0 || self.min_value_cents > self.max_value_cents {
            return Err("valuation range must be positive and non-empty".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BidInstance {
    pub values: [BidAmount; 2],
}

pub fn bid_generate(seed: Seed, cfg: &BidConfig) -> BidInstance {
    let mut rng = seed.rng(streams::INSTANCE);
    let mut draw = || BidAmount(rng.gen_range(cfg.min_value_cents..=cfg.max_value_cents));
    BidInstance {
        values: [draw(), draw()],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BidSettlement {
    pub winner: PlayerId,
    /// Rewards in dollars.
    pub rewards: [f64; 2],
}

pub fn validate_bid(bid: BidAmount, value: BidAmount) -> Result<()> {
    if bid >= value {
        return Err(ArenaError::IllegalAction {
            surface: bid.to_string(),
            reason: format!("bid must be lower than the valuation {value}"),
        });
    }
    Ok(())
}

/// Highest bid wins and pays its bid; ties go to a seeded coin flip.
pub fn bid_settle(bids: [BidAmount; 2], values: [BidAmount; 2], seed: Seed) -> Result<BidSettlement> {
    for (b, v) in bids.iter().zip(values.iter()) {
        validate_bid(*b, *v)?;
    }
    let winner = match bids[0].cmp(&bids[1]) {
        std::cmp::Ordering::Greater => 0,
        std::cmp::Ordering::Less => 1,
        std::cmp::Ordering::Equal => seed.rng(streams::TIE_BREAK).gen_range(0..2),
    };
    let mut rewards = [0.0; 2];
    rewards[winner] = (values[winner].cents() - bids[winner].cents()) as f64 / 100.0;
    Ok(BidSettlement {
        winner: PlayerId(winner as u8),
        rewards,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidState {
    pub instance: BidInstance,
    pub bids: [Option<BidAmount>; 2],
    pub to_act: PlayerId,
    pub settlement: Option<BidSettlement>,
    pub seed: Seed,
    pub forfeited_by: Option<PlayerId>,
}

impl BidState {
    pub fn new(instance: BidInstance, seed: Seed) -> Self {
        BidState {
            instance,
            bids: [None, None],
            to_act: PlayerId(0),
            settlement: None,
            seed,
            forfeited_by: None,
        }
    }

    pub fn is_over(&self) -> bool {
        self.settlement.is_some() || self.forfeited_by.is_some()
    }

    pub fn apply(&mut self, bid: BidAmount) -> Result<()> {
        if self.is_over() {
            return Err(ArenaError::Terminal);
        }
        let me = self.to_act.index();
        validate_bid(bid, self.instance.values[me])?;
        self.bids[me] = Some(bid);
        if let [Some(a), Some(b)] = self.bids {
            self.settlement = Some(bid_settle([a, b], self.instance.values, self.seed)?);
        } else {
            self.to_act = PlayerId(1 - me as u8);
        }
        Ok(())
    }

    pub fn forfeit(&mut self, seat: PlayerId) {
        self.forfeited_by = Some(seat);
    }

    pub fn rewards(&self) -> [f64; 2] {
        self.settlement.map_or([0.0; 2], |s| s.rewards)
    }

    pub fn outcome(&self) -> Outcome {
        if let Some(f) = self.forfeited_by {
            return Outcome::Win(PlayerId(1 - f.0));
        }
        match self.settlement {
            Some(s) => Outcome::Win(s.winner),
            None => Outcome::Ongoing,
        }
    }

    /// Only the viewer's own valuation is visible; the other bid stays sealed.
    /// The value is rendered as `12.34` since the templates supply the `$`.
    pub fn text_blocks(&self, seat: PlayerId) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("player_name".into(), seat.display_name());
        let v = self.instance.values[seat.index()].cents();
        m.insert("value".into(), format!("{}.{:02}", v / 100, v % 100));
        m
    }
}
