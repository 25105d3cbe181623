//! Playing cards and the poker hand evaluator.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ArenaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Suit {
    Spades,
    Hearts,
    Diamonds,
    Clubs,
}

impl Suit {
    pub const ALL: [Suit; 4] = [Suit::Spades, Suit::Hearts, Suit::Diamonds, Suit::Clubs];

    pub fn letter(self) -> char {
        match self {
            Suit::Spades => 'S',
            Suit::Hearts => 'H',
            Suit::Diamonds => 'D',
            Suit::Clubs => 'C',
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Rank 2..=14 (ace high) and suit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Card {
    pub rank: u8,
    pub suit: Suit,
}

impl Card {
    pub fn new(rank: u8, suit: Suit) -> Self {
        debug_assert!((2..=14).contains(&rank));
        Card { rank, suit }
    }

    /// Dense index 0..52.
    pub fn index(self) -> usize {
        self.suit.index() * 13 + (self.rank as usize - 2)
    }

    pub fn from_index(i: usize) -> Card {
        Card {
            rank: (i % 13) as u8 + 2,
            suit: Suit::ALL[i / 13],
        }
    }
}

pub fn rank_char(rank: u8) -> char {
    match rank {
        2..=9 => (b'0' + rank) as char,
        10 => 'T',
        11 => 'J',
        12 => 'Q',
        13 => 'K',
        14 => 'A',
        _ => '?',
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", rank_char(self.rank), self.suit.letter())
    }
}

impl FromStr for Card {
    type Err = ArenaError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        let bad = || ArenaError::InvalidCard(s.to_string());
        let (rank_part, suit_part) = t.split_at(t.len().checked_sub(1).ok_or_else(bad)?);
        let rank = match rank_part {
            "A" => 14,
            "K" => 13,
            "Q" => 12,
            "J" => 11,
            "T" | "10" => 10,
            r if r.len() == 1 && ("2"..="9").contains(&r) => r.parse::<u8>().map_err(|_| bad())?,
            _ => return Err(bad()),
        };
        let suit = match suit_part {
            "S" | "♠" => Suit::Spades,
            "H" | "♥" => Suit::Hearts,
            "D" | "♦" => Suit::Diamonds,
            "C" | "♣" => Suit::Clubs,
            _ => return Err(bad()),
        };
        Ok(Card { rank, suit })
    }
}

impl Serialize for Card {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Card {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses `AS,KS` / `AS KS` style lists.
pub fn parse_cards(text: &str) -> Result<Vec<Card>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect()
}

pub fn format_cards(cards: &[Card]) -> String {
    cards
        .iter()
        .map(Card::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// The 52 cards in index order.
pub fn full_deck() -> Vec<Card> {
    (0..52).map(Card::from_index).collect()
}

/// Errors on any repeated card.
pub fn ensure_distinct(cards: &[Card]) -> Result<()> {
    let mut seen = 0u64;
    for c in cards {
        let bit = 1u64 << c.index();
        if seen & bit != 0 {
            return Err(ArenaError::DuplicateCard(c.to_string()));
        }
        seen |= bit;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HandCategory {
    HighCard,
    OnePair,
    TwoPair,
    ThreeOfAKind,
    Straight,
    Flush,
    FullHouse,
    FourOfAKind,
    StraightFlush,
    RoyalFlush,
}

impl HandCategory {
    pub const ALL: [HandCategory; 10] = [
        HandCategory::HighCard,
        HandCategory::OnePair,
        HandCategory::TwoPair,
        HandCategory::ThreeOfAKind,
        HandCategory::Straight,
        HandCategory::Flush,
        HandCategory::FullHouse,
        HandCategory::FourOfAKind,
        HandCategory::StraightFlush,
        HandCategory::RoyalFlush,
    ];
}

/// Category first, then tiebreak ranks compared lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HandRank {
    pub category: HandCategory,
    pub tiebreak: [u8; 5],
}

impl HandRank {
    fn new(category: HandCategory, ranks: &[u8]) -> Self {
        let mut tiebreak = [0u8; 5];
        tiebreak[..ranks.len()].copy_from_slice(ranks);
        HandRank { category, tiebreak }
    }
}

/// Highest card of a five-long run in `mask` (bit r = rank r, ace also at bit 1).
fn straight_high(mask: u16) -> Option<u8> {
    let mask = if mask & (1 << 14) != 0 { mask | 0b10 } else { mask };
    (5..=14u8)
        .rev()
        .find(|&high| (mask >> (high - 4)) & 0b1_1111 == 0b1_1111)
}

fn top_ranks(mask: u16, n: usize) -> Vec<u8> {
    (2..=14u8)
        .rev()
        .filter(|&r| mask & (1 << r) != 0)
        .take(n)
        .collect()
}

/// Best five-card hand among 5 to 7 cards. Cards must be distinct.
pub(crate) fn evaluate_unchecked(cards: &[Card]) -> HandRank {
    let mut counts = [0u8; 15];
    let mut suits = [0u16; 4];
    let mut suit_len = [0u8; 4];
    let mut all = 0u16;
    for c in cards {
        counts[c.rank as usize] += 1;
        suits[c.suit.index()] |= 1 << c.rank;
        suit_len[c.suit.index()] += 1;
        all |= 1 << c.rank;
    }

    let flush_suit = (0..4).find(|&s| suit_len[s] >= 5);
    if let Some(s) = flush_suit {
        if let Some(high) = straight_high(suits[s]) {
            let cat = if high == 14 {
                HandCategory::RoyalFlush
            } else {
                HandCategory::StraightFlush
            };
            return HandRank::new(cat, &[high]);
        }
    }

    let mut quads = 0u8;
    let mut trips = [0u8; 2];
    let mut pairs = [0u8; 3];
    let (mut nt, mut np) = (0, 0);
    for r in (2..=14u8).rev() {
        match counts[r as usize] {
            4 => quads = r,
            3 => {
                trips[nt] = r;
                nt += 1;
            }
            2 => {
                pairs[np] = r;
                np += 1;
            }
            _ => {}
        }
    }

    if quads != 0 {
        let kicker = top_ranks(all & !(1 << quads), 1);
        return HandRank::new(HandCategory::FourOfAKind, &[quads, kicker[0]]);
    }
    if nt >= 1 && (nt >= 2 || np >= 1) {
        let pair = if nt >= 2 { trips[1].max(pairs[0]) } else { pairs[0] };
        return HandRank::new(HandCategory::FullHouse, &[trips[0], pair]);
    }
    if let Some(s) = flush_suit {
        return HandRank::new(HandCategory::Flush, &top_ranks(suits[s], 5));
    }
    if let Some(high) = straight_high(all) {
        return HandRank::new(HandCategory::Straight, &[high]);
    }
    if nt == 1 {
        let mut t = vec![trips[0]];
        t.extend(top_ranks(all & !(1 << trips[0]), 2));
        return HandRank::new(HandCategory::ThreeOfAKind, &t);
    }
    if np >= 2 {
        let rest = all & !(1 << pairs[0]) & !(1 << pairs[1]);
        let mut t = vec![pairs[0], pairs[1]];
        t.extend(top_ranks(rest, 1));
        return HandRank::new(HandCategory::TwoPair, &t);
    }
    if np == 1 {
        let mut t = vec![pairs[0]];
        t.extend(top_ranks(all & !(1 << pairs[0]), 3));
        return HandRank::new(HandCategory::OnePair, &t);
    }
    HandRank::new(HandCategory::HighCard, &top_ranks(all, 5))
}

pub fn evaluate5(cards: &[Card; 5]) -> Result<HandRank> {
    ensure_distinct(cards)?;
    Ok(evaluate_unchecked(cards))
}

/// Best five-card hand from seven distinct cards.
pub fn evaluate7(cards: &[Card]) -> Result<HandRank> {
    if cards.len() != 7 {
        return Err(ArenaError::InvalidInput(format!(
            "evaluate7 needs 7 cards, got {}",
            cards.len()
        )));
    }
    ensure_distinct(cards)?;
    Ok(evaluate_unchecked(cards))
}
