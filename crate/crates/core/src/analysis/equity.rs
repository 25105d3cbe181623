//! Hold'em showdown equity against a uniformly random opponent hand.
//!
//! Ties count as half a win. The Monte Carlo estimator samples opponent
//! hole cards and the missing board cards without replacement; the exact
//! variant enumerates every completion.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cards::{ensure_distinct, evaluate_unchecked, Card, HandRank};
use crate::error::{ArenaError, Result};
use crate::seed::Seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquityEstimate {
    pub p_win: f64,
    pub samples: u64,
    pub seed: Seed,
}

fn validate(hole: &[Card; 2], community: &[Card], min_board: usize) -> Result<Vec<Card>> {
    if !(min_board..=5).contains(&community.len()) {
        return Err(ArenaError::InvalidInput(format!(
            "equity needs {min_board} to 5 community cards, got {}",
            community.len()
        )));
    }
    let mut known = hole.to_vec();
    known.extend_from_slice(community);
    ensure_distinct(&known)?;
    let mut used = [false; 52];
    for c in &known {
        used[c.index()] = true;
    }
    Ok((0..52).filter(|&i| !used[i]).map(Card::from_index).collect())
}

fn showdown(hero: HandRank, villain: HandRank) -> u64 {
    match hero.cmp(&villain) {
        std::cmp::Ordering::Greater => 2,
        std::cmp::Ordering::Equal => 1,
        std::cmp::Ordering::Less => 0,
    }
}

/// Monte Carlo equity. Accepts any street, including preflop (empty board).
pub fn mc_equity(hole: &[Card; 2], community: &[Card], n_samples: u64, seed: Seed) -> Result<EquityEstimate> {
    if n_samples == 0 {
        return Err(ArenaError::InvalidInput("need at least one sample".into()));
    }
    let mut unseen = validate(hole, community, 0)?;
    let missing = 5 - community.len();
    let draw = 2 + missing;
    let mut rng = seed.rng(0);
    let mut seven_h = [hole[0]; 7];
    let mut seven_v = [hole[0]; 7];
    seven_h[..2].copy_from_slice(hole);
    seven_h[2..2 + community.len()].copy_from_slice(community);
    seven_v[2..2 + community.len()].copy_from_slice(community);
    let n = unseen.len();
    let mut half_wins = 0u64;
    for _ in 0..n_samples {
        // Partial Fisher-Yates: the first `draw` slots become the sample.
        for i in 0..draw {
            let j = rng.gen_range(i..n);
            unseen.swap(i, j);
        }
        seven_v[..2].copy_from_slice(&unseen[..2]);
        for k in 0..missing {
            seven_h[2 + community.len() + k] = unseen[2 + k];
            seven_v[2 + community.len() + k] = unseen[2 + k];
        }
        half_wins += showdown(evaluate_unchecked(&seven_h), evaluate_unchecked(&seven_v));
    }
    Ok(EquityEstimate {
        p_win: half_wins as f64 / (2 * n_samples) as f64,
        samples: n_samples,
        seed,
    })
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exhaustive equity over every opponent hand and board completion.
pub fn exact_equity(hole: &[Card; 2], community: &[Card]) -> Result<f64> {
    let unseen = validate(hole, community, 3)?;
    let missing = 5 - community.len();
    let n = unseen.len();
    let runouts = combinations(n, missing);
    let pairs = combinations(n, 2);

    // Hero strength depends only on the runout.
    let hero_ranks: Vec<HandRank> = runouts
        .iter()
        .map(|ro| {
            let mut cards = hole.to_vec();
            cards.extend_from_slice(community);
            cards.extend(ro.iter().map(|&i| unseen[i]));
            evaluate_unchecked(&cards)
        })
        .collect();

    let per_pair = |pair: &Vec<usize>| -> (u64, u64) {
        let mut half = 0u64;
        let mut count = 0u64;
        let mut cards: Vec<Card> = Vec::with_capacity(7);
        for (ro, hero) in runouts.iter().zip(&hero_ranks) {
            if ro.iter().any(|i| pair.contains(i)) {
                continue;
            }
            cards.clear();
            cards.push(unseen[pair[0]]);
            cards.push(unseen[pair[1]]);
            cards.extend_from_slice(community);
            cards.extend(ro.iter().map(|&i| unseen[i]));
            half += showdown(*hero, evaluate_unchecked(&cards));
            count += 1;
        }
        (half, count)
    };

    #[cfg(feature = "parallel")]
    let (half, count) = {
        use rayon::prelude::*;
        pairs
            .par_iter()
            .map(per_pair)
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    };
    #[cfg(not(feature = "parallel"))]
    let (half, count) = pairs
        .iter()
        .map(per_pair)
        .fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    Ok(half as f64 / (2 * count) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::parse_cards;

    fn two(s: &str) -> [Card; 2] {
        let v = parse_cards(s).unwrap();
        [v[0], v[1]]
    }

    #[test]
    fn nut_hand() {
        let board = parse_cards("QS, JS, TS").unwrap();
        let e = mc_equity(&two("AS, KS"), &board, 2000, Seed(7)).unwrap();
        assert_eq!(e.p_win, 1.0);
    }

    #[test]
    fn board_plays() {
        let board = parse_cards("AS, AH, AD, AC, KS").unwrap();
        let e = mc_equity(&two("2C, 3D"), &board, 500, Seed(1)).unwrap();
        // Opponents holding a king would only tie; none can beat the board.
        assert_eq!(e.p_win, 0.5);
        assert_eq!(exact_equity(&two("2C, 3D"), &board).unwrap(), 0.5);
    }

    #[test]
    fn combination_counts() {
        assert_eq!(combinations(45, 2).len(), 990);
        assert_eq!(combinations(5, 0).len(), 1);
    }

    #[test]
    fn duplicate_rejected() {
        let board = parse_cards("AS, JS, TS").unwrap();
        assert!(mc_equity(&two("AS, KS"), &board, 10, Seed(0)).is_err());
    }
}
