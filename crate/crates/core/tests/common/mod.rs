//! Independent oracles and reference data for the integration tests.
//!
//! Nothing here calls into the engine's own evaluators: each oracle is a
//! separate, deliberately naive implementation.
#![allow(dead_code)]

use arena_core::cards::Card;
use arena_core::games::connect4::{C4Board, COLS, ROWS};
use arena_core::games::Mark;

// ---------------------------------------------------------------- TicTacToe

/// Cells as 0 empty, 1 X, 2 O. Returns the owners of every complete line.
pub fn ttt_line_owners(cells: &[u8; 9]) -> Vec<u8> {
    let at = |r: usize, c: usize| cells[r * 3 + c];
    let mut owners = Vec::new();
    for i in 0..3 {
        if at(i, 0) != 0 && at(i, 0) == at(i, 1) && at(i, 1) == at(i, 2) {
            owners.push(at(i, 0));
        }
        if at(0, i) != 0 && at(0, i) == at(1, i) && at(1, i) == at(2, i) {
            owners.push(at(0, i));
        }
    }
    if at(1, 1) != 0 && at(0, 0) == at(1, 1) && at(1, 1) == at(2, 2) {
        owners.push(at(1, 1));
    }
    if at(1, 1) != 0 && at(0, 2) == at(1, 1) && at(1, 1) == at(2, 0) {
        owners.push(at(1, 1));
    }
    owners
}

/// Negamax value for the side to move: +1 win, 0 draw, -1 loss.
pub fn ttt_negamax(cells: &mut [u8; 9], to_move: u8) -> i8 {
    let owners = ttt_line_owners(cells);
    if !owners.is_empty() {
        // The previous mover completed the line.
        return -1;
    }
    if cells.iter().all(|&c| c != 0) {
        return 0;
    }
    let mut best = -2;
    for i in 0..9 {
        if cells[i] == 0 {
            cells[i] = to_move;
            best = best.max(-ttt_negamax(cells, 3 - to_move));
            cells[i] = 0;
        }
    }
    best
}

/// (games, X wins, O wins, draws) over the full game tree.
pub fn ttt_game_tree_counts() -> (u64, u64, u64, u64) {
    fn walk(cells: &mut [u8; 9], to_move: u8, acc: &mut (u64, u64, u64, u64)) {
        let owners = ttt_line_owners(cells);
        if let Some(&w) = owners.first() {
            acc.0 += 1;
            if w == 1 {
                acc.1 += 1;
            } else {
                acc.2 += 1;
            }
            return;
        }
        if cells.iter().all(|&c| c != 0) {
            acc.0 += 1;
            acc.3 += 1;
            return;
        }
        for i in 0..9 {
            if cells[i] == 0 {
                cells[i] = to_move;
                walk(cells, 3 - to_move, acc);
                cells[i] = 0;
            }
        }
    }
    let mut acc = (0, 0, 0, 0);
    walk(&mut [0; 9], 1, &mut acc);
    acc
}

/// Published totals for the complete TicTacToe game tree.
pub const TTT_TREE: (u64, u64, u64, u64) = (255_168, 131_184, 77_904, 46_080);

/// The seven-move example game used as the prompt worked example: X wins.
pub const EXAMPLE_GAME: [&str; 7] = [
    "X: (1, 3)",
    "O: (1, 1)",
    "X: (3, 1)",
    "O: (2, 2)",
    "X: (3, 3)",
    "O: (2, 3)",
    "X: (3, 2)",
];

// -------------------------------------------------------------- ConnectFour

/// Counts every length-`k` segment of `mark` by testing each start cell in
/// each of the four directions. Overlapping segments all count.
pub fn c4_window_scan(board: &C4Board, mark: Mark, k: usize) -> u32 {
    let dirs: [(i32, i32); 4] = [(0, 1), (1, 0), (1, 1), (1, -1)];
    let mut n = 0;
    for r in 0..ROWS as i32 {
        for c in 0..COLS as i32 {
            for (dr, dc) in dirs {
                let cells: Vec<(i32, i32)> = (0..k as i32).map(|i| (r + dr * i, c + dc * i)).collect();
                let inside = cells
                    .iter()
                    .all(|&(y, x)| (0..ROWS as i32).contains(&y) && (0..COLS as i32).contains(&x));
                if !inside {
                    continue;
                }
                let all_mine = cells
                    .iter()
                    .all(|&(y, x)| board.grid[y as usize][x as usize] == Some(mark));
                if !all_mine {
                    continue;
                }
                n += 1;
            }
        }
    }
    n
}

/// Board value recomputed from the window scan.
pub fn c4_value_oracle(board: &C4Board, me: Mark) -> i64 {
    let w = |m: Mark, k: usize| c4_window_scan(board, m, k) as i64;
    let them = me.other();
    10 * (w(me, 4) - w(them, 4)) + 5 * (w(me, 3) - w(them, 3)) + 2 * (w(me, 2) - w(them, 2))
}

// -------------------------------------------------------------------- Poker

/// Category index (0 high card .. 9 royal flush) and tiebreak ranks for a
/// five-card hand, from sorted rank multiplicities.
pub fn poker_rank5(cards: &[Card; 5]) -> (u8, [u8; 5]) {
    let mut counts = [0u8; 15];
    for c in cards {
        counts[c.rank as usize] += 1;
    }
    // (multiplicity, rank) sorted descending.
    let mut groups: Vec<(u8, u8)> = (2..=14u8)
        .filter(|&r| counts[r as usize] > 0)
        .map(|r| (counts[r as usize], r))
        .collect();
    groups.sort_by(|a, b| b.cmp(a));
    let flush = cards.iter().all(|c| c.suit == cards[0].suit);
    let distinct: Vec<u8> = groups.iter().map(|g| g.1).collect();
    let straight_high = if distinct.len() == 5 {
        let mut rs = distinct.clone();
        rs.sort_unstable();
        if rs[4] - rs[0] == 4 {
            Some(rs[4])
        } else if rs == [2, 3, 4, 5, 14] {
            Some(5)
        } else {
            None
        }
    } else {
        None
    };
    let mut tb = [0u8; 5];
    for (i, g) in groups.iter().enumerate() {
        tb[i] = g.1;
    }
    let shape: Vec<u8> = groups.iter().map(|g| g.0).collect();
    let cat = match (straight_high, flush, shape.as_slice()) {
        (Some(14), true, _) => 9,
        (Some(_), true, _) => 8,
        (_, _, [4, 1]) => 7,
        (_, _, [3, 2]) => 6,
        (_, true, _) => 5,
        (Some(_), false, _) => 4,
        (_, _, [3, 1, 1]) => 3,
        (_, _, [2, 2, 1]) => 2,
        (_, _, [2, 1, 1, 1]) => 1,
        _ => 0,
    };
    if let Some(h) = straight_high {
        tb = [h, 0, 0, 0, 0];
    }
    (cat, tb)
}

/// Best five-card rank among all 21 subsets of seven cards.
pub fn poker_rank7(cards: &[Card; 7]) -> (u8, [u8; 5]) {
    let mut best = (0, [0; 5]);
    for skip_a in 0..7 {
        for skip_b in skip_a + 1..7 {
            let mut five = [cards[0]; 5];
            let mut j = 0;
            for (i, c) in cards.iter().enumerate() {
                if i != skip_a && i != skip_b {
                    five[j] = *c;
                    j += 1;
                }
            }
            best = best.max(poker_rank5(&five));
        }
    }
    best
}

/// Reference 5-card category counts, high card first, royal flush last.
pub const POKER_CENSUS: [u64; 10] = [
    1_302_540, 1_098_240, 123_552, 54_912, 10_200, 5_108, 3_744, 624, 36, 4,
];

/// Exact equity by brute force with the subset evaluator.
pub fn slow_exact_equity(hole: [Card; 2], board: &[Card]) -> f64 {
    let mut used = [false; 52];
    for c in hole.iter().chain(board) {
        used[c.index()] = true;
    }
    let unseen: Vec<Card> = (0..52).filter(|&i| !used[i]).map(Card::from_index).collect();
    let missing = 5 - board.len();
    let mut half = 0u64;
    let mut n = 0u64;
    let idx: Vec<usize> = (0..unseen.len()).collect();
    let runouts = subsets(&idx, missing);
    for i in 0..unseen.len() {
        for j in i + 1..unseen.len() {
            for ro in &runouts {
                if ro.contains(&i) || ro.contains(&j) {
                    continue;
                }
                let mut full = board.to_vec();
                full.extend(ro.iter().map(|&k| unseen[k]));
                let h = poker_rank7(&[hole[0], hole[1], full[0], full[1], full[2], full[3], full[4]]);
                let v = poker_rank7(&[unseen[i], unseen[j], full[0], full[1], full[2], full[3], full[4]]);
                half += match h.cmp(&v) {
                    std::cmp::Ordering::Greater => 2,
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Less => 0,
                };
                n += 1;
            }
        }
    }
    half as f64 / (2 * n) as f64
}

fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut rest in subsets(&items[i + 1..], k - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

pub fn card(s: &str) -> Card {
    s.parse().expect("card literal")
}

pub fn cards<const N: usize>(s: &str) -> [Card; N] {
    let v: Vec<Card> = s.split(',').map(|t| card(t.trim())).collect();
    v.try_into().expect("card count")
}

// ----------------------------------------------------------------- TrueSkill

/// High-precision reference values (50-digit arithmetic, closed-form 1v1
/// update). Fields: winner mu, winner sigma, loser mu, loser sigma.
pub struct TsCase {
    pub a: (f64, f64),
    pub b: (f64, f64),
    pub result: arena_core::rating::MatchResult,
    pub draw_probability: f64,
    pub tau: f64,
    pub expect_a: (f64, f64),
    pub expect_b: (f64, f64),
}

pub fn trueskill_cases() -> Vec<TsCase> {
    use arena_core::rating::MatchResult::*;
    let fresh = (25.0, 25.0 / 3.0);
    vec![
        TsCase {
            a: fresh,
            b: fresh,
            result: AWins,
            draw_probability: 0.0,
            tau: 0.0,
            expect_a: (29.2052208700336, 7.1944813488310814),
            expect_b: (20.7947791299664, 7.1944813488310814),
        },
        TsCase {
            a: fresh,
            b: fresh,
            result: AWins,
            draw_probability: 0.1,
            tau: 0.0,
            expect_a: (29.395575650817896, 7.1711414644532587),
            expect_b: (20.604424349182104, 7.1711414644532587),
        },
        TsCase {
            a: fresh,
            b: fresh,
            result: Draw,
            draw_probability: 0.1,
            tau: 0.0,
            expect_a: (25.0, 6.4572359821565675),
            expect_b: (25.0, 6.4572359821565675),
        },
        TsCase {
            a: (30.0, 4.0),
            b: (20.0, 6.0),
            result: AWins,
            draw_probability: 0.0,
            tau: 0.0,
            expect_a: (30.448544131912023, 3.8692708833621189),
            expect_b: (18.990775703197949, 5.5490530198603687),
        },
        TsCase {
            a: (30.0, 4.0),
            b: (20.0, 6.0),
            result: Draw,
            draw_probability: 0.1,
            tau: 0.0,
            expect_a: (28.158911869464948, 3.613066975134064),
            expect_b: (24.142448293703867, 4.5920753091001623),
        },
        TsCase {
            a: (30.0, 4.0),
            b: (20.0, 6.0),
            result: BWins,
            draw_probability: 0.0,
            tau: 0.0,
            expect_a: (27.277496982654188, 3.6892976166358522),
            expect_b: (26.125631789028077, 4.8893012616407759),
        },
        TsCase {
            a: fresh,
            b: fresh,
            result: AWins,
            draw_probability: 0.0,
            tau: 25.0 / 300.0,
            expect_a: (29.205473176557785, 7.1948164848133452),
            expect_b: (20.794526823442215, 7.1948164848133452),
        },
    ]
}

// ------------------------------------------------------------ Score tables

pub const TABLE_ENVS: [&str; 7] = [
    "TicTacToe",
    "ConnectFour",
    "Texas Hold'em",
    "Bid",
    "Bargain",
    "Undercover",
    "Hanabi",
];

/// Raw per-environment scores, as published.
pub const ORIGIN_TABLE: [(&str, [f64; 7]); 14] = [
    ("GPT-4", [29.02, 27.20, 26.50, 0.70, 24.30, 27.00, 0.45]),
    ("GPT-3.5-Turbo", [24.03, 26.19, 21.53, 0.59, 24.12, 25.00, 0.38]),
    ("Qwen-72B-Chat", [26.14, 21.84, 25.14, 0.40, 22.59, 17.00, 40.0]),
    ("Llama-2-70B", [23.86, 26.08, 26.08, 0.66, 21.54, 23.00, 0.36]),
    ("Agentlm-70B", [23.63, 22.74, 20.50, 0.60, 23.89, 25.00, 0.36]),
    ("DeepSeek-67B-Chat", [19.73, 24.17, 25.61, 0.14, 21.63, 20.00, 0.31]),
    ("SUS-Chat-34B", [23.15, 26.19, 22.36, 0.46, 18.11, 24.00, 0.39]),
    ("Yi-34B-Chat", [22.71, 25.93, 22.81, 0.62, 18.03, 26.00, 0.15]),
    ("Qwen-14B-Chat", [25.08, 19.76, 24.00, 0.61, 22.15, 17.00, 0.32]),
    ("WizardLM-13B", [79.14, 22.67, 19.68, 0.25, 22.18, 13.00, 0.244]),
    ("AgentLM-13B", [22.90, 24.27, 23.02, 0.21, 23.07, 17.00, 0.10]),
    ("DeepSeek-7B-Chat", [23.56, 19.87, 25.47, 0.10, 22.49, 20.00, 0.00]),
    ("AgentLM-7B", [19.82, 24.57, 22.56, 0.00, 20.30, 18.00, 0.44]),
    ("Vicuna-7B", [18.85, 21.79, 23.97, 0.48, 20.98, 17.00, 0.39]),
];

/// Normalized scores, as published.
pub const NORMALIZED_TABLE: [(&str, [f64; 7]); 14] = [
    ("GPT-4", [100.00, 100.00, 100.00, 100.00, 100.00, 100.00, 100.00]),
    ("GPT-3.5-Turbo", [82.81, 96.30, 81.23, 84.17, 99.26, 92.59, 84.13]),
    ("Qwen-72B-Chat", [90.08, 80.30, 94.88, 84.42, 92.95, 62.96, 89.01]),
    ("Llama-2-70B", [82.21, 95.90, 98.42, 94.22, 88.63, 85.19, 80.35]),
    ("Agentlm-70B", [81.44, 83.62, 77.35, 86.10, 98.33, 92.59, 79.58]),
    ("DeepSeek-67B-Chat", [68.00, 88.88, 96.64, 20.30, 89.02, 74.07, 68.69]),
    ("SUS-Chat-34B", [79.75, 96.30, 84.38, 66.17, 74.53, 88.89, 86.33]),
    ("Yi-34B-Chat", [78.23, 95.36, 86.06, 88.77, 74.18, 96.30, 34.30]),
    ("Qwen-14B-Chat", [86.40, 72.67, 90.56, 86.82, 91.13, 88.89, 71.70]),
    ("WizardLM-13B", [79.14, 83.35, 74.26, 35.28, 91.28, 48.15, 54.23]),
    ("AgentLM-13B", [78.89, 89.23, 86.85, 30.39, 94.93, 62.96, 22.09]),
    ("DeepSeek-7B-Chat", [81.17, 73.06, 96.10, 14.53, 92.56, 74.07, 0.00]),
    ("AgentLM-7B", [68.29, 90.35, 85.14, 0.04, 83.53, 66.67, 98.20]),
    ("Vicuna-7B", [64.95, 80.12, 90.46, 68.94, 86.33, 62.96, 87.37]),
];
