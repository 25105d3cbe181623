//! ConnectFour board valuation and the per-move reward built on it.
//!
//! A window is a straight segment (horizontal, vertical or either
//! diagonal) of exactly `k` cells all held by one player. Windows may
//! overlap, so a run of three yields one 3-window and two 2-windows.

use serde::{Deserialize, Serialize};

use crate::error::{ArenaError, Result};
use crate::games::connect4::{C4Board, COLS, ROWS};
use crate::games::Mark;

const DIRECTIONS: [(isize, isize); 4] = [(0, 1), (1, 0), (1, 1), (1, -1)];

/// Window counts for both players from one perspective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WindowCounts {
    pub my: [u32; 3],
    pub oppo: [u32; 3],
}

impl WindowCounts {
    pub fn mine(&self, k: usize) -> u32 {
        self.my[k - 2]
    }

    pub fn theirs(&self, k: usize) -> u32 {
        self.oppo[k - 2]
    }
}

fn in_bounds(r: isize, c: isize) -> bool {
    (0..ROWS as isize).contains(&r) && (0..COLS as isize).contains(&c)
}

/// Lengths of every maximal run of `player` along each line direction.
fn run_lengths(board: &C4Board, player: Mark) -> Vec<u32> {
    let mut runs = Vec::new();
    for (dr, dc) in DIRECTIONS {
        for r in 0..ROWS as isize {
            for c in 0..COLS as isize {
                let owned = |r: isize, c: isize| {
                    in_bounds(r, c) && board.grid[r as usize][c as usize] == Some(player)
                };
                // Start only at the first cell of a run.
                if !owned(r, c) || owned(r - dr, c - dc) {
                    continue;
                }
                let mut len = 0;
                while owned(r + len * dr, c + len * dc) {
                    len += 1;
                }
                runs.push(len as u32);
            }
        }
    }
    runs
}

/// Number of length-`k` windows wholly owned by `player`.
pub fn count_windows(board: &C4Board, player: Mark, k: usize) -> Result<u32> {
    if !(2..=4).contains(&k) {
        return Err(ArenaError::InvalidInput(format!("window length {k} not in 2..=4")));
    }
    Ok(run_lengths(board, player)
        .into_iter()
        .map(|len| (len + 1).saturating_sub(k as u32))
        .sum())
}

pub fn window_counts(board: &C4Board, perspective: Mark) -> WindowCounts {
    let mut wc = WindowCounts::default();
    for (side, out) in [(perspective, &mut wc.my), (perspective.other(), &mut wc.oppo)] {
        for len in run_lengths(board, side) {
            for k in 2..=4u32 {
                out[k as usize - 2] += (len + 1).saturating_sub(k);
            }
        }
    }
    wc
}

/// `10*(my4 - oppo4) + 5*(my3 - oppo3) + 2*(my2 - oppo2)`.
pub fn c4_value(board: &C4Board, perspective: Mark) -> i64 {
    let wc = window_counts(board, perspective);
    [10i64, 5, 2]
        .iter()
        .zip([4, 3, 2])
        .map(|(w, k)| w * (wc.mine(k) as i64 - wc.theirs(k) as i64))
        .sum()
}

/// Checks that `next` is `prev` plus exactly one legally dropped piece.
pub fn single_ply_between(prev: &C4Board, next: &C4Board) -> Result<(Mark, u8)> {
    let mut diff = Vec::new();
    for r in 0..ROWS {
        for c in 0..COLS {
            if prev.grid[r][c] != next.grid[r][c] {
                diff.push((r, c));
            }
        }
    }
    let unreachable = |why: &str| ArenaError::InvalidInput(format!("boards are not one ply apart: {why}"));
    let [(r, c)] = diff[..] else {
        return Err(unreachable("expected exactly one changed cell"));
    };
    let mark = next.grid[r][c].ok_or_else(|| unreachable("a piece was removed"))?;
    if prev.grid[r][c].is_some() {
        return Err(unreachable("a piece was replaced"));
    }
    if mark != prev.to_move() {
        return Err(unreachable("wrong side moved"));
    }
    if r != prev.height(c) {
        return Err(unreachable("piece is not resting on the stack"));
    }
    Ok((mark, c as u8 + 1))
}

/// Change in board value across one ply, from `perspective`.
pub fn c4_reward(prev: &C4Board, next: &C4Board, perspective: Mark) -> Result<i64> {
    single_ply_between(prev, next)?;
    Ok(c4_value(next, perspective) - c4_value(prev, perspective))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bottom_three() {
        let mut b = C4Board::default();
        for c in 1..=3 {
            b.drop(Mark::X, c).unwrap();
        }
        assert_eq!(count_windows(&b, Mark::X, 3).unwrap(), 1);
        assert_eq!(count_windows(&b, Mark::X, 2).unwrap(), 2);
        assert_eq!(count_windows(&b, Mark::X, 4).unwrap(), 0);
        assert_eq!(c4_value(&b, Mark::X), 9);
        assert_eq!(c4_value(&b, Mark::O), -9);
    }

    #[test]
    fn reward_rejects_two_plies() {
        let a = C4Board::default();
        let mut b = a;
        b.drop(Mark::X, 1).unwrap();
        b.drop(Mark::O, 1).unwrap();
        assert!(c4_reward(&a, &b, Mark::X).is_err());
    }
}
