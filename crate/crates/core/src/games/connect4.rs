//! ConnectFour on a 6×7 grid with gravity. Columns are numbered 1..=7 left
//! to right; rows are stored bottom-up.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{cell_char, parse_cell, BoardStatus, Mark};
use crate::error::{ArenaError, Result};

pub const ROWS: usize = 6;
pub const COLS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct C4Move {
    pub mark: Mark,
    pub col: u8,
}

impl fmt::Display for C4Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.mark, self.col)
    }
}

/// `grid[row][col]`, row 0 is the bottom row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct C4Board {
    pub grid: [[Option<Mark>; COLS]; ROWS],
}

impl C4Board {
    pub fn get(&self, row: usize, col: usize) -> Option<Mark> {
        self.grid[row][col]
    }

    pub fn height(&self, col: usize) -> usize {
        (0..ROWS).take_while(|&r| self.grid[r][col].is_some()).count()
    }

    pub fn count(&self, mark: Mark) -> usize {
        self.grid.iter().flatten().filter(|c| **c == Some(mark)).count()
    }

    pub fn to_move(&self) -> Mark {
        if self.count(Mark::X) > self.count(Mark::O) {
            Mark::O
        } else {
            Mark::X
        }
    }

    pub fn is_full(&self) -> bool {
        (0..COLS).all(|c| self.height(c) == ROWS)
    }

    /// 1-based columns that still have room.
    pub fn open_columns(&self) -> Vec<u8> {
        (0..COLS)
            .filter(|&c| self.height(c) < ROWS)
            .map(|c| c as u8 + 1)
            .collect()
    }

    /// Drops `mark` into 1-based `col`; returns the landing row.
    pub fn drop(&mut self, mark: Mark, col: u8) -> Result<usize> {
        if !(1..=COLS as u8).contains(&col) {
            return Err(ArenaError::IllegalAction {
                surface: C4Move { mark, col }.to_string(),
                reason: "column outside 1..7".into(),
            });
        }
        let c = col as usize - 1;
        let h = self.height(c);
        if h == ROWS {
            return Err(ArenaError::IllegalAction {
                surface: C4Move { mark, col }.to_string(),
                reason: "column is full".into(),
            });
        }
        self.grid[h][c] = Some(mark);
        Ok(h)
    }

    /// Every column is a contiguous stack from the bottom.
    pub fn has_gravity(&self) -> bool {
        (0..COLS).all(|c| {
            let h = self.height(c);
            (h..ROWS).all(|r| self.grid[r][c].is_none())
        })
    }

    fn bitboard(&self, mark: Mark) -> u64 {
        // Column-major, 7 bits per column (6 rows + sentinel).
        let mut bits = 0u64;
        for c in 0..COLS {
            for r in 0..ROWS {
                if self.grid[r][c] == Some(mark) {
                    bits |= 1 << (c * 7 + r);
                }
            }
        }
        bits
    }
}

fn has_four(bits: u64) -> bool {
    [1u32, 7, 6, 8].iter().any(|&shift| {
        let pair = bits & (bits >> shift);
        pair & (pair >> (2 * shift)) != 0
    })
}

/// Winner detection over horizontal, vertical and both diagonal lines.
pub fn c4_winner(board: &C4Board) -> BoardStatus {
    for mark in [Mark::X, Mark::O] {
        if has_four(board.bitboard(mark)) {
            return BoardStatus::Won(mark);
        }
    }
    if board.is_full() {
        BoardStatus::Draw
    } else {
        BoardStatus::Ongoing
    }
}

pub fn render_grid(board: &C4Board) -> String {
    (0..ROWS)
        .rev()
        .map(|r| {
            (0..COLS)
                .map(|c| cell_char(board.grid[r][c]).to_string())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn render_available(board: &C4Board) -> String {
    board
        .open_columns()
        .iter()
        .map(u8::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Board text as shown to players; with hints, the open-column line follows.
pub fn render_board(board: &C4Board, hints_enabled: bool) -> String {
    let mut out = render_grid(board);
    if hints_enabled {
        out.push_str(&format!(
            "\nYou can only choose one of the following columns: [ {} ].",
            render_available(board)
        ));
    }
    out
}

/// Inverse of [`render_board`]: reads the first six grid lines (top row first).
pub fn parse_board(text: &str) -> Result<C4Board> {
    let rows: Vec<&str> = text.lines().take(ROWS).collect();
    if rows.len() != ROWS {
        return Err(ArenaError::InvalidInput("expected 6 grid rows".into()));
    }
    let mut board = C4Board::default();
    for (i, line) in rows.iter().enumerate() {
        let toks: Vec<&str> = line.split(' ').collect();
        if toks.len() != COLS {
            return Err(ArenaError::InvalidInput(format!("bad row `{line}`")));
        }
        for (c, tok) in toks.iter().enumerate() {
            board.grid[ROWS - 1 - i][c] = parse_cell(tok)
                .ok_or_else(|| ArenaError::InvalidInput(format!("bad cell `{tok}`")))?;
        }
    }
    Ok(board)
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct C4State {
    pub board: C4Board,
    pub last_move: Option<C4Move>,
}

impl C4State {
    pub fn to_move(&self) -> Mark {
        self.board.to_move()
    }

    pub fn status(&self) -> BoardStatus {
        c4_winner(&self.board)
    }

    pub fn legal_moves(&self) -> Vec<C4Move> {
        if self.status() != BoardStatus::Ongoing {
            return Vec::new();
        }
        let mark = self.to_move();
        self.board
            .open_columns()
            .into_iter()
            .map(|col| C4Move { mark, col })
            .collect()
    }

    pub fn apply(&mut self, mv: C4Move) -> Result<()> {
        if self.status() != BoardStatus::Ongoing {
            return Err(ArenaError::Terminal);
        }
        if mv.mark != self.to_move() {
            return Err(ArenaError::IllegalAction {
                surface: mv.to_string(),
                reason: "wrong mark".into(),
            });
        }
        self.board.drop(mv.mark, mv.col)?;
        self.last_move = Some(mv);
        Ok(())
    }

    pub fn text_blocks(&self, seat: usize, hints: bool) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("player_type".into(), Mark::for_seat(seat).to_string());
        m.insert("board_status".into(), render_grid(&self.board));
        if hints {
            m.insert("available".into(), render_available(&self.board));
        }
        if let Some(last) = self.last_move {
            m.insert("last_move".into(), last.to_string());
        }
        m
    }
}
