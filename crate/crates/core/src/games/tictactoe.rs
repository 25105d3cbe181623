//! TicTacToe on a 3×3 grid. Coordinates are 1-based `(row, col)` with
//! `(1, 1)` in the top-left corner.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{cell_char, parse_cell, BoardStatus, Mark};
use crate::error::{ArenaError, Result};

const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TttMove {
    pub mark: Mark,
    pub row: u8,
    pub col: u8,
}

impl TttMove {
    pub fn index(&self) -> usize {
        (self.row as usize - 1) * 3 + (self.col as usize - 1)
    }
}

impl fmt::Display for TttMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ({}, {})", self.mark, self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct TttBoard {
    pub cells: [Option<Mark>; 9],
}

impl TttBoard {
    pub fn get(&self, row: u8, col: u8) -> Option<Mark> {
        self.cells[(row as usize - 1) * 3 + (col as usize - 1)]
    }

    pub fn count(&self, mark: Mark) -> usize {
        self.cells.iter().filter(|c| **c == Some(mark)).count()
    }

    /// Side to move, derived from piece parity.
    pub fn to_move(&self) -> Mark {
        if self.count(Mark::X) > self.count(Mark::O) {
            Mark::O
        } else {
            Mark::X
        }
    }

    /// Empty cells as 1-based `(row, col)`, row-major.
    pub fn empty_cells(&self) -> Vec<(u8, u8)> {
        (0..9)
            .filter(|&i| self.cells[i].is_none())
            .map(|i| ((i / 3 + 1) as u8, (i % 3 + 1) as u8))
            .collect()
    }

    /// Base-3 code (empty=0, X=1, O=2), cell 0 least significant.
    pub fn code(&self) -> usize {
        self.cells.iter().rev().fold(0, |acc, c| {
            acc * 3
                + match c {
                    None => 0,
                    Some(Mark::X) => 1,
                    Some(Mark::O) => 2,
                }
        })
    }

    pub fn from_code(mut code: usize) -> TttBoard {
        let mut cells = [None; 9];
        for c in cells.iter_mut() {
            *c = match code % 3 {
                0 => None,
                1 => Some(Mark::X),
                _ => Some(Mark::O),
            };
            code /= 3;
        }
        TttBoard { cells }
    }

    /// Whether the board satisfies the piece-parity invariant.
    pub fn is_valid(&self) -> bool {
        let (x, o) = (self.count(Mark::X), self.count(Mark::O));
        x == o || x == o + 1
    }
}

/// Winner detection. If (on an unreachable grid) both marks own a line,
/// X is reported; reachable boards never have two winners.
pub fn ttt_winner(board: &TttBoard) -> BoardStatus {
    for mark in [Mark::X, Mark::O] {
        if LINES
            .iter()
            .any(|line| line.iter().all(|&i| board.cells[i] == Some(mark)))
        {
            return BoardStatus::Won(mark);
        }
    }
    if board.cells.iter().all(Option::is_some) {
        BoardStatus::Draw
    } else {
        BoardStatus::Ongoing
    }
}

/// Grid text: one row per line, cells `X`/`O`/`-` separated by single spaces.
pub fn render_grid(board: &TttBoard) -> String {
    (0..3)
        .map(|r| {
            (0..3)
                .map(|c| cell_char(board.cells[r * 3 + c]).to_string())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// `(1, 1), (1, 2), ...` listing of empty cells.
pub fn render_available(board: &TttBoard) -> String {
    board
        .empty_cells()
        .iter()
        .map(|(r, c)| format!("({r}, {c})"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Board text as shown to players. With hints, the legal-position line
/// from the observation prompt follows the grid.
pub fn render_board(board: &TttBoard, hints_enabled: bool) -> String {
    let mut out = render_grid(board);
    if hints_enabled {
        out.push_str(&format!(
            "\nYou can only put the mark on [{}].",
            render_available(board)
        ));
    }
    out
}

/// Inverse of [`render_board`]: reads the first three grid lines.
pub fn parse_board(text: &str) -> Result<TttBoard> {
    let rows: Vec<&str> = text.lines().take(3).collect();
    if rows.len() != 3 {
        return Err(ArenaError::InvalidInput("expected 3 grid rows".into()));
    }
    let mut cells = [None; 9];
    for (r, line) in rows.iter().enumerate() {
        let toks: Vec<&str> = line.split(' ').collect();
        if toks.len() != 3 {
            return Err(ArenaError::InvalidInput(format!("bad row `{line}`")));
        }
        for (c, tok) in toks.iter().enumerate() {
            cells[r * 3 + c] = parse_cell(tok)
                .ok_or_else(|| ArenaError::InvalidInput(format!("bad cell `{tok}`")))?;
        }
    }
    Ok(TttBoard { cells })
}

fn solve_table() -> &'static [i8] {
    static TABLE: OnceLock<Vec<i8>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // +1 X wins, -1 O wins, 0 draw, i8::MIN unvisited.
        let mut memo = vec![i8::MIN; 19_683];
        solve(&mut TttBoard::default(), &mut memo);
        for code in 0..19_683 {
            if memo[code] == i8::MIN {
                let mut b = TttBoard::from_code(code);
                if b.is_valid() {
                    solve(&mut b, &mut memo);
                }
            }
        }
        memo
    })
}

fn solve(board: &mut TttBoard, memo: &mut [i8]) -> i8 {
    let code = board.code();
    if memo[code] != i8::MIN {
        return memo[code];
    }
    let value = match ttt_winner(board) {
        BoardStatus::Won(Mark::X) => 1,
        BoardStatus::Won(Mark::O) => -1,
        BoardStatus::Draw => 0,
        BoardStatus::Ongoing => {
            let mover = board.to_move();
            let mut best = if mover == Mark::X { -2 } else { 2 };
            for i in 0..9 {
                if board.cells[i].is_none() {
                    board.cells[i] = Some(mover);
                    let v = solve(board, memo);
                    board.cells[i] = None;
                    best = if mover == Mark::X { best.max(v) } else { best.min(v) };
                }
            }
            best
        }
    };
    memo[code] = value;
    value
}

/// Game-theoretic value under perfect play from both sides.
pub fn ttt_minimax_value(board: &TttBoard) -> BoardStatus {
    match solve_table()[board.code()] {
        1 => BoardStatus::Won(Mark::X),
        -1 => BoardStatus::Won(Mark::O),
        0 => BoardStatus::Draw,
        _ => {
            let mut b = *board;
            let mut memo = vec![i8::MIN; 19_683];
            match solve(&mut b, &mut memo) {
                1 => BoardStatus::Won(Mark::X),
                -1 => BoardStatus::Won(Mark::O),
                _ => BoardStatus::Draw,
            }
        }
    }
}

/// All moves that preserve the perfect-play value for the side to move.
pub fn optimal_moves(board: &TttBoard) -> Vec<(u8, u8)> {
    let mover = board.to_move();
    let table = solve_table();
    let scored: Vec<((u8, u8), i8)> = board
        .empty_cells()
        .into_iter()
        .map(|(r, c)| {
            let mut b = *board;
            b.cells[(r as usize - 1) * 3 + c as usize - 1] = Some(mover);
            let v = table[b.code()];
            ((r, c), if mover == Mark::X { v } else { -v })
        })
        .collect();
    let best = scored.iter().map(|s| s.1).max().unwrap_or(0);
    scored
        .into_iter()
        .filter(|s| s.1 == best)
        .map(|s| s.0)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TttState {
    pub board: TttBoard,
    pub last_move: Option<TttMove>,
}

impl TttState {
    pub fn to_move(&self) -> Mark {
        self.board.to_move()
    }

    pub fn status(&self) -> BoardStatus {
        ttt_winner(&self.board)
    }

    pub fn legal_moves(&self) -> Vec<TttMove> {
        if self.status() != BoardStatus::Ongoing {
            return Vec::new();
        }
        let mark = self.to_move();
        self.board
            .empty_cells()
            .into_iter()
            .map(|(row, col)| TttMove { mark, row, col })
            .collect()
    }

    pub fn apply(&mut self, mv: TttMove) -> Result<()> {
        let illegal = |reason: &str| ArenaError::IllegalAction {
            surface: mv.to_string(),
            reason: reason.into(),
        };
        if self.status() != BoardStatus::Ongoing {
            return Err(ArenaError::Terminal);
        }
        if !(1..=3).contains(&mv.row) || !(1..=3).contains(&mv.col) {
            return Err(illegal("position outside the 3x3 grid"));
        }
        if mv.mark != self.to_move() {
            return Err(illegal("wrong mark"));
        }
        let idx = mv.index();
        if self.board.cells[idx].is_some() {
            return Err(illegal("position already marked"));
        }
        self.board.cells[idx] = Some(mv.mark);
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

#[cfg(test)]
mod tests {
    use super::*;

    fn mv(mark: Mark, row: u8, col: u8) -> TttMove {
        TttMove { mark, row, col }
    }

    #[test]
    fn empty_board_has_nine_moves_and_x_to_play() {
        let s = TttState::default();
        assert_eq!(s.legal_moves().len(), 9);
        assert_eq!(s.to_move(), Mark::X);
        assert_eq!(ttt_winner(&s.board), BoardStatus::Ongoing);
    }

    #[test]
    fn first_move_top_right() {
        let mut s = TttState::default();
        s.apply(mv(Mark::X, 1, 3)).unwrap();
        assert_eq!(s.board.get(1, 3), Some(Mark::X));
        assert_eq!(s.to_move(), Mark::O);
        assert_eq!(render_grid(&s.board), "- - X\n- - -\n- - -");
    }

    #[test]
    fn occupied_cell_is_illegal() {
        let mut s = TttState::default();
        s.apply(mv(Mark::X, 2, 2)).unwrap();
        let err = s.apply(mv(Mark::O, 2, 2)).unwrap_err();
        assert!(matches!(err, ArenaError::IllegalAction { .. }));
    }

    #[test]
    fn wrong_mark_and_out_of_range_are_illegal() {
        let mut s = TttState::default();
        assert!(s.apply(mv(Mark::O, 1, 1)).is_err());
        assert!(s.apply(mv(Mark::X, 0, 1)).is_err());
        assert!(s.apply(mv(Mark::X, 1, 4)).is_err());
    }

    #[test]
    fn seven_move_example_game() {
        let mut s = TttState::default();
        for (m, r, c) in [
            (Mark::X, 1, 3),
            (Mark::O, 1, 1),
            (Mark::X, 3, 1),
            (Mark::O, 2, 2),
            (Mark::X, 3, 3),
            (Mark::O, 2, 3),
            (Mark::X, 3, 2),
        ] {
            s.apply(mv(m, r, c)).unwrap();
        }
        assert_eq!(s.status(), BoardStatus::Won(Mark::X));
        assert!(s.legal_moves().is_empty());
        assert_eq!(render_grid(&s.board), "O - X\n- O O\nX X X");
    }

    #[test]
    fn render_with_and_without_hints() {
        let b = TttBoard::default();
        let on = render_board(&b, true);
        assert!(on.ends_with(
            "You can only put the mark on [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3)]."
        ));
        let off = render_board(&b, false);
        assert_eq!(off, "- - -\n- - -\n- - -");
        assert!(!off.contains("You can only"));
        assert_eq!(parse_board(&on).unwrap(), b);
    }

    #[test]
    fn perfect_play_from_empty_is_draw() {
        assert_eq!(ttt_minimax_value(&TttBoard::default()), BoardStatus::Draw);
    }

    #[test]
    fn about_to_complete_line_is_winning() {
        let mut s = TttState::default();
        for (m, r, c) in [(Mark::X, 1, 1), (Mark::O, 2, 1), (Mark::X, 1, 2), (Mark::O, 2, 2)] {
            s.apply(mv(m, r, c)).unwrap();
        }
        assert_eq!(ttt_minimax_value(&s.board), BoardStatus::Won(Mark::X));
        assert!(optimal_moves(&s.board).contains(&(1, 3)));
    }

    #[test]
    fn code_round_trip() {
        for code in [0, 1, 5, 19_682, 12_345] {
            assert_eq!(TttBoard::from_code(code).code(), code);
        }
    }
}
