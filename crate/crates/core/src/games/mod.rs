//! The seven hand-coded environments.

pub mod bargain;
pub mod bid;
pub mod connect4;
pub mod hanabi;
pub mod holdem;
pub mod tictactoe;
pub mod undercover;

use serde::{Deserialize, Serialize};

/// Board-game marker. X always moves first and sits in seat 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mark {
    X,
    O,
}

impl Mark {
    pub fn other(self) -> Mark {
        match self {
            Mark::X => Mark::O,
            Mark::O => Mark::X,
        }
    }

    pub fn seat(self) -> usize {
        match self {
            Mark::X => 0,
            Mark::O => 1,
        }
    }

    pub fn for_seat(seat: usize) -> Mark {
        if seat == 0 {
            Mark::X
        } else {
            Mark::O
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Mark::X => 'X',
            Mark::O => 'O',
        }
    }

    pub fn from_symbol(c: char) -> Option<Mark> {
        match c.to_ascii_uppercase() {
            'X' => Some(Mark::X),
            'O' => Some(Mark::O),
            _ => None,
        }
    }
}

impl std::fmt::Display for Mark {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Result of scanning a board for lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoardStatus {
    Won(Mark),
    Draw,
    Ongoing,
}

pub(crate) fn cell_char(c: Option<Mark>) -> char {
    c.map_or('-', Mark::symbol)
}

pub(crate) fn parse_cell(tok: &str) -> Option<Option<Mark>> {
    match tok {
        "-" => Some(None),
        "X" => Some(Some(Mark::X)),
        "O" => Some(Some(Mark::O)),
        _ => None,
    }
}
