mod common;

use arena_core::analysis::{c4_reward, c4_value, count_windows, window_counts};
use arena_core::env::{reset, step, EnvConfig, EnvKind, Outcome, PlayerId};
use arena_core::games::connect4::{C4Board, COLS};
use arena_core::games::tictactoe::{ttt_minimax_value, ttt_winner, TttBoard, TttState};
use arena_core::games::{BoardStatus, Mark};
use arena_core::parse::parse_action;
use arena_core::Seed;
use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn to_cells(b: &TttBoard) -> [u8; 9] {
    b.cells.map(|c| match c {
        None => 0,
        Some(Mark::X) => 1,
        Some(Mark::O) => 2,
    })
}

#[test]
fn ttt_winner_matches_line_oracle_on_every_grid() {
    for code in 0..3usize.pow(9) {
        let b = TttBoard::from_code(code);
        let cells = to_cells(&b);
        let owners = ttt_line_owners(&cells);
        let expected = if owners.contains(&1) {
            BoardStatus::Won(Mark::X)
        } else if owners.contains(&2) {
            BoardStatus::Won(Mark::O)
        } else if cells.iter().all(|&c| c != 0) {
            BoardStatus::Draw
        } else {
            BoardStatus::Ongoing
        };
        assert_eq!(ttt_winner(&b), expected, "grid {code}");
    }
}

#[test]
fn ttt_engine_game_tree_matches_reference_counts() {
    fn walk(s: &TttState, acc: &mut (u64, u64, u64, u64)) {
        match s.status() {
            BoardStatus::Ongoing => {
                for mv in s.legal_moves() {
                    let mut next = s.clone();
                    next.apply(mv).unwrap();
                    walk(&next, acc);
                }
            }
            status => {
                acc.0 += 1;
                match status {
                    BoardStatus::Won(Mark::X) => acc.1 += 1,
                    BoardStatus::Won(Mark::O) => acc.2 += 1,
                    _ => acc.3 += 1,
                }
            }
        }
    }
    let mut acc = (0, 0, 0, 0);
    walk(&TttState::default(), &mut acc);
    assert_eq!(acc, TTT_TREE);
    assert_eq!(ttt_game_tree_counts(), TTT_TREE);
}

#[test]
fn ttt_perfect_play_matches_negamax_everywhere() {
    assert_eq!(ttt_minimax_value(&TttBoard::default()), BoardStatus::Draw);
    for code in 0..3usize.pow(9) {
        let b = TttBoard::from_code(code);
        let mut cells = to_cells(&b);
        if !b.is_valid() || ttt_line_owners(&cells).len() > 1 {
            continue;
        }
        if let Some(&w) = ttt_line_owners(&cells).first() {
            let owner = if w == 1 { Mark::X } else { Mark::O };
            assert_eq!(ttt_minimax_value(&b), BoardStatus::Won(owner), "grid {code}");
            continue;
        }
        let mover = if b.to_move() == Mark::X { 1 } else { 2 };
        let v = ttt_negamax(&mut cells, mover);
        let expected = match v {
            0 => BoardStatus::Draw,
            1 => BoardStatus::Won(b.to_move()),
            _ => BoardStatus::Won(b.to_move().other()),
        };
        assert_eq!(ttt_minimax_value(&b), expected, "grid {code}");
    }
}

#[test]
fn example_game_replays_to_x_win() {
    let mut s = reset(EnvKind::TicTacToe, Seed(0), &EnvConfig::default()).unwrap();
    for (i, text) in EXAMPLE_GAME.iter().enumerate() {
        let actor = PlayerId::from(i % 2);
        let obs = s.observe(actor);
        let action = parse_action(EnvKind::TicTacToe, text, &obs).action().cloned().unwrap();
        assert_eq!(&action.surface, text);
        s = step(&s, actor, &action).unwrap().0;
    }
    assert!(s.is_terminal());
    assert_eq!(s.outcome(), Outcome::Win(PlayerId(0)));
}

fn random_c4_game(rng: &mut ChaCha8Rng) -> Vec<C4Board> {
    let mut b = C4Board::default();
    let mut boards = vec![b];
    while c4_winner_is_ongoing(&b) {
        let mark = b.to_move();
        let col = *b.open_columns().choose(rng).unwrap();
        b.drop(mark, col).unwrap();
        boards.push(b);
    }
    boards
}

fn c4_winner_is_ongoing(b: &C4Board) -> bool {
    arena_core::games::connect4::c4_winner(b) == BoardStatus::Ongoing
}

#[test]
fn window_fixtures() {
    let empty = C4Board::default();
    for k in 2..=4 {
        assert_eq!(count_windows(&empty, Mark::X, k).unwrap(), 0);
    }
    let mut row = C4Board::default();
    for col in 1..=3 {
        row.drop(Mark::X, col).unwrap();
    }
    assert_eq!(count_windows(&row, Mark::X, 3).unwrap(), 1);
    assert_eq!(count_windows(&row, Mark::X, 2).unwrap(), 2);
    assert_eq!(c4_value(&row, Mark::X), 9);
    assert_eq!(c4_window_scan(&row, Mark::X, 3), 1);
    assert_eq!(c4_window_scan(&row, Mark::X, 2), 2);

    let mut stack = C4Board::default();
    for _ in 0..4 {
        stack.drop(Mark::X, 4).unwrap();
    }
    assert_eq!(count_windows(&stack, Mark::X, 4).unwrap(), 1);
    assert_eq!(c4_window_scan(&stack, Mark::X, 4), 1);
    assert!(count_windows(&stack, Mark::X, 5).is_err());
}

#[test]
fn value_antisymmetry_and_oracle_on_random_boards() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 10_000 {
        let game = random_c4_game(&mut rng);
        let b = game[rng.gen_range(0..game.len())];
        assert_eq!(c4_value(&b, Mark::X), -c4_value(&b, Mark::O));
        assert_eq!(c4_value(&b, Mark::X), c4_value_oracle(&b, Mark::X));
        let w = window_counts(&b, Mark::X);
        let v = window_counts(&b, Mark::O);
        assert_eq!(w.my, v.oppo);
        checked += 1;
    }
}

#[test]
fn reward_matches_recomputation_and_telescopes() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1_000 {
        let game = random_c4_game(&mut rng);
        for perspective in [Mark::X, Mark::O] {
            let mut sum = 0i64;
            for pair in game.windows(2) {
                let r = c4_reward(&pair[0], &pair[1], perspective).unwrap();
                assert_eq!(
                    r,
                    c4_value_oracle(&pair[1], perspective) - c4_value_oracle(&pair[0], perspective)
                );
                sum += r;
            }
            assert_eq!(sum, c4_value(game.last().unwrap(), perspective));
        }
    }
}

#[test]
fn reward_rejects_unreachable_pairs() {
    let a = C4Board::default();
    let mut b = a;
    b.drop(Mark::X, 1).unwrap();
    b.drop(Mark::O, 2).unwrap();
    assert!(c4_reward(&a, &b, Mark::X).is_err());
    assert!(c4_reward(&b, &a, Mark::X).is_err());
    assert!(c4_reward(&a, &a, Mark::X).is_err());
}

#[test]
fn first_move_reward_is_first_value() {
    let a = C4Board::default();
    let mut b = a;
    b.drop(Mark::X, 4).unwrap();
    assert_eq!(c4_reward(&a, &b, Mark::X).unwrap(), c4_value(&b, Mark::X));
}

#[test]
fn completing_four_adds_the_win_weight() {
    let mut before = C4Board::default();
    for (mark, col) in [(Mark::X, 1), (Mark::O, 1), (Mark::X, 2), (Mark::O, 2), (Mark::X, 3), (Mark::O, 3)] {
        before.drop(mark, col).unwrap();
    }
    let mut after = before;
    after.drop(Mark::X, 4).unwrap();
    let r = c4_reward(&before, &after, Mark::X).unwrap();
    assert_eq!(r, c4_value_oracle(&after, Mark::X) - c4_value_oracle(&before, Mark::X));
    // +10 for the four, +5 for one extra three, +2 for one extra two.
    assert_eq!(r, 17);
}

proptest! {
    #[test]
    fn reward_equals_oracle_on_random_traces(seed in any::<u64>(), cut in 1usize..42) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let game = random_c4_game(&mut rng);
        let i = cut.min(game.len() - 1);
        for p in [Mark::X, Mark::O] {
            prop_assert_eq!(
                c4_reward(&game[i - 1], &game[i], p).unwrap(),
                c4_value_oracle(&game[i], p) - c4_value_oracle(&game[i - 1], p)
            );
        }
    }

    #[test]
    fn window_count_matches_scan(seed in any::<u64>(), k in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let game = random_c4_game(&mut rng);
        let b = game[rng.gen_range(0..game.len())];
        for m in [Mark::X, Mark::O] {
            prop_assert_eq!(count_windows(&b, m, k).unwrap(), c4_window_scan(&b, m, k));
        }
    }

    #[test]
    fn c4_drop_lands_on_lowest_free_cell(seed in any::<u64>(), col in 1u8..=COLS as u8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let game = random_c4_game(&mut rng);
        let mut b = game[rng.gen_range(0..game.len())];
        let h = b.height(col as usize - 1);
        let mark = b.to_move();
        match b.drop(mark, col) {
            Ok(row) => {
                prop_assert_eq!(row, h);
                prop_assert!(b.has_gravity());
            }
            Err(_) => prop_assert_eq!(h, 6),
        }
    }
}
