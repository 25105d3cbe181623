//! Scripted baseline agents. They reply with canonical action text so their
//! moves pass through the action grammar like any model reply.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Agent, AgentKind, Reply};
use crate::analysis::{c4_value, mc_equity};
use crate::cards::{parse_cards, Card};
use crate::env::{Action, ActionSpec, EnvKind, Observation, PlayerId};
use crate::error::{ArenaError, Result};
use crate::games::connect4::{self, c4_winner, C4Move};
use crate::games::holdem::HoldemAction;
use crate::games::tictactoe::{self, optimal_moves, TttMove};
use crate::games::undercover::{clue_is_legal, UndercoverAction};
use crate::games::{BoardStatus, Mark};
use crate::seed::Seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "bot", rename_all = "snake_case")]
pub enum BotKind {
    /// Uniform over legal actions.
    Random,
    /// Perfect TicTacToe play, uniform among optimal moves.
    TttOracle,
    /// One-ply ConnectFour search on the board valuation.
    C4Greedy,
    /// Never produces a parseable action.
    Garbage,
    /// Legal only when the prompt enumerates legal moves.
    FormatFragile,
    /// Hold'em policy keyed to Monte Carlo equity.
    EquityThreshold {
        #[serde(default = "default_equity_samples")]
        samples: u64,
    },
    /// Hanabi: always plays the first card.
    PlayOnly,
    /// Undercover: describes the word by its length and votes against
    /// clues that disagree with its own.
    ClueBot,
    /// Bid: bids a fixed fraction of the valuation.
    BidFraction { fraction: f64 },
}

fn default_equity_samples() -> u64 {
    400
}

/// Equity cut points for [`BotKind::EquityThreshold`], in increasing order
/// of aggression: fold, check/call, half pot, full pot, all-in.
pub const EQUITY_CUTS: [f64; 4] = [0.35, 0.55, 0.7, 0.85];

pub struct ScriptedBot {
    id: String,
    kind: BotKind,
    rng: ChaCha8Rng,
    seat: PlayerId,
    seed: Seed,
    word: Option<String>,
}

impl ScriptedBot {
    pub fn new(id: impl Into<String>, kind: BotKind) -> Self {
        ScriptedBot {
            id: id.into(),
            kind,
            rng: Seed(0).rng(0),
            seat: PlayerId(0),
            seed: Seed(0),
            word: None,
        }
    }

    pub fn bot_kind(&self) -> &BotKind {
        &self.kind
    }

    fn random(&mut self, obs: &Observation) -> Result<ActionSpec> {
        obs.legal_actions
            .sample(&mut self.rng)
            .ok_or(ArenaError::Empty("no legal action to sample"))
    }

    fn choose(&mut self, obs: &Observation) -> Result<String> {
        let block = |k: &str| -> Result<&str> {
            obs.block(k)
                .ok_or_else(|| ArenaError::InvalidInput(format!("observation lacks `{k}`")))
        };
        let viewer = obs.viewer;
        let spec = match (&self.kind, obs.env) {
            (BotKind::Garbage, _) => return Ok("I am not sure what to do here.".into()),
            (BotKind::FormatFragile, env) => {
                if obs.block("available").is_some() {
                    self.random(obs)?
                } else {
                    return Ok(unguided_guess(env, viewer));
                }
            }
            (BotKind::TttOracle, EnvKind::TicTacToe) => {
                let board = tictactoe::parse_board(block("board_status")?)?;
                let (row, col) = *optimal_moves(&board)
                    .choose(&mut self.rng)
                    .ok_or(ArenaError::Empty("no move on a finished board"))?;
                let mark = board.to_move();
                ActionSpec::new(Action::TicTacToe(TttMove { mark, row, col }), viewer)
            }
            (BotKind::C4Greedy, EnvKind::ConnectFour) => {
                let board = connect4::parse_board(block("board_status")?)?;
                ActionSpec::new(Action::ConnectFour(self.c4_pick(&board)?), viewer)
            }
            (BotKind::EquityThreshold { samples }, EnvKind::TexasHoldem) => {
                let hole = parse_cards(block("private")?)?;
                let board = parse_cards(block("public")?)?;
                let hole: [Card; 2] = hole
                    .try_into()
                    .map_err(|_| ArenaError::InvalidInput("expected two hole cards".into()))?;
                let salt = self.rng.gen();
                let eq = mc_equity(&hole, &board, *samples, Seed(salt))?.p_win;
                let wanted = equity_action(eq);
                ActionSpec::new(Action::TexasHoldem(self.nearest_holdem(obs, wanted)), viewer)
            }
            (BotKind::PlayOnly, EnvKind::Hanabi) => {
                return Ok("Action: Play Card 1".into());
            }
            (BotKind::ClueBot, EnvKind::Undercover) => {
                if obs.variant == "accusation" {
                    self.clue_bot_vote(obs)?
                } else {
                    let word = block("word")?;
                    let n = word.chars().count();
                    // A clue containing the word is illegal ("Letter" in "letters").
                    let clue = [format!("My word has {n} letters."), format!("{n} characters"), n.to_string()]
                        .into_iter()
                        .find(|c| clue_is_legal(c, word))
                        .expect("a bare number never contains a word");
                    ActionSpec::new(Action::Undercover(UndercoverAction::Clue(clue)), viewer)
                }
            }
            (BotKind::BidFraction { fraction }, EnvKind::Bid) => {
                let value: f64 = block("value")?
                    .parse()
                    .map_err(|_| ArenaError::InvalidInput("unreadable valuation".into()))?;
                let cents = (value * 100.0 * fraction.clamp(0.0, 1.0)).floor() as u32;
                let cents = cents.min((value * 100.0).round() as u32 - 1);
                return Ok(format!("{}: ${}.{:02}", viewer.display_name(), cents / 100, cents % 100));
            }
            // Bots outside their home environment fall back to random play.
            _ => self.random(obs)?,
        };
        Ok(spec.surface)
    }

    fn c4_pick(&mut self, board: &connect4::C4Board) -> Result<C4Move> {
        let me = board.to_move();
        let cols = board.open_columns();
        if cols.is_empty() {
            return Err(ArenaError::Empty("board is full"));
        }
        let after = |mark: Mark, col: u8| {
            let mut b = board.clone();
            b.drop(mark, col).ok().map(|_| b)
        };
        for col in &cols {
            if after(me, *col).is_some_and(|b| c4_winner(&b) == BoardStatus::Won(me)) {
                return Ok(C4Move { mark: me, col: *col });
            }
        }
        for col in &cols {
            if after(me.other(), *col).is_some_and(|b| c4_winner(&b) == BoardStatus::Won(me.other())) {
                return Ok(C4Move { mark: me, col: *col });
            }
        }
        let scored: Vec<(i64, u8)> = cols
            .iter()
            .filter_map(|&c| after(me, c).map(|b| (c4_value(&b, me), c)))
            .collect();
        let best = scored.iter().map(|s| s.0).max().expect("non-empty");
        let ties: Vec<u8> = scored.iter().filter(|s| s.0 == best).map(|s| s.1).collect();
        let col = *ties.choose(&mut self.rng).expect("non-empty");
        Ok(C4Move { mark: me, col })
    }

    fn nearest_holdem(&mut self, obs: &Observation, wanted: HoldemAction) -> HoldemAction {
        let order = [
            HoldemAction::Fold,
            HoldemAction::CheckCall,
            HoldemAction::RaiseHalfPot,
            HoldemAction::RaiseFullPot,
            HoldemAction::AllIn,
        ];
        let legal: Vec<HoldemAction> = order
            .into_iter()
            .filter(|a| obs.legal_actions.contains(&Action::TexasHoldem(*a)))
            .collect();
        if legal.contains(&wanted) {
            return wanted;
        }
        let rank = |a: &HoldemAction| order.iter().position(|x| x == a).expect("known");
        let w = rank(&wanted) as i32;
        *legal
            .iter()
            .min_by_key(|a| ((rank(a) as i32 - w).abs(), rank(a)))
            .unwrap_or(&HoldemAction::CheckCall)
    }

    fn clue_bot_vote(&mut self, obs: &Observation) -> Result<ActionSpec> {
        let mine = obs.block("word").map_or(0, |w| w.chars().count());
        let lengths = clue_lengths(obs.block("messages").unwrap_or(""));
        let suspects: Vec<ActionSpec> = obs
            .legal_actions
            .listed()
            .unwrap_or(&[])
            .iter()
            .filter(|a| match &a.payload {
                Action::Undercover(UndercoverAction::Vote(p)) => {
                    lengths.get(p).is_some_and(|&n| n != mine)
                }
                _ => false,
            })
            .cloned()
            .collect();
        match suspects.choose(&mut self.rng) {
            Some(s) => Ok(s.clone()),
            None => self.random(obs),
        }
    }
}

fn equity_action(eq: f64) -> HoldemAction {
    match EQUITY_CUTS.iter().position(|&cut| eq < cut) {
        Some(0) => HoldemAction::Fold,
        Some(1) => HoldemAction::CheckCall,
        Some(2) => HoldemAction::RaiseHalfPot,
        Some(3) => HoldemAction::RaiseFullPot,
        _ => HoldemAction::AllIn,
    }
}

/// Letter counts announced by [`BotKind::ClueBot`] in the round's messages.
fn clue_lengths(messages: &str) -> BTreeMap<PlayerId, usize> {
    messages
        .lines()
        .filter_map(|line| {
            let (who, rest) = line.split_once(':')?;
            let seat: u8 = who.trim().strip_prefix("player_")?.parse().ok()?;
            let n: usize = rest
                .split_whitespace()
                .find_map(|w| w.parse().ok())?;
            Some((PlayerId(seat), n))
        })
        .collect()
}

/// What a bot that cannot see the legal list answers: a move off the board.
fn unguided_guess(env: EnvKind, viewer: PlayerId) -> String {
    let mark = Mark::for_seat(viewer.index());
    match env {
        EnvKind::TicTacToe => format!("{mark}: (4, 4)"),
        EnvKind::ConnectFour => format!("{mark}: 8"),
        _ => "pass".into(),
    }
}

impl Agent for ScriptedBot {
    fn id(&self) -> &str {
        &self.id
    }

    fn kind(&self) -> AgentKind {
        AgentKind::Scripted
    }

    fn begin_match(&mut self, _env: EnvKind, seat: PlayerId, seed: Seed) {
        self.seat = seat;
        self.seed = seed;
        self.word = None;
        self.rng = seed.derive(0xB07_0000 + seat.0 as u64).rng(0);
    }

    fn respond(&mut self, obs: &Observation, _feedback: Option<&str>) -> Result<Reply> {
        if let Some(w) = obs.block("word") {
            self.word = Some(w.to_string());
        }
        self.choose(obs).map(Reply::text)
    }

    /// Guesses that everyone shares the bot's own word.
    fn guess(&mut self, _player: PlayerId, others: &[PlayerId]) -> Result<Option<Reply>> {
        Ok(self.word.as_ref().map(|w| {
            let lines: Vec<String> = others
                .iter()
                .map(|p| format!("{}: {w}", p.display_name()))
                .collect();
            Reply::text(lines.join("\n"))
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{reset, EnvConfig};
    use crate::parse::parse_action;

    fn reply(kind: BotKind, env: EnvKind, seed: u64) -> (Observation, String) {
        let s = reset(env, Seed(seed), &EnvConfig::default()).unwrap();
        let who = s.to_act().unwrap();
        let obs = s.observe(who);
        let mut b = ScriptedBot::new("b", kind);
        b.begin_match(env, who, Seed(seed));
        let r = b.respond(&obs, None).unwrap();
        (obs, r.text)
    }

    #[test]
    fn home_bots_reply_legally() {
        let cases = [
            (BotKind::Random, EnvKind::Bargain),
            (BotKind::TttOracle, EnvKind::TicTacToe),
            (BotKind::C4Greedy, EnvKind::ConnectFour),
            (BotKind::EquityThreshold { samples: 200 }, EnvKind::TexasHoldem),
            (BotKind::PlayOnly, EnvKind::Hanabi),
            (BotKind::ClueBot, EnvKind::Undercover),
            (BotKind::BidFraction { fraction: 0.5 }, EnvKind::Bid),
            (BotKind::Random, EnvKind::Bid),
        ];
        for (kind, env) in cases {
            for seed in 0..5 {
                let (obs, text) = reply(kind.clone(), env, seed);
                assert!(
                    parse_action(env, &text, &obs).action().is_some(),
                    "{kind:?} in {env}: {text}"
                );
            }
        }
    }

    #[test]
    fn garbage_never_parses() {
        for env in EnvKind::ALL {
            let (obs, text) = reply(BotKind::Garbage, env, 1);
            assert!(parse_action(env, &text, &obs).action().is_none());
        }
    }

    #[test]
    fn clue_bot_is_legal_for_every_corpus_word() {
        use crate::games::undercover::UndercoverConfig;
        for pair in crate::words::builtin_corpus() {
            let config = EnvConfig {
                undercover: UndercoverConfig {
                    pair: Some(pair.clone()),
                    undercover_seat: Some(0),
                },
                ..EnvConfig::default()
            };
            let s = reset(EnvKind::Undercover, Seed(0), &config).unwrap();
            for seat in [0u8, 1] {
                let obs = s.observe(PlayerId(seat));
                let mut b = ScriptedBot::new("b", BotKind::ClueBot);
                b.begin_match(EnvKind::Undercover, PlayerId(seat), Seed(0));
                let text = b.respond(&obs, None).unwrap().text;
                let clue = text.split_once(": ").unwrap().1;
                let word = obs.block("word").unwrap();
                assert!(clue_is_legal(clue, word), "{word}: {clue}");
                let n = clue_lengths(&format!("\n{text}"))[&PlayerId(seat)];
                assert_eq!(n, word.chars().count());
            }
        }
    }

    #[test]
    fn clue_lengths_read_bot_clues() {
        let m = clue_lengths("\nplayer_0: My word has 5 letters.\nplayer_3: My word has 6 letters.");
        assert_eq!(m[&PlayerId(0)], 5);
        assert_eq!(m[&PlayerId(3)], 6);
    }
}
