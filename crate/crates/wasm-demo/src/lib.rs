//! Browser demo: play TicTacToe or ConnectFour against a scripted bot,
//! estimate Hold'em equity, and step through TrueSkill updates.
//!
//! The plain Rust API below is what the tests exercise; the `web` module
//! wraps it for `wasm-bindgen` and speaks JSON strings to the page.

use arena_core::agent::{Agent, AgentKind, BotKind, Reply, ScriptedBot};
use arena_core::cards::parse_cards;
use arena_core::analysis::equity::{exact_equity, mc_equity};
use arena_core::env::GameBody;
use arena_core::games::{connect4, tictactoe};
use arena_core::prompt::turn_prompt;
use arena_core::rating::trueskill::{trueskill_update_1v1, MatchResult, Rating, TrueskillParams};
use arena_core::runner::Submission;
use arena_core::{EnvKind, MatchOptions, MatchSession, Outcome, PlayerId, Seed};
use serde::Serialize;

/// A board game between the page user and one bot.
pub struct BoardGame {
    session: MatchSession,
    bot: ScriptedBot,
    human: PlayerId,
    log: Vec<String>,
}

/// Everything the page needs to draw the current position.
#[derive(Debug, Clone, Serialize)]
pub struct BoardView {
    pub env: EnvKind,
    pub grid: Vec<Vec<String>>,
    pub your_turn: bool,
    pub over: bool,
    /// `win`, `loss`, `draw` or empty while the game runs.
    pub result: String,
    pub legal: Vec<String>,
    /// The prompt a model would see in the user's seat.
    pub prompt: String,
    pub log: Vec<String>,
}

fn parse_env(name: &str) -> Result<EnvKind, String> {
    match name.parse::<EnvKind>()? {
        env @ (EnvKind::TicTacToe | EnvKind::ConnectFour) => Ok(env),
        other => Err(format!("the demo plays tictactoe or connectfour, not {other}")),
    }
}

fn parse_bot(name: &str) -> Result<BotKind, String> {
    match name {
        "random" => Ok(BotKind::Random),
        "ttt_oracle" => Ok(BotKind::TttOracle),
        "c4_greedy" => Ok(BotKind::C4Greedy),
        other => Err(format!("unknown opponent {other:?}")),
    }
}

impl BoardGame {
    /// `human_seat` 0 moves first.
    pub fn new(env: &str, opponent: &str, human_seat: u8, seed: u64) -> Result<Self, String> {
        let env = parse_env(env)?;
        if human_seat > 1 {
            return Err("seat must be 0 or 1".into());
        }
        let mut bot = ScriptedBot::new(opponent, parse_bot(opponent)?);
        let human = PlayerId(human_seat);
        let mut seats = vec![
            ("you".to_string(), AgentKind::Human),
            (opponent.to_string(), AgentKind::Scripted),
        ];
        if human_seat == 1 {
            seats.swap(0, 1);
        }
        let session = MatchSession::new(format!("demo-{seed}"), env, Seed(seed), seats, &MatchOptions::default())
            .map_err(|e| e.to_string())?;
        bot.begin_match(env, PlayerId(1 - human_seat), Seed(seed));
        let mut game = BoardGame {
            session,
            bot,
            human,
            log: Vec::new(),
        };
        game.bot_moves()?;
        Ok(game)
    }

    /// Applies the user's move, then lets the bot answer.
    pub fn play(&mut self, text: &str) -> Result<BoardView, String> {
        if self.session.to_act() != Some(self.human) {
            return Err("it is not your turn".into());
        }
        self.session.submit_human(self.human, text).map_err(|e| e.to_string())?;
        self.push_last();
        self.bot_moves()?;
        Ok(self.view())
    }

    fn bot_moves(&mut self) -> Result<(), String> {
        let mut feedback: Option<String> = None;
        while let Some(seat) = self.session.to_act().filter(|&p| p != self.human) {
            let obs = self.session.state().observe(seat);
            let reply: Reply = self.bot.respond(&obs, feedback.as_deref()).map_err(|e| e.to_string())?;
            match self.session.submit(seat, reply).map_err(|e| e.to_string())? {
                Submission::Retry { feedback: f } => feedback = Some(f),
                _ => {
                    feedback = None;
                    self.push_last();
                }
            }
        }
        Ok(())
    }

    fn push_last(&mut self) {
        if let Some(turn) = self.session.record().turns.last() {
            let who = if turn.actor == self.human { "you" } else { self.bot.id() };
            let surface = turn.applied.as_ref().map(|a| a.surface.clone()).unwrap_or_default();
            self.log.push(format!("{who}: {surface}"));
        }
    }

    pub fn view(&self) -> BoardView {
        let state = self.session.state();
        let text = match &state.body {
            GameBody::TicTacToe(s) => tictactoe::render_grid(&s.board),
            GameBody::ConnectFour(s) => connect4::render_grid(&s.board),
            _ => String::new(),
        };
        let grid = text
            .lines()
            .map(|l| l.split_whitespace().map(str::to_string).collect())
            .collect();
        let your_turn = self.session.to_act() == Some(self.human);
        let record = self.session.record();
        let result = match &record.outcome {
            Outcome::Ongoing => "",
            Outcome::Draw => "draw",
            Outcome::Win(p) if *p == self.human => "win",
            _ => "loss",
        };
        let obs = state.observe(self.human);
        BoardView {
            env: state.env,
            grid,
            your_turn,
            over: self.session.is_over(),
            result: result.to_string(),
            legal: if your_turn { obs.legal_actions.surfaces() } else { Vec::new() },
            prompt: if your_turn { turn_prompt(&obs).unwrap_or_default() } else { String::new() },
            log: self.log.clone(),
        }
    }
}

/// Win probability against one random hand. `board` may be empty for
/// preflop; `exact` needs at least the flop.
pub fn equity(hole: &str, board: &str, samples: u32, seed: u64, exact: bool) -> Result<f64, String> {
    let hole = parse_cards(hole).map_err(|e| e.to_string())?;
    let hole: [_; 2] = hole.try_into().map_err(|_| "hole needs exactly two cards".to_string())?;
    let board = if board.trim().is_empty() {
        Vec::new()
    } else {
        parse_cards(board).map_err(|e| e.to_string())?
    };
    let p = if exact {
        exact_equity(&hole, &board)
    } else {
        mc_equity(&hole, &board, u64::from(samples), Seed(seed)).map(|e| e.p_win)
    };
    p.map_err(|e| e.to_string())
}

/// One 1v1 TrueSkill update. `result` is `a`, `b` or `draw`.
/// Returns `[mu_a, sigma_a, mu_b, sigma_b]`.
pub fn trueskill_step(a: (f64, f64), b: (f64, f64), result: &str, draw_probability: f64) -> Result<[f64; 4], String> {
    let result = match result {
        "a" => MatchResult::AWins,
        "b" => MatchResult::BWins,
        "draw" => MatchResult::Draw,
        other => return Err(format!("result must be a, b or draw, not {other:?}")),
    };
    let params = TrueskillParams::default().with_draw_probability(draw_probability);
    let (na, nb) = trueskill_update_1v1(Rating::new(a.0, a.1), Rating::new(b.0, b.1), result, &params)
        .map_err(|e| e.to_string())?;
    Ok([na.mu, na.sigma, nb.mu, nb.sigma])
}

pub mod web {
    use wasm_bindgen::prelude::*;

    fn js(e: String) -> JsError {
        JsError::new(&e)
    }

    #[wasm_bindgen]
    pub struct Game(super::BoardGame);

    #[wasm_bindgen]
    impl Game {
        #[wasm_bindgen(constructor)]
        pub fn new(env: &str, opponent: &str, human_seat: u8, seed: u32) -> Result<Game, JsError> {
            super::BoardGame::new(env, opponent, human_seat, u64::from(seed)).map(Game).map_err(js)
        }

        /// JSON view after the move and the bot's reply.
        pub fn play(&mut self, text: &str) -> Result<String, JsError> {
            let view = self.0.play(text).map_err(js)?;
            serde_json::to_string(&view).map_err(|e| js(e.to_string()))
        }

        pub fn view(&self) -> String {
            serde_json::to_string(&self.0.view()).unwrap_or_default()
        }
    }

    #[wasm_bindgen]
    pub fn equity(hole: &str, board: &str, samples: u32, seed: u32, exact: bool) -> Result<f64, JsError> {
        super::equity(hole, board, samples, u64::from(seed), exact).map_err(js)
    }

    #[wasm_bindgen]
    pub fn trueskill_step(
        mu_a: f64,
        sigma_a: f64,
        mu_b: f64,
        sigma_b: f64,
        result: &str,
        draw_probability: f64,
    ) -> Result<Vec<f64>, JsError> {
        super::trueskill_step((mu_a, sigma_a), (mu_b, sigma_b), result, draw_probability)
            .map(|r| r.to_vec())
            .map_err(js)
    }
}
