use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::games::bargain::BargainAction;
use crate::games::bid::BidAmount;
use crate::games::connect4::C4Move;
use crate::games::hanabi::HanabiAction;
use crate::games::holdem::HoldemAction;
use crate::games::tictactoe::TttMove;
use crate::games::undercover::UndercoverAction;

/// 0-based seat index. Rendered as `player_k` in prompts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(pub u8);

impl PlayerId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn display_name(self) -> String {
        format!("player_{}", self.0)
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "player_{}", self.0)
    }
}

impl From<usize> for PlayerId {
    fn from(i: usize) -> Self {
        PlayerId(i as u8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    TicTacToe,
    ConnectFour,
    TexasHoldem,
    Undercover,
    Bargain,
    Bid,
    Hanabi,
}

impl EnvKind {
    pub const ALL: [EnvKind; 7] = [
        EnvKind::TicTacToe,
        EnvKind::ConnectFour,
        EnvKind::TexasHoldem,
        EnvKind::Undercover,
        EnvKind::Bargain,
        EnvKind::Bid,
        EnvKind::Hanabi,
    ];

    /// Identifier used on the command line, in config files and template paths.
    pub fn slug(self) -> &'static str {
        match self {
            EnvKind::TicTacToe => "tictactoe",
            EnvKind::ConnectFour => "connectfour",
            EnvKind::TexasHoldem => "texas_holdem",
            EnvKind::Undercover => "undercover",
            EnvKind::Bargain => "bargain",
            EnvKind::Bid => "bid",
            EnvKind::Hanabi => "hanabi",
        }
    }

    pub fn seats(self) -> usize {
        match self {
            EnvKind::Undercover => crate::games::undercover::SEATS,
            _ => 2,
        }
    }

    /// Whether the leaderboard ranks this environment by average reward
    /// rather than TrueSkill.
    pub fn scored_by_reward(self) -> bool {
        matches!(self, EnvKind::Bid | EnvKind::Hanabi)
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl std::str::FromStr for EnvKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match norm.as_str() {
            "tictactoe" | "ttt" => EnvKind::TicTacToe,
            "connectfour" | "connect4" | "c4" => EnvKind::ConnectFour,
            "texasholdem" | "holdem" | "texas" => EnvKind::TexasHoldem,
            "undercover" => EnvKind::Undercover,
            "bargain" => EnvKind::Bargain,
            "bid" => EnvKind::Bid,
            "hanabi" => EnvKind::Hanabi,
            _ => return Err(format!("unknown environment `{s}`")),
        })
    }
}

/// Environment-specific action payload.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "env", content = "action", rename_all = "snake_case")]
pub enum Action {
    TicTacToe(TttMove),
    ConnectFour(C4Move),
    TexasHoldem(HoldemAction),
    Undercover(UndercoverAction),
    Bargain(BargainAction),
    Bid(BidAmount),
    Hanabi(HanabiAction),
}

impl Action {
    pub fn env(&self) -> EnvKind {
        match self {
            Action::TicTacToe(_) => EnvKind::TicTacToe,
            Action::ConnectFour(_) => EnvKind::ConnectFour,
            Action::TexasHoldem(_) => EnvKind::TexasHoldem,
            Action::Undercover(_) => EnvKind::Undercover,
            Action::Bargain(_) => EnvKind::Bargain,
            Action::Bid(_) => EnvKind::Bid,
            Action::Hanabi(_) => EnvKind::Hanabi,
        }
    }

    /// Canonical text encoding as it appears in the action prompts.
    pub fn surface(&self, actor: PlayerId) -> String {
        let name = actor.display_name();
        match self {
            Action::TicTacToe(m) => m.to_string(),
            Action::ConnectFour(m) => m.to_string(),
            Action::TexasHoldem(a) => format!("Action: {}", a.label()),
            Action::Undercover(UndercoverAction::Clue(text)) => format!("{name}: {text}"),
            Action::Undercover(UndercoverAction::Vote(target)) => {
                format!("vote: {}.", target.display_name())
            }
            Action::Bargain(BargainAction::Deal) => format!("{name}: Deal."),
            Action::Bargain(BargainAction::Propose(c)) => format!(
                "{name}: {} hats {} balls {} apples",
                c.0[0], c.0[1], c.0[2]
            ),
            Action::Bid(amount) => format!("{name}: {amount}"),
            Action::Hanabi(a) => format!("Action: {}", a.label()),
        }
    }
}

/// A typed action plus its canonical surface form.
///
/// `message` carries free dialogue that accompanied the action (Bargain
/// players talk before stating a plan); it never affects legality.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionSpec {
    pub env: EnvKind,
    pub payload: Action,
    pub surface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl ActionSpec {
    pub fn new(payload: Action, actor: PlayerId) -> Self {
        let surface = payload.surface(actor);
        ActionSpec {
            env: payload.env(),
            payload,
            surface,
            message: None,
        }
    }

    pub fn with_message(mut self, message: impl Into<String>) -> Self {
        let m = message.into();
        self.message = if m.trim().is_empty() { None } else { Some(m) };
        self
    }
}

impl PartialEq for ActionSpec {
    fn eq(&self, other: &Self) -> bool {
        self.payload == other.payload
    }
}

impl Eq for ActionSpec {}

const GENERIC_CLUES: [&str; 6] = [
    "It's something many people know.",
    "You can find it in books.",
    "It has a distinctive shape.",
    "Children learn about it early.",
    "It appears in many stories.",
    "People talk about it often.",
];

/// The legal moves available to one seat.
///
/// Most games enumerate their moves. Bids are any amount below the private
/// valuation and clues are free text, so those are described by a predicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionSet {
    Finite { actions: Vec<ActionSpec> },
    BidRange { actor: PlayerId, max_cents_exclusive: u32 },
    Clue { actor: PlayerId, forbidden: String },
}

impl ActionSet {
    pub fn finite(actions: Vec<ActionSpec>) -> Self {
        ActionSet::Finite { actions }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            ActionSet::Finite { actions } => actions.is_empty(),
            ActionSet::BidRange {
                max_cents_exclusive,
                ..
            } => *max_cents_exclusive == 0,
            ActionSet::Clue { .. } => false,
        }
    }

    pub fn contains(&self, action: &Action) -> bool {
        match (self, action) {
            (ActionSet::Finite { actions }, a) => actions.iter().any(|x| &x.payload == a),
            (
                ActionSet::BidRange {
                    max_cents_exclusive,
                    ..
                },
                Action::Bid(b),
            ) => b.cents() < *max_cents_exclusive,
            (ActionSet::Clue { forbidden, .. }, Action::Undercover(UndercoverAction::Clue(t))) => {
                crate::games::undercover::clue_is_legal(t, forbidden)
            }
            _ => false,
        }
    }

    /// Finite list, if this set is enumerable.
    pub fn listed(&self) -> Option<&[ActionSpec]> {
        match self {
            ActionSet::Finite { actions } => Some(actions),
            _ => None,
        }
    }

    /// Canonical surfaces of an enumerable set; a one-line description otherwise.
    pub fn surfaces(&self) -> Vec<String> {
        match self {
            ActionSet::Finite { actions } => actions.iter().map(|a| a.surface.clone()).collect(),
            ActionSet::BidRange {
                actor,
                max_cents_exclusive,
            } => vec![format!(
                "{}: $0.00 .. {}",
                actor.display_name(),
                BidAmount::from_cents(max_cents_exclusive.saturating_sub(1))
            )],
            ActionSet::Clue { actor, .. } => vec![format!("{}: <clue>", actor.display_name())],
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<ActionSpec> {
        match self {
            ActionSet::Finite { actions } => actions.choose(rng).cloned(),
            ActionSet::BidRange {
                actor,
                max_cents_exclusive,
            } => {
                if *max_cents_exclusive == 0 {
                    return None;
                }
                let cents = rng.gen_range(0..*max_cents_exclusive);
                Some(ActionSpec::new(
                    Action::Bid(BidAmount::from_cents(cents)),
                    *actor,
                ))
            }
            ActionSet::Clue { actor, forbidden } => {
                let legal: Vec<&&str> = GENERIC_CLUES
                    .iter()
                    .filter(|c| crate::games::undercover::clue_is_legal(c, forbidden))
                    .collect();
                let clue = legal.choose(rng).map(|c| c.to_string())?;
                Some(ActionSpec::new(
                    Action::Undercover(UndercoverAction::Clue(clue)),
                    *actor,
                ))
            }
        }
    }
}

/// What one seat sees before acting: named text fragments that fill the
/// prompt templates, plus its legal moves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub env: EnvKind,
    pub viewer: PlayerId,
    /// Template variant (e.g. `clue` / `accusation` for Undercover).
    pub variant: String,
    pub text_blocks: BTreeMap<String, String>,
    pub legal_actions: ActionSet,
    pub hints_enabled: bool,
}

impl Observation {
    pub fn block(&self, key: &str) -> Option<&str> {
        self.text_blocks.get(key).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "players", rename_all = "snake_case")]
pub enum Outcome {
    Win(PlayerId),
    TeamWin(Vec<PlayerId>),
    Draw,
    Failure,
    Ongoing,
}

impl Outcome {
    pub fn is_terminal(&self) -> bool {
        !matches!(self, Outcome::Ongoing)
    }

    pub fn winners(&self) -> Vec<PlayerId> {
        match self {
            Outcome::Win(p) => vec![*p],
            Outcome::TeamWin(ps) => ps.clone(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub rewards: Vec<f64>,
    pub terminal: bool,
    pub outcome: Outcome,
}
