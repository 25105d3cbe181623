//! Per-environment action grammars.
//!
//! Models often reason before answering, so the parser takes the last
//! well-formed action in the completion. Matching is case-insensitive and
//! whitespace-tolerant. A match that names the wrong player or an action
//! outside the legal set is reported, never coerced.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::env::{Action, ActionSpec, EnvKind, Observation, PlayerId};
use crate::games::bargain::{BargainAction, ItemCounts};
use crate::games::bid::BidAmount;
use crate::games::connect4::C4Move;
use crate::games::hanabi::{Color, HanabiAction};
use crate::games::holdem::HoldemAction;
use crate::games::tictactoe::TttMove;
use crate::games::undercover::UndercoverAction;
use crate::games::Mark;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseFailure {
    NoMatch,
    Ambiguous,
    IllegalReference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ParseOutcome {
    Parsed {
        action: ActionSpec,
    },
    Failed {
        failure: ParseFailure,
        detail: String,
        raw: String,
    },
}

impl ParseOutcome {
    pub fn action(&self) -> Option<&ActionSpec> {
        match self {
            ParseOutcome::Parsed { action } => Some(action),
            ParseOutcome::Failed { .. } => None,
        }
    }

    fn failed(failure: ParseFailure, detail: impl Into<String>, raw: &str) -> Self {
        ParseOutcome::Failed {
            failure,
            detail: detail.into(),
            raw: raw.to_string(),
        }
    }
}

/// One grammar hit: byte span plus the decoded action, or why the hit
/// cannot belong to this player.
struct Hit {
    start: usize,
    end: usize,
    action: Result<Action, String>,
}

fn re(cell: &'static OnceLock<Regex>, pattern: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).expect("static grammar"))
}

fn player_index(name: &str) -> Option<u8> {
    name.rsplit(['_', ' ']).next()?.trim().parse().ok()
}

fn check_player(named: &str, viewer: PlayerId) -> Result<(), String> {
    match player_index(named) {
        Some(i) if i == viewer.0 => Ok(()),
        _ => Err(format!("speaks as `{named}` but the actor is {viewer}")),
    }
}

fn ttt_hits(text: &str, viewer: PlayerId) -> Vec<Hit> {
    static RE: OnceLock<Regex> = OnceLock::new();
    static BARE: OnceLock<Regex> = OnceLock::new();
    let mine = Mark::for_seat(viewer.index());
    let decode = |mark: Mark, r: &str, c: &str| -> Result<Action, String> {
        if mark != mine {
            return Err(format!("plays {mark} but the actor plays {mine}"));
        }
        let row = r.parse::<u8>().map_err(|e| e.to_string())?;
        let col = c.parse::<u8>().map_err(|e| e.to_string())?;
        Ok(Action::TicTacToe(TttMove { mark, row, col }))
    };
    let hits: Vec<Hit> = re(&RE, r"(?i)\b([XO])\s*:\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)")
        .captures_iter(text)
        .map(|c| {
            let m = c.get(0).expect("match");
            let mark = Mark::from_symbol(c[1].chars().next().expect("mark")).expect("X or O");
            Hit {
                start: m.start(),
                end: m.end(),
                action: decode(mark, &c[2], &c[3]),
            }
        })
        .collect();
    if !hits.is_empty() {
        return hits;
    }
    // A reply that is nothing but coordinates, as typed by a human.
    re(&BARE, r"^\s*\(?\s*(\d+)\s*,\s*(\d+)\s*\)?\s*$")
        .captures(text)
        .map(|c| Hit {
            start: 0,
            end: text.len(),
            action: decode(mine, &c[1], &c[2]),
        })
        .into_iter()
        .collect()
}

fn c4_hits(text: &str, viewer: PlayerId) -> Vec<Hit> {
    static RE: OnceLock<Regex> = OnceLock::new();
    static BARE: OnceLock<Regex> = OnceLock::new();
    let mine = Mark::for_seat(viewer.index());
    let decode = |mark: Mark, col: &str| -> Result<Action, String> {
        if mark != mine {
            return Err(format!("plays {mark} but the actor plays {mine}"));
        }
        let col = col.parse::<u8>().map_err(|e| e.to_string())?;
        Ok(Action::ConnectFour(C4Move { mark, col }))
    };
    let hits: Vec<Hit> = re(&RE, r"(?i)\b([XO])\s*:\s*(\d+)\b")
        .captures_iter(text)
        .map(|c| {
            let m = c.get(0).expect("match");
            let mark = Mark::from_symbol(c[1].chars().next().expect("mark")).expect("X or O");
            Hit {
                start: m.start(),
                end: m.end(),
                action: decode(mark, &c[2]),
            }
        })
        .collect();
    if !hits.is_empty() {
        return hits;
    }
    re(&BARE, r"^\s*(\d+)\s*$")
        .captures(text)
        .map(|c| Hit {
            start: 0,
            end: text.len(),
            action: decode(mine, &c[1]),
        })
        .into_iter()
        .collect()
}

fn holdem_action(label: &str) -> HoldemAction {
    let l = label.to_ascii_lowercase();
    if l.starts_with("fold") {
        HoldemAction::Fold
    } else if l.starts_with("check") || l.starts_with("call") {
        HoldemAction::CheckCall
    } else if l.contains("half") {
        HoldemAction::RaiseHalfPot
    } else if l.contains("full") {
        HoldemAction::RaiseFullPot
    } else {
        HoldemAction::AllIn
    }
}

fn holdem_hits(text: &str) -> Vec<Hit> {
    static RE: OnceLock<Regex> = OnceLock::new();
    static BARE: OnceLock<Regex> = OnceLock::new();
    const LABELS: &str =
        r"(fold|check\s*(?:and|&)\s*call|raise\s+half\s+pot|raise\s+full\s+pot|all[\s-]*in)";
    let prefixed = format!(r"(?i)action\s*:\s*\**\s*{LABELS}");
    let hits: Vec<Hit> = re(&RE, &prefixed)
        .captures_iter(text)
        .map(|c| {
            let m = c.get(0).expect("match");
            Hit {
                start: m.start(),
                end: m.end(),
                action: Ok(Action::TexasHoldem(holdem_action(&c[1]))),
            }
        })
        .collect();
    if !hits.is_empty() {
        return hits;
    }
    let bare = format!(r"(?i)^\s*{LABELS}\s*\.?\s*$");
    re(&BARE, &bare)
        .captures(text)
        .map(|c| Hit {
            start: 0,
            end: text.len(),
            action: Ok(Action::TexasHoldem(holdem_action(&c[1]))),
        })
        .into_iter()
        .collect()
}

fn clean_clue(s: &str) -> String {
    s.trim()
        .trim_matches(|c| c == '"' || c == '\'' || c == '*')
        .trim()
        .to_string()
}

fn undercover_hits(text: &str, viewer: PlayerId, voting: bool) -> Vec<Hit> {
    static VOTE: OnceLock<Regex> = OnceLock::new();
    static CLUE: OnceLock<Regex> = OnceLock::new();
    if voting {
        re(&VOTE, r"(?i)vote\s*:\s*\**\s*(player[_\s]?\d+)")
            .captures_iter(text)
            .map(|c| {
                let m = c.get(0).expect("match");
                let action = player_index(&c[1])
                    .map(|i| Action::Undercover(UndercoverAction::Vote(PlayerId(i))))
                    .ok_or_else(|| format!("unreadable vote target `{}`", &c[1]));
                Hit {
                    start: m.start(),
                    end: m.end(),
                    action,
                }
            })
            .collect()
    } else {
        re(&CLUE, r"(?im)(player[_\s]?\d+)\s*:[ \t]*([^\n]+)")
            .captures_iter(text)
            .map(|c| {
                let m = c.get(0).expect("match");
                let clue = clean_clue(&c[2]);
                let action = check_player(&c[1], viewer).and_then(|_| {
                    if clue.is_empty() {
                        Err("empty clue".to_string())
                    } else {
                        Ok(Action::Undercover(UndercoverAction::Clue(clue)))
                    }
                });
                Hit {
                    start: m.start(),
                    end: m.end(),
                    action,
                }
            })
            .collect()
    }
}

fn bargain_hits(text: &str, viewer: PlayerId) -> Vec<Hit> {
    static DEAL: OnceLock<Regex> = OnceLock::new();
    static PLAN: OnceLock<Regex> = OnceLock::new();
    let mut hits: Vec<Hit> = re(&DEAL, r"(?i)(player[_\s]?\d+)\s*:\s*\**\s*deal\b")
        .captures_iter(text)
        .map(|c| {
            let m = c.get(0).expect("match");
            Hit {
                start: m.start(),
                end: m.end(),
                action: check_player(&c[1], viewer).map(|_| Action::Bargain(BargainAction::Deal)),
            }
        })
        .collect();
    hits.extend(
        re(
            &PLAN,
            r"(?i)(player[_\s]?\d+)\s*:\s*\**\s*(\d+)\s*hats?\s*,?\s*(\d+)\s*balls?\s*,?\s*(?:and\s+)?(\d+)\s*apples?",
        )
        .captures_iter(text)
        .map(|c| {
            let m = c.get(0).expect("match");
            let counts = [&c[2], &c[3], &c[4]].map(|s| s.parse::<u32>().unwrap_or(u32::MAX));
            Hit {
                start: m.start(),
                end: m.end(),
                action: check_player(&c[1], viewer)
                    .map(|_| Action::Bargain(BargainAction::Propose(ItemCounts(counts)))),
            }
        }),
    );
    hits.sort_by_key(|h| h.start);
    hits
}

fn bid_hits(text: &str, viewer: PlayerId) -> Vec<Hit> {
    static RE: OnceLock<Regex> = OnceLock::new();
    re(&RE, r"(?i)(player[_\s]?\d+)\s*:\s*\**\s*(\$?\s*\d+(?:\.\d+)?)")
        .captures_iter(text)
        .map(|c| {
            let m = c.get(0).expect("match");
            let action = check_player(&c[1], viewer).and_then(|_| {
                c[2].parse::<BidAmount>()
                    .map(Action::Bid)
                    .map_err(|e| e.to_string())
            });
            Hit {
                start: m.start(),
                end: m.end(),
                action,
            }
        })
        .collect()
}

fn hanabi_hits(text: &str) -> Vec<Hit> {
    static RE: OnceLock<Regex> = OnceLock::new();
    static BARE: OnceLock<Regex> = OnceLock::new();
    const BODY: &str = r"(?:play\s+card\s+(\d+)|discard\s+card\s+(\d+)|reveal\s+(red|yellow)\s+cards?|reveal\s+rank\s+(\d+)\s+cards?)";
    let decode = |c: &regex::Captures<'_>| -> Result<Action, String> {
        let slot = |s: &str| {
            s.parse::<u8>()
                .ok()
                .and_then(|n| n.checked_sub(1))
                .ok_or_else(|| format!("bad card slot `{s}`"))
        };
        let a = if let Some(s) = c.get(1) {
            HanabiAction::Play(slot(s.as_str())?)
        } else if let Some(s) = c.get(2) {
            HanabiAction::Discard(slot(s.as_str())?)
        } else if let Some(col) = c.get(3) {
            HanabiAction::RevealColor(if col.as_str().eq_ignore_ascii_case("red") {
                Color::Red
            } else {
                Color::Yellow
            })
        } else {
            let r = c.get(4).expect("rank group").as_str();
            HanabiAction::RevealRank(r.parse().map_err(|_| format!("bad rank `{r}`"))?)
        };
        Ok(Action::Hanabi(a))
    };
    let to_hits = |regex: &Regex| -> Vec<Hit> {
        regex
            .captures_iter(text)
            .map(|c| {
                let m = c.get(0).expect("match");
                Hit {
                    start: m.start(),
                    end: m.end(),
                    action: decode(&c),
                }
            })
            .collect()
    };
    let hits = to_hits(re(&RE, &format!(r"(?i)action\s*:\s*\**\s*{BODY}")));
    if !hits.is_empty() {
        return hits;
    }
    to_hits(re(&BARE, &format!(r"(?i)\b{BODY}")))
}

fn line_of(text: &str, pos: usize) -> usize {
    text[..pos].matches('\n').count()
}

/// Extracts the last well-formed action for the observing player.
pub fn parse_action(env: EnvKind, raw: &str, obs: &Observation) -> ParseOutcome {
    if raw.trim().is_empty() {
        return ParseOutcome::failed(ParseFailure::NoMatch, "empty completion", raw);
    }
    if env != obs.env {
        return ParseOutcome::failed(
            ParseFailure::IllegalReference,
            format!("parsing {env} against a {} observation", obs.env),
            raw,
        );
    }
    let viewer = obs.viewer;
    let hits = match env {
        EnvKind::TicTacToe => ttt_hits(raw, viewer),
        EnvKind::ConnectFour => c4_hits(raw, viewer),
        EnvKind::TexasHoldem => holdem_hits(raw),
        EnvKind::Undercover => undercover_hits(raw, viewer, obs.variant == "accusation"),
        EnvKind::Bargain => bargain_hits(raw, viewer),
        EnvKind::Bid => bid_hits(raw, viewer),
        EnvKind::Hanabi => hanabi_hits(raw),
    };
    let Some(last) = hits.last() else {
        return ParseOutcome::failed(ParseFailure::NoMatch, "no action in the expected format", raw);
    };
    let last_line = line_of(raw, last.start);
    let conflicting = hits.iter().rev().skip(1).any(|h| {
        line_of(raw, h.start) == last_line && h.action != last.action
    });
    if conflicting {
        return ParseOutcome::failed(
            ParseFailure::Ambiguous,
            "several different actions on the final answer line",
            raw,
        );
    }
    let action = match &last.action {
        Ok(a) => a.clone(),
        Err(why) => return ParseOutcome::failed(ParseFailure::IllegalReference, why.clone(), raw),
    };
    if !obs.legal_actions.contains(&action) {
        return ParseOutcome::failed(
            ParseFailure::IllegalReference,
            format!("`{}` is not a legal action now", action.surface(viewer)),
            raw,
        );
    }
    let mut spec = ActionSpec::new(action, viewer);
    if env == EnvKind::Bargain {
        spec = spec.with_message(raw[..last.start].trim());
    }
    let _ = last.end;
    ParseOutcome::Parsed { action: spec }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{reset, EnvConfig};
    use crate::seed::Seed;

    fn obs(env: EnvKind) -> Observation {
        let s = reset(env, Seed(3), &EnvConfig::default()).unwrap();
        s.observe(s.to_act().unwrap())
    }

    #[test]
    fn ttt_examples() {
        let o = obs(EnvKind::TicTacToe);
        let p = parse_action(EnvKind::TicTacToe, "X: (1, 3)", &o);
        assert_eq!(p.action().unwrap().surface, "X: (1, 3)");
        let p = parse_action(EnvKind::TicTacToe, "I think x:(2,2) then\nX: (1, 3)", &o);
        assert_eq!(p.action().unwrap().surface, "X: (1, 3)");
        let p = parse_action(EnvKind::TicTacToe, "(1,1)", &o);
        assert_eq!(p.action().unwrap().surface, "X: (1, 1)");
        assert!(matches!(
            parse_action(EnvKind::TicTacToe, "O: (1, 3)", &o),
            ParseOutcome::Failed { failure: ParseFailure::IllegalReference, .. }
        ));
        assert!(matches!(
            parse_action(EnvKind::TicTacToe, "X: (1, 1) or X: (2, 2)", &o),
            ParseOutcome::Failed { failure: ParseFailure::Ambiguous, .. }
        ));
        assert!(matches!(
            parse_action(EnvKind::TicTacToe, "hello", &o),
            ParseOutcome::Failed { failure: ParseFailure::NoMatch, .. }
        ));
    }

    #[test]
    fn holdem_example() {
        let o = obs(EnvKind::TexasHoldem);
        let p = parse_action(EnvKind::TexasHoldem, "Let me think.\nAction: Check and Call", &o);
        assert_eq!(
            p.action().unwrap().payload,
            Action::TexasHoldem(HoldemAction::CheckCall)
        );
    }

    #[test]
    fn bargain_message_split() {
        let o = obs(EnvKind::Bargain);
        let p = parse_action(
            EnvKind::Bargain,
            "I'd like 1 hat, 2 balls, and 0 apples. player_0: 1 hat 1 ball 0 apples",
            &o,
        );
        let a = p.action().unwrap();
        assert_eq!(a.surface, "player_0: 1 hats 1 balls 0 apples");
        assert_eq!(a.message.as_deref(), Some("I'd like 1 hat, 2 balls, and 0 apples."));
    }
}
