//! Statistics over match records: action mixes, illegal-move rates, the
//! hint ablation grid and Undercover word-guess accuracy.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::equity::mc_equity;
use crate::cards::{parse_cards, Card};
use crate::env::{Action, EnvKind, PlayerId};
use crate::error::{ArenaError, Result};
use crate::games::bargain::BargainAction;
use crate::games::undercover::UndercoverAction;
use crate::record::{MatchRecord, MatchStatus};
use crate::seed::Seed;

/// Coarse class of an action for distribution plots.
pub fn action_class(action: &Action) -> String {
    match action {
        Action::TicTacToe(_) | Action::ConnectFour(_) => "move".into(),
        Action::TexasHoldem(a) => a.label().to_string(),
        Action::Undercover(UndercoverAction::Clue(_)) => "clue".into(),
        Action::Undercover(UndercoverAction::Vote(_)) => "vote".into(),
        Action::Bargain(BargainAction::Deal) => "deal".into(),
        Action::Bargain(BargainAction::Propose(_)) => "propose".into(),
        Action::Bid(_) => "bid".into(),
        Action::Hanabi(a) => a.class().into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionDistribution {
    pub env: EnvKind,
    pub total: u64,
    pub counts: BTreeMap<String, u64>,
    pub shares: BTreeMap<String, f64>,
}

fn decisions<'a>(
    records: &'a [MatchRecord],
    env: EnvKind,
    agent: Option<&'a str>,
) -> impl Iterator<Item = (usize, usize, &'a crate::record::TurnEntry, &'a Action)> + 'a {
    records
        .iter()
        .enumerate()
        .filter(move |(_, r)| r.env == env)
        .flat_map(move |(ri, r)| {
            r.turns.iter().enumerate().filter_map(move |(ti, t)| {
                let mine = agent.is_none_or(|a| r.agents[t.actor.index()] == a);
                let action = &t.applied.as_ref()?.payload;
                mine.then_some((ri, ti, t, action))
            })
        })
}

/// Frequencies of applied action classes, optionally for one agent only.
pub fn action_distribution(
    records: &[MatchRecord],
    env: EnvKind,
    agent: Option<&str>,
) -> Result<ActionDistribution> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for (_, _, _, a) in decisions(records, env, agent) {
        *counts.entry(action_class(a)).or_default() += 1;
    }
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(ArenaError::Empty("no decisions for this environment"));
    }
    let shares = counts
        .iter()
        .map(|(k, v)| (k.clone(), *v as f64 / total as f64))
        .collect();
    Ok(ActionDistribution {
        env,
        total,
        counts,
        shares,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EquityBucket {
    pub count: u64,
    pub mean_equity: f64,
}

/// Mean Monte Carlo equity at the moment each Hold'em action was chosen.
pub fn holdem_action_equity(
    records: &[MatchRecord],
    agent: Option<&str>,
    samples: u64,
    seed: Seed,
) -> Result<BTreeMap<String, EquityBucket>> {
    let mut sums: BTreeMap<String, (u64, f64)> = BTreeMap::new();
    for (ri, ti, turn, action) in decisions(records, EnvKind::TexasHoldem, agent) {
        let read = |k: &str| -> Result<Vec<Card>> {
            parse_cards(turn.observation.block(k).unwrap_or_default())
        };
        let hole: [Card; 2] = read("private")?
            .try_into()
            .map_err(|_| ArenaError::CorruptRecord("hole cards missing".into()))?;
        let board = read("public")?;
        let s = seed.derive(((ri as u64) << 20) | ti as u64);
        let eq = mc_equity(&hole, &board, samples, s)?.p_win;
        let e = sums.entry(action_class(action)).or_default();
        e.0 += 1;
        e.1 += eq;
    }
    if sums.is_empty() {
        return Err(ArenaError::Empty("no Hold'em decisions"));
    }
    Ok(sums
        .into_iter()
        .map(|(k, (n, s))| {
            (
                k,
                EquityBucket {
                    count: n,
                    mean_equity: s / n as f64,
                },
            )
        })
        .collect())
}

fn games_of<'a>(records: &'a [MatchRecord], agent: &'a str) -> impl Iterator<Item = &'a MatchRecord> {
    records.iter().filter(move |r| {
        r.status != MatchStatus::Aborted && r.agents.iter().any(|a| a == agent)
    })
}

/// Share of the agent's games that ended because it broke the rules.
pub fn error_rate(records: &[MatchRecord], agent: &str) -> Result<f64> {
    let (mut games, mut errors) = (0u64, 0u64);
    for r in games_of(records, agent) {
        games += 1;
        let by_agent = r
            .violator
            .is_some_and(|v| r.agents[v.index()] == agent);
        if r.status == MatchStatus::IllegalTerminated && by_agent {
            errors += 1;
        }
    }
    if games == 0 {
        return Err(ArenaError::Empty("agent played no games"));
    }
    Ok(errors as f64 / games as f64)
}

/// Share of the agent's games it won (team wins included).
pub fn win_rate(records: &[MatchRecord], agent: &str) -> Result<f64> {
    let (mut games, mut wins) = (0u64, 0u64);
    for r in games_of(records, agent) {
        games += 1;
        if r.outcome.winners().iter().any(|w| r.agents[w.index()] == agent) {
            wins += 1;
        }
    }
    if games == 0 {
        return Err(ArenaError::Empty("agent played no games"));
    }
    Ok(wins as f64 / games as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationCell {
    pub agent: String,
    pub env: EnvKind,
    pub hints: bool,
    pub games: u64,
    pub win_rate: f64,
    pub error_rate: f64,
}

/// Win and illegal-move rates per (agent, board game, hints on/off).
pub fn ablation_report(records: &[MatchRecord]) -> Vec<AblationCell> {
    let mut groups: BTreeMap<(String, EnvKind, bool), Vec<MatchRecord>> = BTreeMap::new();
    for r in records {
        if !matches!(r.env, EnvKind::TicTacToe | EnvKind::ConnectFour) {
            continue;
        }
        let mut seen: Vec<&str> = Vec::new();
        for a in &r.agents {
            if seen.contains(&a.as_str()) {
                continue;
            }
            seen.push(a);
            groups
                .entry((a.clone(), r.env, r.config.hints_enabled))
                .or_default()
                .push(r.clone());
        }
    }
    groups
        .into_iter()
        .filter_map(|((agent, env, hints), rs)| {
            let games = games_of(&rs, &agent).count() as u64;
            Some(AblationCell {
                win_rate: win_rate(&rs, &agent).ok()?,
                error_rate: error_rate(&rs, &agent).ok()?,
                agent,
                env,
                hints,
                games,
            })
        })
        .collect()
}

/// Plain-text grid: one row per agent, win and error percentages with and
/// without hints for each board game.
pub fn render_ablation(cells: &[AblationCell]) -> String {
    let envs = [EnvKind::TicTacToe, EnvKind::ConnectFour];
    let agents: Vec<&str> = {
        let mut a: Vec<&str> = cells.iter().map(|c| c.agent.as_str()).collect();
        a.sort();
        a.dedup();
        a
    };
    let mut out = format!("{:<20}", "agent");
    for env in envs {
        for h in ["hint", "no hint"] {
            let _ = write!(out, " | {:>16}", format!("{env} {h}"));
        }
    }
    out.push('\n');
    let mut sub = format!("{:<20}", "");
    for _ in 0..4 {
        let _ = write!(sub, " | {:>7} {:>8}", "win%", "err%");
    }
    out.push_str(&sub);
    out.push('\n');
    for agent in agents {
        let _ = write!(out, "{agent:<20}");
        for env in envs {
            for hints in [true, false] {
                match cells
                    .iter()
                    .find(|c| c.agent == agent && c.env == env && c.hints == hints)
                {
                    Some(c) => {
                        let _ = write!(
                            out,
                            " | {:>7.1} {:>8.1}",
                            100.0 * c.win_rate,
                            100.0 * c.error_rate
                        );
                    }
                    None => {
                        let _ = write!(out, " | {:>7} {:>8}", "-", "-");
                    }
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Lower-cased with surrounding punctuation and whitespace removed.
pub fn normalize_word(w: &str) -> String {
    w.trim()
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuessMetrics {
    pub agent: String,
    pub games: u64,
    /// Percent of games where at least one other word was guessed exactly.
    pub any_correct: f64,
    /// Percent of games where every other word was guessed exactly.
    pub all_correct: f64,
}

pub fn guess_metrics(records: &[MatchRecord], agent: &str) -> Result<GuessMetrics> {
    let (mut games, mut any, mut all) = (0u64, 0u64, 0u64);
    for r in records {
        let seats: Vec<PlayerId> = r.seat_of(agent);
        for g in r.guesses.iter().filter(|g| seats.contains(&g.seat)) {
            games += 1;
            let hits: Vec<bool> = g
                .truth
                .iter()
                .map(|(p, word)| {
                    g.guesses
                        .get(p)
                        .is_some_and(|guess| normalize_word(guess) == normalize_word(word))
                })
                .collect();
            any += u64::from(hits.iter().any(|h| *h));
            all += u64::from(!hits.is_empty() && hits.iter().all(|h| *h));
        }
    }
    if games == 0 {
        return Err(ArenaError::Empty("no guess-phase data for this agent"));
    }
    Ok(GuessMetrics {
        agent: agent.to_string(),
        games,
        any_correct: 100.0 * any as f64 / games as f64,
        all_correct: 100.0 * all as f64 / games as f64,
    })
}

/// Hand-made judgement of whether a clue described the word well.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescriptionLabel {
    pub record_id: String,
    pub seat: PlayerId,
    pub accurate: bool,
}

/// Percent of an agent's labelled descriptions judged accurate. Labels
/// refer to records by id; labels for unknown records are ignored.
pub fn description_accuracy(records: &[MatchRecord], labels: &[DescriptionLabel], agent: &str) -> Result<f64> {
    let (mut n, mut ok) = (0u64, 0u64);
    for l in labels {
        let Some(r) = records.iter().find(|r| r.id == l.record_id) else {
            continue;
        };
        if r.agents.get(l.seat.index()).map(String::as_str) == Some(agent) {
            n += 1;
            ok += u64::from(l.accurate);
        }
    }
    if n == 0 {
        return Err(ArenaError::Empty("no description labels for this agent"));
    }
    Ok(100.0 * ok as f64 / n as f64)
}

/// Plain-text table of description and guess accuracy per agent.
pub fn render_guess_table(rows: &[(GuessMetrics, Option<f64>)]) -> String {
    let mut out = format!(
        "{:<20} | {:>11} | {:>7} | {:>14} | {:>5}\n",
        "agent", "description", "guess%", "guess strict%", "games"
    );
    for (g, desc) in rows {
        let d = desc.map_or_else(|| "-".to_string(), |d| format!("{d:.1}"));
        let _ = writeln!(
            out,
            "{:<20} | {:>11} | {:>7.1} | {:>14.1} | {:>5}",
            g.agent, d, g.any_correct, g.all_correct, g.games
        );
    }
    out
}
