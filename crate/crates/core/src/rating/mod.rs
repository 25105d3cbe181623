//! Skill rating: TrueSkill updates, convergence detection, leaderboards and
//! score normalization.

mod leaderboard;
pub mod trueskill;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{ArenaError, Result};

pub use leaderboard::{
    metric_for, GameResult, Leaderboard, MetricKind, RatingConfig, RatingEvent, Standing,
};
pub use trueskill::{trueskill_update_1v1, MatchResult, Rating, TrueskillParams};

/// Rescales so the best entry scores 100: `100 * x / max`.
pub fn normalize_scores(origin: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
    let max = origin
        .values()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if origin.is_empty() {
        return Err(ArenaError::Empty("no scores to normalize"));
    }
    if !(max > 0.0 && max.is_finite()) {
        return Err(ArenaError::InvalidInput(
            "normalization needs a positive maximum".into(),
        ));
    }
    Ok(origin
        .iter()
        .map(|(k, v)| (k.clone(), 100.0 * v / max))
        .collect())
}

/// Column-wise normalization of an env → agent → score table.
pub fn normalize_table<K: Ord + Clone>(
    table: &BTreeMap<K, BTreeMap<String, f64>>,
) -> Result<BTreeMap<K, BTreeMap<String, f64>>> {
    table
        .iter()
        .map(|(env, col)| Ok((env.clone(), normalize_scores(col)?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceParams {
    pub sigma_threshold: f64,
    pub min_games: usize,
    /// Trailing window for the mean-drift criterion; 0 disables it.
    pub window: usize,
    pub mu_tolerance: f64,
}

impl Default for ConvergenceParams {
    fn default() -> Self {
        ConvergenceParams {
            sigma_threshold: 1.0,
            min_games: 50,
            window: 0,
            mu_tolerance: 0.1,
        }
    }
}

/// True iff every agent has played `min_games` and either all sigmas are
/// below the threshold or every mean moved less than the tolerance over the
/// trailing window. Each history holds one rating per game played.
pub fn has_converged(histories: &BTreeMap<String, Vec<Rating>>, params: &ConvergenceParams) -> bool {
    if histories.is_empty() || histories.values().any(|h| h.len() < params.min_games) {
        return false;
    }
    let sigma_ok = histories
        .values()
        .all(|h| h.last().is_some_and(|r| r.sigma < params.sigma_threshold));
    let drift_ok = params.window > 0
        && histories.values().all(|h| {
            if h.len() <= params.window {
                return false;
            }
            let tail = &h[h.len() - params.window - 1..];
            let lo = tail.iter().map(|r| r.mu).fold(f64::INFINITY, f64::min);
            let hi = tail.iter().map(|r| r.mu).fold(f64::NEG_INFINITY, f64::max);
            hi - lo < params.mu_tolerance
        });
    sigma_ok || drift_ok
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist(n: usize, sigma: f64) -> Vec<Rating> {
        vec![Rating::new(25.0, sigma); n]
    }

    #[test]
    fn convergence_rules() {
        let p = ConvergenceParams::default();
        let mut h = BTreeMap::new();
        h.insert("a".to_string(), hist(60, 0.9));
        h.insert("b".to_string(), hist(60, 0.9));
        assert!(has_converged(&h, &p));
        h.insert("c".to_string(), hist(10, 0.5));
        assert!(!has_converged(&h, &p));
        h.insert("c".to_string(), hist(60, 1.5));
        assert!(!has_converged(&h, &p));
        let drift = ConvergenceParams { window: 20, ..p };
        assert!(has_converged(&h, &drift));
    }

    #[test]
    fn normalize_basics() {
        let m: BTreeMap<String, f64> = [("a", 24.03), ("b", 29.02), ("c", 0.0)]
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        let n = normalize_scores(&m).unwrap();
        assert_eq!(n["b"], 100.0);
        assert_eq!(n["c"], 0.0);
        assert!(normalize_scores(&BTreeMap::new()).is_err());
        let zeros: BTreeMap<String, f64> = [("a".to_string(), 0.0)].into_iter().collect();
        assert!(normalize_scores(&zeros).is_err());
    }
}
