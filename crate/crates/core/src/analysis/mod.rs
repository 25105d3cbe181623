//! Behavioral metrics: ConnectFour board valuation, Hold'em equity, the
//! Nash-gap bid score and record-level statistics.

pub mod behavior;
pub mod board_value;
pub mod equity;

pub use behavior::{
    ablation_report, action_class, action_distribution, description_accuracy, error_rate,
    guess_metrics, holdem_action_equity, normalize_word, render_ablation, render_guess_table, win_rate,
    AblationCell, ActionDistribution, DescriptionLabel, EquityBucket, GuessMetrics,
};
pub use board_value::{c4_reward, c4_value, count_windows, window_counts, WindowCounts};
pub use equity::{exact_equity, mc_equity, EquityEstimate};

use crate::error::{ArenaError, Result};
use crate::games::bid::BidAmount;

/// Relative deviation of a sealed bid from the equilibrium bid `v/2`.
pub fn bid_nash_score(bid: f64, value: f64) -> Result<f64> {
    if !(value > 0.0 && value.is_finite() && bid.is_finite()) {
        return Err(ArenaError::InvalidInput(format!(
            "nash score needs a positive valuation, got {value}"
        )));
    }
    let half = value / 2.0;
    Ok((bid - half) / half)
}

/// [`bid_nash_score`] on cent-exact amounts.
pub fn bid_nash_score_amounts(bid: BidAmount, value: BidAmount) -> Result<f64> {
    bid_nash_score(bid.cents() as f64, value.cents() as f64)
}
