mod common;

use std::collections::BTreeMap;

use arena_core::env::{EnvKind, Outcome, PlayerId};
use arena_core::rating::trueskill::{norm_cdf, norm_ppf};
use arena_core::rating::{
    normalize_scores, normalize_table, trueskill_update_1v1, GameResult, Leaderboard,
    MatchResult, Rating, RatingConfig, TrueskillParams,
};
use common::*;
use proptest::prelude::*;

#[test]
fn updates_match_high_precision_reference() {
    for (i, c) in trueskill_cases().iter().enumerate() {
        let params = TrueskillParams {
            tau: c.tau,
            draw_probability: c.draw_probability,
            ..TrueskillParams::default()
        };
        let (a, b) = trueskill_update_1v1(
            Rating::new(c.a.0, c.a.1),
            Rating::new(c.b.0, c.b.1),
            c.result,
            &params,
        )
        .unwrap();
        for (got, want) in [(a.mu, c.expect_a.0), (a.sigma, c.expect_a.1), (b.mu, c.expect_b.0), (b.sigma, c.expect_b.1)] {
            assert!((got - want).abs() < 1e-9, "case {i}: {got} vs {want}");
        }
    }
}

#[test]
fn symmetric_draw_leaves_means_at_prior() {
    for eps in [0.0, 0.1, 0.3] {
        let p = TrueskillParams::default().with_draw_probability(eps);
        let (a, b) = trueskill_update_1v1(Rating::default(), Rating::default(), MatchResult::Draw, &p).unwrap();
        assert_eq!(a.mu, 25.0);
        assert_eq!(b.mu, 25.0);
        assert_eq!(a.sigma, b.sigma);
    }
}

#[test]
fn draw_margin_reproduces_draw_probability() {
    // Two equal players: P(|perf diff| < margin) must equal the configured rate.
    for eps in [0.05, 0.1, 0.25, 0.5] {
        let p = TrueskillParams::default().with_draw_probability(eps);
        let sd = (2.0 * p.beta * p.beta).sqrt();
        let got = 2.0 * norm_cdf(p.draw_margin() / sd) - 1.0;
        assert!((got - eps).abs() < 1e-12, "{eps}: {got}");
    }
    assert!(norm_ppf(0.5).abs() < 1e-15);
}

#[test]
fn invalid_parameters_are_rejected() {
    let bad = TrueskillParams {
        draw_probability: 1.0,
        ..TrueskillParams::default()
    };
    assert!(trueskill_update_1v1(Rating::default(), Rating::default(), MatchResult::AWins, &bad).is_err());
    let p = TrueskillParams::default();
    assert!(trueskill_update_1v1(Rating::new(25.0, 0.0), Rating::default(), MatchResult::AWins, &p).is_err());
    assert!(trueskill_update_1v1(Rating::new(f64::NAN, 1.0), Rating::default(), MatchResult::AWins, &p).is_err());
}

fn rating() -> impl Strategy<Value = Rating> {
    (0.0f64..50.0, 0.5f64..10.0).prop_map(|(m, s)| Rating::new(m, s))
}

fn result() -> impl Strategy<Value = MatchResult> {
    prop_oneof![Just(MatchResult::AWins), Just(MatchResult::BWins), Just(MatchResult::Draw)]
}

proptest! {
    #[test]
    fn sigma_never_grows_without_dynamics(a in rating(), b in rating(), r in result(), eps in 0.0f64..0.5) {
        let p = TrueskillParams::default().with_draw_probability(eps);
        let (na, nb) = trueskill_update_1v1(a, b, r, &p).unwrap();
        prop_assert!(na.sigma <= a.sigma && na.sigma > 0.0);
        prop_assert!(nb.sigma <= b.sigma && nb.sigma > 0.0);
    }

    #[test]
    fn winner_gains_and_loser_drops(a in rating(), b in rating(), eps in 0.0f64..0.5) {
        let p = TrueskillParams::default().with_draw_probability(eps);
        let (na, nb) = trueskill_update_1v1(a, b, MatchResult::AWins, &p).unwrap();
        prop_assert!(na.mu > a.mu);
        prop_assert!(nb.mu < b.mu);
    }

    #[test]
    fn mean_shift_is_variance_weighted(a in rating(), b in rating(), r in result()) {
        // Each side moves by its own variance times a shared factor.
        let p = TrueskillParams::default().with_draw_probability(0.1);
        let (na, nb) = trueskill_update_1v1(a, b, r, &p).unwrap();
        let ka = (na.mu - a.mu) / (a.sigma * a.sigma);
        let kb = (b.mu - nb.mu) / (b.sigma * b.sigma);
        prop_assert!((ka - kb).abs() <= 1e-9 * (1.0 + ka.abs()));
    }

    #[test]
    fn normalization_puts_the_best_at_100(xs in proptest::collection::vec(0.01f64..100.0, 1..12)) {
        let m: BTreeMap<String, f64> = xs.iter().enumerate().map(|(i, x)| (format!("a{i}"), *x)).collect();
        let n = normalize_scores(&m).unwrap();
        let best = n.values().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((best - 100.0).abs() < 1e-12);
        let max = xs.iter().copied().fold(0.0, f64::max);
        for (k, v) in &n {
            prop_assert!(*v > 0.0 && *v <= 100.0 + 1e-12);
            prop_assert!((v - 100.0 * m[k] / max).abs() < 1e-9);
        }
    }

    #[test]
    fn normalization_is_scale_invariant(xs in proptest::collection::vec(0.01f64..100.0, 1..12), k in 0.01f64..100.0) {
        let m: BTreeMap<String, f64> = xs.iter().enumerate().map(|(i, x)| (format!("a{i}"), *x)).collect();
        let scaled: BTreeMap<String, f64> = m.iter().map(|(a, x)| (a.clone(), k * x)).collect();
        let (n1, n2) = (normalize_scores(&m).unwrap(), normalize_scores(&scaled).unwrap());
        for (a, v) in &n1 {
            prop_assert!((v - n2[a]).abs() < 1e-9);
        }
    }
}

#[test]
fn upset_wins_pay_more() {
    let p = TrueskillParams::default();
    let me = Rating::default();
    let (vs_strong, _) = trueskill_update_1v1(me, Rating::new(30.0, 25.0 / 3.0), MatchResult::AWins, &p).unwrap();
    let (vs_weak, _) = trueskill_update_1v1(me, Rating::new(20.0, 25.0 / 3.0), MatchResult::AWins, &p).unwrap();
    assert!(vs_strong.mu - me.mu > vs_weak.mu - me.mu);
}

#[test]
fn equal_priors_shift_means_symmetrically() {
    let p = TrueskillParams::default().with_draw_probability(0.1);
    for (ma, mb) in [(25.0, 25.0), (31.0, 18.0), (12.0, 40.0)] {
        for r in [MatchResult::AWins, MatchResult::BWins, MatchResult::Draw] {
            let (a, b) = trueskill_update_1v1(Rating::new(ma, 6.0), Rating::new(mb, 6.0), r, &p).unwrap();
            assert!(((a.mu - ma) + (b.mu - mb)).abs() < 1e-12);
        }
    }
}

#[test]
fn zero_origin_stays_zero() {
    let m: BTreeMap<String, f64> = [("a".to_string(), 0.45), ("b".to_string(), 0.0)].into();
    assert_eq!(normalize_scores(&m).unwrap()["b"], 0.0);
    let zeros: BTreeMap<String, f64> = [("a".to_string(), 0.0)].into();
    assert!(normalize_scores(&zeros).is_err());
    assert!(normalize_scores(&BTreeMap::new()).is_err());
}

#[test]
fn normalization_reproduces_published_reference_cell() {
    let m: BTreeMap<String, f64> = [("a".to_string(), 29.02), ("b".to_string(), 24.03)].into();
    let n = normalize_scores(&m).unwrap();
    assert!((n["b"] - 82.81).abs() <= 0.01, "{}", n["b"]);
    assert_eq!(n["a"], 100.0);
}

/// Published normalized cells that the published raw scores do not
/// reproduce within 0.15 under max-scaling.
fn published_mismatches() -> Vec<(String, &'static str, f64, f64)> {
    let mut table: BTreeMap<&str, BTreeMap<String, f64>> = BTreeMap::new();
    for (agent, row) in ORIGIN_TABLE {
        for (env, x) in TABLE_ENVS.iter().zip(row) {
            table.entry(*env).or_default().insert(agent.to_string(), x);
        }
    }
    let norm = normalize_table(&table).unwrap();
    let mut bad = Vec::new();
    for (agent, row) in NORMALIZED_TABLE {
        for (env, want) in TABLE_ENVS.iter().zip(row) {
            let got = norm[env][agent];
            if (got - want).abs() > 0.15 {
                bad.push((agent.to_string(), *env, got, want));
            }
        }
    }
    bad
}

#[test]
fn published_tables_agree_except_known_cells() {
    let bad = published_mismatches();
    // TicTacToe: one raw entry (79.14) exceeds the column leader, so the
    // whole column rescales. Hanabi: one raw entry is 40.0 among 0-1 values.
    // Bid and Hanabi raw scores carry only two decimals, which is too coarse
    // for 0.15 agreement. One Undercover cell is inconsistent outright.
    assert_eq!(bad.len(), 38, "{bad:#?}");
    let by_env = |e: &str| bad.iter().filter(|(_, env, ..)| *env == e).count();
    assert_eq!(by_env("TicTacToe"), 14);
    assert_eq!(by_env("Hanabi"), 13);
    assert_eq!(by_env("Bid"), 10);
    assert_eq!(by_env("Undercover"), 1);
    for env in ["ConnectFour", "Texas Hold'em", "Bargain"] {
        assert_eq!(by_env(env), 0, "{env}");
    }
}

fn game(id: &str, env: EnvKind, a: &str, b: &str, outcome: Outcome) -> GameResult {
    let rewards = match &outcome {
        Outcome::Win(PlayerId(0)) => vec![1.0, -1.0],
        Outcome::Win(_) => vec![-1.0, 1.0],
        _ => vec![0.0, 0.0],
    };
    GameResult {
        record_id: id.into(),
        env,
        agents: vec![a.into(), b.into()],
        outcome,
        rewards,
        evaluated_seats: vec![],
    }
}

fn sample_games() -> Vec<GameResult> {
    let names = ["p", "q", "r"];
    (0..60)
        .map(|i| {
            let a = names[i % 3];
            let b = names[(i + 1 + i / 3 % 2) % 3];
            let outcome = match i % 5 {
                0 | 3 => Outcome::Win(PlayerId(0)),
                1 => Outcome::Win(PlayerId(1)),
                _ => Outcome::Draw,
            };
            let env = if i % 2 == 0 { EnvKind::TicTacToe } else { EnvKind::TexasHoldem };
            game(&format!("g{i}"), env, a, b, outcome)
        })
        .filter(|g| g.agents[0] != g.agents[1])
        .collect()
}

#[test]
fn leaderboard_is_the_left_fold_of_its_log() {
    let mut lb = Leaderboard::default();
    for g in sample_games() {
        assert!(lb.apply(&g).unwrap());
    }
    let rebuilt = Leaderboard::from_log(lb.config.clone(), &lb.log).unwrap();
    assert_eq!(rebuilt.standings, lb.standings);
    assert_eq!(rebuilt.log, lb.log);

    // Manual fold with the bare update function.
    let config = RatingConfig::default();
    let mut manual: BTreeMap<(EnvKind, String), Rating> = BTreeMap::new();
    for g in sample_games() {
        let p = config.params_for(g.env);
        let ra = *manual.entry((g.env, g.agents[0].clone())).or_default();
        let rb = *manual.entry((g.env, g.agents[1].clone())).or_default();
        let r = match g.outcome {
            Outcome::Win(PlayerId(0)) => MatchResult::AWins,
            Outcome::Win(_) => MatchResult::BWins,
            _ => MatchResult::Draw,
        };
        let (na, nb) = trueskill_update_1v1(ra, rb, r, &p).unwrap();
        manual.insert((g.env, g.agents[0].clone()), na);
        manual.insert((g.env, g.agents[1].clone()), nb);
    }
    for ((env, agent), r) in manual {
        assert_eq!(lb.rating(env, &agent), r);
    }
}

#[test]
fn reapplying_a_record_is_a_no_op() {
    let mut lb = Leaderboard::default();
    let g = game("x", EnvKind::ConnectFour, "a", "b", Outcome::Win(PlayerId(0)));
    assert!(lb.apply(&g).unwrap());
    let snapshot = lb.clone();
    assert!(!lb.apply(&g).unwrap());
    assert_eq!(lb, snapshot);

    let json = serde_json::to_string(&lb).unwrap();
    let mut back: Leaderboard = serde_json::from_str(&json).unwrap();
    back.reindex();
    assert!(!back.apply(&g).unwrap());
    assert_eq!(back.standings, lb.standings);
}

#[test]
fn self_play_and_non_rated_envs_keep_the_prior() {
    let mut lb = Leaderboard::default();
    lb.apply(&game("s", EnvKind::TicTacToe, "a", "a", Outcome::Win(PlayerId(0)))).unwrap();
    assert_eq!(lb.rating(EnvKind::TicTacToe, "a"), Rating::default());
    lb.apply(&game("h", EnvKind::Hanabi, "a", "b", Outcome::TeamWin(vec![PlayerId(0), PlayerId(1)]))).unwrap();
    assert_eq!(lb.rating(EnvKind::Hanabi, "a"), Rating::default());
    assert_eq!(lb.standing(EnvKind::Hanabi, "b").unwrap().wins, 1);
}

#[test]
fn per_env_draw_probability_is_applied() {
    let config = RatingConfig::default();
    assert_eq!(config.params_for(EnvKind::TicTacToe).draw_probability, 0.1);
    assert_eq!(config.params_for(EnvKind::TexasHoldem).draw_probability, 0.0);
}
