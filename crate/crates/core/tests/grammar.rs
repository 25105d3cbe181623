use arena_core::env::{reset, step, Action, EnvConfig, EnvKind, GameState, PlayerId};
use arena_core::games::bid::BidAmount;
use arena_core::games::tictactoe::TttMove;
use arena_core::games::undercover::UndercoverAction;
use arena_core::games::Mark;
use arena_core::parse::{parse_action, ParseFailure, ParseOutcome};
use arena_core::prompt::{build_prompt, guess_prompt, placeholders, template, turn_prompt};
use arena_core::Seed;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Plays `plies` uniformly random legal moves (stopping early at the end).
fn random_state(env: EnvKind, seed: u64, plies: usize) -> GameState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = reset(env, Seed(seed), &EnvConfig::default()).unwrap();
    for _ in 0..plies {
        let Some(p) = s.to_act() else { break };
        let a = s.observe(p).legal_actions.sample(&mut rng).unwrap();
        s = step(&s, p, &a).unwrap().0;
    }
    s
}

const TTT_OPENING: &str = "You play X.

The board status is - - -
- - -
- - -.

You can only put the mark on [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3)].

You should only output X and the position of the move, for example: \"X: (1, 3)\"

The position you put the mark on must be empty. 

Don't say anything besides mark position.";

const C4_OPENING: &str = "You play X.

The board status is - - - - - - -
- - - - - - -
- - - - - - -
- - - - - - -
- - - - - - -
- - - - - - -.

You can only choose one of the following columns: [ 1, 2, 3, 4, 5, 6, 7 ].

You should only output X and the column of the move you choose to put your mark, for example: \"X: 1\"

The column you put the mark on cannot be full.

Don't say anything besides mark position.";

#[test]
fn golden_opening_prompts() {
    for (env, want) in [(EnvKind::TicTacToe, TTT_OPENING), (EnvKind::ConnectFour, C4_OPENING)] {
        let s = reset(env, Seed(0), &EnvConfig::default()).unwrap();
        assert_eq!(turn_prompt(&s.observe(PlayerId(0))).unwrap(), want, "{env}");
    }
}

#[test]
fn second_player_is_told_its_mark() {
    for env in [EnvKind::TicTacToe, EnvKind::ConnectFour] {
        let s = random_state(env, 1, 1);
        let p = turn_prompt(&s.observe(PlayerId(1))).unwrap();
        assert!(p.starts_with("You play O.\n"), "{p}");
        assert!(p.contains("for example: \"O: "));
    }
}

#[test]
fn hint_ablation_drops_only_the_available_block() {
    for env in [EnvKind::TicTacToe, EnvKind::ConnectFour] {
        let cfg = EnvConfig {
            hints_enabled: false,
            ..EnvConfig::default()
        };
        let s = reset(env, Seed(0), &cfg).unwrap();
        let p = turn_prompt(&s.observe(PlayerId(0))).unwrap();
        assert!(!p.contains("You can only"), "{p}");
        assert!(p.starts_with("You play X."));
        assert!(p.contains("Don't say anything besides mark position."));
    }
}

#[test]
fn bid_amounts_render_with_cents() {
    assert_eq!(BidAmount::from_cents(150).to_string(), "$1.50");
    assert_eq!(BidAmount::from_cents(7).to_string(), "$0.07");
    assert_eq!("$1.50".parse::<BidAmount>().unwrap().cents(), 150);
    assert_eq!("2".parse::<BidAmount>().unwrap().cents(), 200);
    let s = reset(EnvKind::Bid, Seed(4), &EnvConfig::default()).unwrap();
    let p = turn_prompt(&s.observe(PlayerId(0))).unwrap();
    let value = s.observe(PlayerId(0)).text_blocks["value"].clone();
    assert!(p.contains(&format!("valuation of the current auction item is ${value},")));
    assert!(p.contains("\"player_0: $x.xx\""));
    assert_eq!(value.split('.').nth(1).map(str::len), Some(2));
}

#[test]
fn every_template_placeholder_is_bound_somewhere() {
    for env in EnvKind::ALL {
        for seed in 0..30 {
            let s = random_state(env, seed, (seed % 7) as usize);
            if let Some(p) = s.to_act() {
                let msgs = build_prompt(&s.observe(p)).unwrap();
                assert_eq!(msgs.len(), 2);
                assert!(placeholders(&msgs[1].content).is_empty(), "{}", msgs[1].content);
            }
        }
    }
    let g = guess_prompt("player_1", &["player_0".into(), "player_2".into()]).unwrap();
    assert!(g.contains("player_1") && g.contains("player_0, player_2"));
    assert!(template(EnvKind::Hanabi, "guess").is_err());
}

#[test]
fn reasoning_before_answer_takes_the_final_action() {
    let s = reset(EnvKind::TicTacToe, Seed(0), &EnvConfig::default()).unwrap();
    let obs = s.observe(PlayerId(0));
    let reply = "X: (1, 1) looks tempting, but the centre is stronger.\nX: (2, 2)";
    let a = parse_action(EnvKind::TicTacToe, reply, &obs);
    assert_eq!(
        a.action().unwrap().payload,
        Action::TicTacToe(TttMove { mark: Mark::X, row: 2, col: 2 })
    );
    let both = "x: (1, 1) or X: (2, 2)";
    assert!(matches!(
        parse_action(EnvKind::TicTacToe, both, &obs),
        ParseOutcome::Failed { failure: ParseFailure::Ambiguous, .. }
    ));
    assert!(matches!(
        parse_action(EnvKind::TicTacToe, "O: (1, 1)", &obs),
        ParseOutcome::Failed { failure: ParseFailure::IllegalReference, .. }
    ));
    assert!(matches!(
        parse_action(EnvKind::TicTacToe, "I resign", &obs),
        ParseOutcome::Failed { failure: ParseFailure::NoMatch, .. }
    ));
}

fn accusation_state() -> GameState {
    for seed in 0.. {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = reset(EnvKind::Undercover, Seed(seed), &EnvConfig::default()).unwrap();
        while let Some(p) = s.to_act() {
            let obs = s.observe(p);
            if obs.variant == "accusation" {
                return s;
            }
            let a = obs.legal_actions.sample(&mut rng).unwrap();
            s = step(&s, p, &a).unwrap().0;
        }
    }
    unreachable!()
}

#[test]
fn vote_after_reasoning_is_read_from_the_end() {
    let s = accusation_state();
    let p = s.to_act().unwrap();
    let obs = s.observe(p);
    let targets: Vec<PlayerId> = obs
        .legal_actions
        .listed()
        .unwrap()
        .iter()
        .filter_map(|a| match a.payload {
            Action::Undercover(UndercoverAction::Vote(t)) => Some(t),
            _ => None,
        })
        .collect();
    assert!(targets.len() >= 2);
    let (first, second) = (targets[0], targets[1]);
    let reply = format!(
        "{} described something odd, and {} was vague too. After thinking it over,\nvote: {}.",
        first.display_name(),
        second.display_name(),
        second.display_name()
    );
    let got = parse_action(EnvKind::Undercover, &reply, &obs);
    assert_eq!(
        got.action().unwrap().payload,
        Action::Undercover(UndercoverAction::Vote(second))
    );
}

#[test]
fn bargain_keeps_the_dialogue_before_the_plan() {
    let s = reset(EnvKind::Bargain, Seed(2), &EnvConfig::default()).unwrap();
    let obs = s.observe(PlayerId(0));
    let reply = "I value the hats most. player_0: 0 hats 0 balls 0 apples";
    let a = parse_action(EnvKind::Bargain, reply, &obs);
    let spec = a.action().unwrap();
    assert_eq!(spec.message.as_deref(), Some("I value the hats most."));
    assert!(parse_action(EnvKind::Bargain, "player_1: 0 hats 0 balls 0 apples", &obs)
        .action()
        .is_none());
}

fn any_env() -> impl Strategy<Value = EnvKind> {
    proptest::sample::select(EnvKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonical_surfaces_parse_back(env in any_env(), seed in 0u64..10_000, plies in 0usize..12) {
        let s = random_state(env, seed, plies);
        let Some(p) = s.to_act() else { return Ok(()) };
        let obs = s.observe(p);
        let specs = match obs.legal_actions.listed() {
            Some(list) => list.to_vec(),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..5).filter_map(|_| obs.legal_actions.sample(&mut rng)).collect()
            }
        };
        for spec in specs {
            let got = parse_action(env, &spec.surface, &obs);
            prop_assert_eq!(&got.action().map(|a| a.payload.clone()), &Some(spec.payload.clone()), "{}", spec.surface);
            // Surrounding chatter and case changes do not matter.
            let noisy = format!("Let me think.\n\n{}", spec.surface.to_uppercase());
            if env != EnvKind::Undercover && env != EnvKind::Bargain {
                let got = parse_action(env, &noisy, &obs);
                prop_assert_eq!(got.action().map(|a| a.payload.clone()), Some(spec.payload.clone()), "{}", noisy);
            }
        }
    }

    #[test]
    fn parsed_actions_are_always_legal(
        env in any_env(),
        seed in 0u64..10_000,
        plies in 0usize..12,
        junk in "[ -~\n]{0,60}",
        pick in any::<prop::sample::Index>(),
    ) {
        let s = random_state(env, seed, plies);
        let Some(p) = s.to_act() else { return Ok(()) };
        let obs = s.observe(p);
        // Mix real surfaces from every seat into the junk so the grammar
        // actually fires, including with the wrong player's name.
        let mut pool: Vec<String> = obs.legal_actions.surfaces();
        for other in 0..env.seats() {
            if other != p.index() {
                pool.extend(s.observe(PlayerId(other as u8)).legal_actions.surfaces());
            }
        }
        let text = format!("{junk}{}", pool[pick.index(pool.len())]);
        for candidate in [junk.as_str(), text.as_str()] {
            if let Some(a) = parse_action(env, candidate, &obs).action() {
                prop_assert!(obs.legal_actions.contains(&a.payload), "{candidate:?} -> {:?}", a.payload);
                prop_assert_eq!(a.env, env);
            }
        }
    }
}
