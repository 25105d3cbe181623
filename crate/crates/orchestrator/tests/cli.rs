use std::process::{Command, Output};

use tempfile::TempDir;

fn arena(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arena"))
        .args(args)
        .env("ARENA_LOG", "error")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn royal_flush_equity_is_one() {
    let args = ["analyze", "equity", "--hole", "AS,KS", "--board", "QS,JS,TS", "--samples", "100000", "--seed", "7"];
    assert_eq!(stdout(&arena(&args)).trim(), "1.0000");
    let exact = ["analyze", "equity", "--hole", "AS,KS", "--board", "QS,JS,TS", "--exact"];
    assert_eq!(stdout(&arena(&exact)).trim(), "1.0000");
}

#[test]
fn nash_and_board_value() {
    assert_eq!(stdout(&arena(&["analyze", "nash", "--bid", "76", "--value", "100"])).trim(), "0.5200");
    let out = stdout(&arena(&["analyze", "c4-value", "--moves", "3,3,4"]));
    assert!(out.lines().count() == 7, "{out}");
}

#[test]
fn bad_input_exits_nonzero() {
    assert!(!arena(&["analyze", "equity", "--hole", "ZZ"]).status.success());
    assert!(!arena(&["analyze", "equity", "--hole", "AS,AS", "--board", "KD,QD,JD"]).status.success());
    assert!(!arena(&["bogus"]).status.success());
    assert!(!arena(&["match", "--env", "ttt", "--agent", "random"]).status.success());
    assert!(!arena(&["run", "--config", "/nonexistent.toml"]).status.success());
}

#[test]
fn match_then_replay_then_leaderboard() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let played = stdout(&arena(&[
        "match", "--env", "connectfour", "--agent", "c4_greedy", "--agent", "random", "--seed", "4", "--out", out,
    ]));
    assert!(played.contains("status: Completed"), "{played}");
    let records = format!("{out}/records.jsonl");
    let replayed = stdout(&arena(&["replay", "--records", &records, "--record", "connectfour-4"]));
    assert!(replayed.ends_with("replay verified\n"));
    let board = stdout(&arena(&["leaderboard", "--store", out, "--json"]));
    let v: serde_json::Value = serde_json::from_str(&board).unwrap();
    assert_eq!(v["envs"]["connect_four"]["rows"].as_array().unwrap().len(), 2);
    assert!(!arena(&["replay", "--records", &records, "--record", "missing"]).status.success());
}

#[test]
fn run_from_toml_writes_the_store() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("arena.toml");
    std::fs::write(
        &cfg,
        r#"
envs = ["tictactoe"]
max_games = 12
seed = 2

[convergence]
min_games = 3

[[agents]]
id = "r"
bot = "random"

[[agents]]
id = "o"
bot = "ttt_oracle"
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let text = stdout(&arena(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]));
    assert!(text.contains("tictactoe"), "{text}");
    for f in ["records.jsonl", "ratings.json", "leaderboard.json", "leaderboard.txt", "config.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let errors = stdout(&arena(&["analyze", "error-rates", "--records", out.join("records.jsonl").to_str().unwrap()]));
    assert!(errors.contains("0.00%"), "{errors}");
    let dist = stdout(&arena(&[
        "analyze", "distributions", "--records", out.join("records.jsonl").to_str().unwrap(), "--env", "ttt",
    ]));
    assert!(dist.contains("decisions"), "{dist}");
}

#[test]
fn documented_config_example_parses() {
    let doc = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/config.md")).unwrap();
    let start = doc.find("```toml\n").unwrap() + 8;
    let body = &doc[start..start + doc[start..].find("```").unwrap()];
    let cfg = arena_orchestrator::TournamentConfig::from_toml(body).unwrap();
    assert_eq!(cfg.agents.len(), 4);
    assert_eq!(cfg.envs.len(), 4);
}
