//! `arena`: run tournaments, single matches, replays, analyses and the
//! human-play gateway.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use arena_core::analysis::{
    action_distribution, bid_nash_score, c4_value, error_rate, exact_equity, mc_equity, render_ablation,
    ablation_report,
};
use arena_core::cards::parse_cards;
use arena_core::env::GameBody;
use arena_core::games::connect4::{render_grid, C4Board};
use arena_core::runner::default_match_id;
use arena_core::{replay, run_match, Action, EnvKind, MatchRecord, Seed};
use arena_orchestrator::gateway::{builtin_opponents, GatewayState};
use arena_orchestrator::store::CONFIG_SNAPSHOT;
use arena_orchestrator::{run_tournament, AgentSpec, OrchestratorError, Roster, Store, TournamentConfig};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "arena", version, about = "Multi-agent game arena for language models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a tournament from a TOML config.
    Run(RunArgs),
    /// Play one match and append its record.
    Match(MatchArgs),
    /// Print a stored match and check it replays to the same final state.
    Replay {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        record: String,
    },
    /// Reconcile a store and print its leaderboard.
    Leaderboard {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        json: bool,
    },
    #[command(subcommand)]
    Analyze(Analyze),
    /// Serve the HTTP gateway.
    Serve {
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        /// Tournament config whose agents become extra opponents.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restrict to these environments.
    #[arg(long = "env")]
    envs: Vec<EnvKind>,
    /// TOML file with `[[agents]]` replacing the config's roster.
    #[arg(long)]
    agents: Option<PathBuf>,
    #[arg(long)]
    max_games: Option<u64>,
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    env: EnvKind,
    /// Built-in bot name, or an agent id from `--config`; once per seat.
    #[arg(long = "agent", required = true)]
    agents: Vec<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Store directory to append the record to.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_hints: bool,
}

#[derive(Subcommand)]
enum Analyze {
    /// Hold'em showdown equity against a random hand.
    Equity {
        #[arg(long)]
        hole: String,
        #[arg(long, default_value = "")]
        board: String,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Enumerate every completion instead of sampling.
        #[arg(long)]
        exact: bool,
    },
    /// Deviation of bids from half the valuation.
    Nash {
        #[arg(long, requires = "value")]
        bid: Option<f64>,
        #[arg(long)]
        value: Option<f64>,
        /// Score every stored bid instead.
        #[arg(long, conflicts_with = "bid")]
        records: Option<PathBuf>,
    },
    /// Heuristic value of a Connect Four position for the player who moved
    /// first, after 1-based column drops.
    C4Value {
        #[arg(long, value_delimiter = ',')]
        moves: Vec<u8>,
    },
    /// Shares of chosen action classes.
    Distributions {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        env: EnvKind,
        #[arg(long)]
        agent: Option<String>,
    },
    /// Illegal-move rates per agent, with the hints ablation for board games.
    ErrorRates {
        #[arg(long)]
        records: PathBuf,
    },
}

type CliResult = Result<(), Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_max_level(
            std::env::var("ARENA_LOG")
                .ok()
                .and_then(|l| l.parse().ok())
                .unwrap_or(tracing::Level::INFO),
        )
        .init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> CliResult {
    match cmd {
        Command::Run(a) => run(a),
        Command::Match(a) => play(a),
        Command::Replay { records, record } => replay_cmd(&records, &record),
        Command::Leaderboard { store, json } => leaderboard(&store, json),
        Command::Analyze(a) => analyze(a),
        Command::Serve {
            store,
            addr,
            config,
            seed,
        } => serve(store, &addr, config, seed),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentsFile {
    agents: Vec<AgentSpec>,
}

fn run(a: RunArgs) -> CliResult {
    let mut cfg = TournamentConfig::load(&a.config)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(o) = a.out {
        cfg.output = o;
    }
    if !a.envs.is_empty() {
        cfg.envs = a.envs;
    }
    if let Some(m) = a.max_games {
        cfg.max_games = m;
    }
    if let Some(path) = a.agents {
        let text = std::fs::read_to_string(&path).map_err(OrchestratorError::io(&path))?;
        let file: AgentsFile = toml::from_str(&text).map_err(|e| OrchestratorError::Config(e.to_string()))?;
        cfg.agents = file.agents;
    }
    let report = run_tournament(&cfg)?;
    print!("{}", report.leaderboard.render_text());
    for (env, s) in &report.envs {
        println!("{env}: {} games, converged: {}", s.games, s.converged);
    }
    Ok(())
}

fn play(a: MatchArgs) -> CliResult {
    let mut specs = builtin_opponents();
    let mut options = arena_core::MatchOptions::default();
    if let Some(path) = &a.config {
        let cfg = TournamentConfig::load(path)?;
        options = cfg.match_options();
        specs.retain(|b| cfg.agent(&b.id).is_none());
        specs.extend(cfg.agents);
    }
    if a.no_hints {
        options.config.hints_enabled = false;
    }
    if a.agents.len() != a.env.seats() {
        return Err(format!("{} needs {} agents, got {}", a.env, a.env.seats(), a.agents.len()).into());
    }
    let roster = Roster::new(&specs, 8);
    let mut agents = a
        .agents
        .iter()
        .map(|id| roster.instantiate(id))
        .collect::<Result<Vec<_>, _>>()?;
    let mut refs: Vec<&mut dyn arena_core::agent::Agent> =
        agents.iter_mut().map(|b| &mut **b as &mut dyn arena_core::agent::Agent).collect();
    let seed = Seed(a.seed);
    let record = run_match(default_match_id(a.env, seed), a.env, &mut refs, seed, &options)?;
    print_transcript(&record);
    if let Some(out) = a.out {
        Store::open(&out)?.append_record(&record)?;
        println!("appended {} to {}", record.id, out.display());
    }
    Ok(())
}

fn print_transcript(record: &MatchRecord) {
    println!("{} ({}, seed {})", record.id, record.env, record.seed);
    for t in &record.turns {
        let name = &record.agents[t.actor.index()];
        let shown = match &t.applied {
            Some(a) => a.surface.clone(),
            None => "forfeit".into(),
        };
        let retries = t.attempts.len().saturating_sub(1);
        let note = if retries > 0 { format!(" ({retries} retries)") } else { String::new() };
        println!("{:>3} {name}: {shown}{note}", t.ply);
    }
    println!("status: {:?}, outcome: {:?}, rewards: {:?}", record.status, record.outcome, record.rewards);
    if let Some(why) = &record.abort_reason {
        println!("aborted: {why}");
    }
}

fn load(path: &PathBuf) -> Result<Vec<MatchRecord>, Box<dyn std::error::Error>> {
    let f = std::fs::File::open(path).map_err(OrchestratorError::io(path))?;
    let loaded = arena_core::record::read_jsonl(std::io::BufReader::new(f))?;
    if let Some((line, _)) = loaded.truncated_tail {
        eprintln!("warning: ignoring torn final line {line}");
    }
    Ok(loaded.records)
}

fn replay_cmd(path: &PathBuf, id: &str) -> CliResult {
    let records = load(path)?;
    let record = records
        .iter()
        .find(|r| r.id == id)
        .ok_or_else(|| format!("no record `{id}` in {}", path.display()))?;
    print_transcript(record);
    let state = replay(record)?;
    if state != record.final_state {
        return Err("replayed state differs from the stored final state".into());
    }
    println!("replay verified");
    Ok(())
}

fn leaderboard(dir: &PathBuf, json: bool) -> CliResult {
    let store = Store::open(dir)?;
    // Runs snapshot their config; fall back to default rating parameters.
    let config = std::fs::read_to_string(store.path(CONFIG_SNAPSHOT))
        .ok()
        .and_then(|t| serde_json::from_str::<TournamentConfig>(&t).ok())
        .map(|c| c.rating)
        .unwrap_or_default();
    let rec = store.reconcile(&config)?;
    if let Some((line, _)) = &rec.truncated_tail {
        eprintln!("warning: cut torn final line {line}");
    }
    if rec.applied > 0 {
        eprintln!("reconciled {} records", rec.applied);
    }
    let inactive = store.load_leaderboard().map(|l| l.inactive).unwrap_or_default();
    let board = store.save_leaderboard(&rec.leaderboard, &inactive)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&board)?);
    } else {
        print!("{}", board.render_text());
    }
    Ok(())
}

fn analyze(a: Analyze) -> CliResult {
    match a {
        Analyze::Equity {
            hole,
            board,
            samples,
            seed,
            exact,
        } => {
            let h = parse_cards(&hole)?;
            let hole: [_; 2] = h
                .try_into()
                .map_err(|_| "--hole needs exactly two cards")?;
            let board = parse_cards(&board)?;
            let p = if exact {
                exact_equity(&hole, &board)?
            } else {
                mc_equity(&hole, &board, samples, Seed(seed))?.p_win
            };
            println!("{p:.4}");
        }
        Analyze::Nash { bid, value, records } => match (bid, value, records) {
            (Some(b), Some(v), None) => println!("{:.4}", bid_nash_score(b, v)?),
            (None, None, Some(path)) => nash_from_records(&load(&path)?)?,
            _ => return Err("give --bid and --value, or --records".into()),
        },
        Analyze::C4Value { moves } => {
            let mut board = C4Board::default();
            for col in moves {
                let mark = board.to_move();
                board.drop(mark, col)?;
            }
            let first = arena_core::games::Mark::X;
            println!("{}", render_grid(&board).trim_end());
            println!("{}", c4_value(&board, first));
        }
        Analyze::Distributions { records, env, agent } => {
            let d = action_distribution(&load(&records)?, env, agent.as_deref())?;
            println!("{} decisions", d.total);
            for (class, share) in &d.shares {
                println!("{class:<16} {:>6.1}%  ({})", share * 100.0, d.counts[class]);
            }
        }
        Analyze::ErrorRates { records } => {
            let records = load(&records)?;
            let mut agents: Vec<&String> = records.iter().flat_map(|r| &r.agents).collect();
            agents.sort();
            agents.dedup();
            for agent in agents {
                if let Ok(e) = error_rate(&records, agent) {
                    println!("{agent:<24} {:>6.2}%", e * 100.0);
                }
            }
            let cells = ablation_report(&records);
            if !cells.is_empty() {
                print!("{}", render_ablation(&cells));
            }
        }
    }
    Ok(())
}

fn nash_from_records(records: &[MatchRecord]) -> CliResult {
    let mut per_agent: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.env == EnvKind::Bid) {
        let GameBody::Bid(state) = &r.final_state.body else { continue };
        for t in &r.turns {
            if let Some(spec) = &t.applied {
                if let Action::Bid(amount) = spec.payload {
                    let value = state.instance.values[t.actor.index()];
                    let s = arena_core::analysis::bid_nash_score_amounts(amount, value)?;
                    per_agent.entry(&r.agents[t.actor.index()]).or_default().push(s);
                }
            }
        }
    }
    if per_agent.is_empty() {
        return Err("no bids in these records".into());
    }
    for (agent, scores) in per_agent {
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        let mean_abs = scores.iter().map(|s| s.abs()).sum::<f64>() / scores.len() as f64;
        println!("{agent:<24} bids {:>5}  mean {mean:>+.4}  mean |dev| {mean_abs:.4}", scores.len());
    }
    Ok(())
}

fn serve(dir: PathBuf, addr: &str, config: Option<PathBuf>, seed: u64) -> CliResult {
    let store = Store::open(&dir)?;
    let (agents, options) = match config {
        Some(p) => {
            let cfg = TournamentConfig::load(&p)?;
            (cfg.agents.clone(), cfg.match_options())
        }
        None => (Vec::new(), Default::default()),
    };
    let state = Arc::new(GatewayState::new(store, &agents, options, seed));
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        arena_orchestrator::serve(listener, state).await
    })?;
    Ok(())
}
