//! HTTP gateway for human play, leaderboards and analysis.
//!
//! Humans see exactly the prompt text a model would see and submit free
//! text that goes through the same action grammar. Bot and model turns run
//! on blocking threads; the session lock is released while a model thinks,
//! so submissions during that time are rejected as out of turn. Endpoints
//! are listed in `docs/api.md`.

use std::collections::BTreeMap;
use std::convert::Infallible;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use arena_core::agent::{Agent, AgentKind, BotKind};
use arena_core::env::GameBody;
use arena_core::games::{connect4, tictactoe};
use arena_core::prompt::{observation_prompt, system_prompt, turn_prompt};
use arena_core::runner::Submission;
use arena_core::{ArenaError, EnvKind, MatchOptions, MatchRecord, MatchSession, PlayerId, Seed};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::broadcast;

use crate::config::AgentSpec;
use crate::roster::Roster;
use crate::store::{LeaderboardFile, Store};

/// One entry of a session's event stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnEvent {
    pub id: u64,
    /// `start`, `turn` or `game_over`.
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seat: Option<u8>,
    pub surface_text: String,
    pub state_render: String,
}

struct Live {
    session: MatchSession,
    /// `None` at the human seat, and while an agent is thinking.
    agents: Vec<Option<Box<dyn Agent>>>,
    persisted: bool,
}

struct SessionHandle {
    id: String,
    env: EnvKind,
    human_seat: PlayerId,
    opponent: String,
    live: Mutex<Live>,
    history: Mutex<Vec<TurnEvent>>,
    events: broadcast::Sender<TurnEvent>,
}

pub struct GatewayState {
    store: Store,
    roster: Roster,
    opponents: Vec<String>,
    options: MatchOptions,
    sessions: Mutex<BTreeMap<String, Arc<SessionHandle>>>,
    counter: AtomicU64,
    seed: u64,
    append_lock: Mutex<()>,
}

/// Bots every gateway offers, besides any configured roster.
pub fn builtin_opponents() -> Vec<AgentSpec> {
    vec![
        AgentSpec::bot("random", BotKind::Random),
        AgentSpec::bot("ttt_oracle", BotKind::TttOracle),
        AgentSpec::bot("c4_greedy", BotKind::C4Greedy),
        AgentSpec::bot("equity_threshold", BotKind::EquityThreshold { samples: 400 }),
        AgentSpec::bot("play_only", BotKind::PlayOnly),
        AgentSpec::bot("clue_bot", BotKind::ClueBot),
        AgentSpec::bot("bid_half", BotKind::BidFraction { fraction: 0.5 }),
    ]
}

impl GatewayState {
    /// `roster` entries override built-in bots of the same id.
    pub fn new(store: Store, roster: &[AgentSpec], options: MatchOptions, seed: u64) -> Self {
        let mut specs: Vec<AgentSpec> = builtin_opponents()
            .into_iter()
            .filter(|b| roster.iter().all(|r| r.id != b.id))
            .collect();
        specs.extend(roster.iter().cloned());
        let roster = Roster::new(&specs, 8);
        let opponents = roster.ids().iter().filter(|id| roster.is_available(id)).cloned().collect();
        GatewayState {
            store,
            roster,
            opponents,
            options,
            sessions: Mutex::new(BTreeMap::new()),
            counter: AtomicU64::new(0),
            seed,
            append_lock: Mutex::new(()),
        }
    }

    fn session(&self, id: &str) -> Result<Arc<SessionHandle>, ApiError> {
        lock(&self.sessions)
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session `{id}`")))
    }

    fn persist(&self, record: &MatchRecord) {
        let _g = lock(&self.append_lock);
        if let Err(e) = self.store.append_record(record) {
            tracing::error!(error = %e, id = %record.id, "could not persist human record");
        }
    }
}

fn lock<T>(m: &Mutex<T>) -> std::sync::MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, msg: impl Into<String>) -> Self {
        ApiError {
            status,
            body: json!({ "error": msg.into() }),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<ArenaError> for ApiError {
    fn from(e: ArenaError) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, e.to_string())
    }
}

impl From<crate::OrchestratorError> for ApiError {
    fn from(e: crate::OrchestratorError) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

/// Public rendering for the human's seat: the grid for board games, the
/// observation text otherwise.
fn state_render(session: &MatchSession, seat: PlayerId) -> String {
    let state = session.state();
    match &state.body {
        GameBody::TicTacToe(s) => tictactoe::render_grid(&s.board),
        GameBody::ConnectFour(s) => connect4::render_grid(&s.board),
        _ => observation_prompt(&state.observe(seat)).unwrap_or_default(),
    }
}

impl SessionHandle {
    fn emit(&self, live: &Live, kind: &str, seat: Option<PlayerId>, surface_text: String) {
        let mut history = lock(&self.history);
        let ev = TurnEvent {
            id: history.len() as u64,
            kind: kind.to_string(),
            seat: seat.map(|p| p.0),
            surface_text,
            state_render: state_render(&live.session, self.human_seat),
        };
        history.push(ev.clone());
        let _ = self.events.send(ev);
    }

    fn emit_last_turn(&self, live: &Live) {
        let Some(turn) = live.session.record().turns.last() else { return };
        let surface = match &turn.applied {
            Some(a) => a.surface.clone(),
            None => format!(
                "forfeit: {}",
                turn.attempts.last().map(|a| a.reply.text.as_str()).unwrap_or("")
            ),
        };
        self.emit(live, "turn", Some(turn.actor), surface);
    }

    /// Emits the closing event and appends the record once.
    fn finish_if_over(&self, live: &mut Live, gw: &GatewayState) {
        if !live.session.is_over() || live.persisted {
            return;
        }
        live.persisted = true;
        let record = live.session.record().clone();
        let summary = match &record.abort_reason {
            Some(why) => format!("aborted: {why}"),
            None => format!("{:?}", record.outcome),
        };
        self.emit(live, "game_over", None, summary);
        gw.persist(&record);
    }

    fn view(&self, live: &Live) -> Value {
        let session = &live.session;
        let record = session.record();
        let to_act = session.to_act();
        let your_turn = to_act == Some(self.human_seat);
        json!({
            "id": self.id,
            "env": self.env.slug(),
            "human_seat": self.human_seat.0,
            "opponent": self.opponent,
            "status": record.status,
            "to_act": to_act.map(|p| p.0),
            "your_turn": your_turn,
            "outcome": record.outcome,
            "rewards": record.rewards,
            "turns": record.turns.len(),
            "legal_actions": if your_turn {
                session.state().observe(self.human_seat).legal_actions.surfaces()
            } else {
                Vec::new()
            },
            "state_render": state_render(session, self.human_seat),
        })
    }
}

/// Plays agent turns until the human is to act or the game ends.
fn advance(handle: &SessionHandle, gw: &GatewayState) {
    let mut feedback: Option<String> = None;
    loop {
        let (actor, obs, mut agent) = {
            let mut live = lock(&handle.live);
            let actor = match live.session.to_act() {
                Some(a) if a != handle.human_seat => a,
                _ => {
                    handle.finish_if_over(&mut live, gw);
                    return;
                }
            };
            let Some(agent) = live.agents[actor.index()].take() else {
                // Another thread is already driving this seat.
                return;
            };
            let obs = live.session.state().observe(actor);
            (actor, obs, agent)
        };
        let reply = agent.respond(&obs, feedback.as_deref());
        let mut live = lock(&handle.live);
        live.agents[actor.index()] = Some(agent);
        match reply {
            Err(e) => {
                live.session.abort(e.to_string());
                handle.finish_if_over(&mut live, gw);
                return;
            }
            Ok(r) => match live.session.submit(actor, r) {
                Ok(Submission::Retry { feedback: f }) => feedback = Some(f),
                Ok(_) => {
                    feedback = None;
                    handle.emit_last_turn(&live);
                }
                Err(e) => {
                    live.session.abort(e.to_string());
                    handle.finish_if_over(&mut live, gw);
                    return;
                }
            },
        }
    }
}

fn spawn_advance(handle: Arc<SessionHandle>, gw: Arc<GatewayState>) {
    tokio::task::spawn_blocking(move || advance(&handle, &gw));
}

#[derive(Debug, Deserialize)]
pub struct CreateSession {
    pub env: String,
    #[serde(default = "default_opponent")]
    pub opponent: String,
    #[serde(default)]
    pub human_seat: u8,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub hints: Option<bool>,
}

fn default_opponent() -> String {
    "random".into()
}

async fn create_session(
    State(gw): State<Arc<GatewayState>>,
    Json(req): Json<CreateSession>,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    let env: EnvKind = req.env.parse().map_err(|e: String| ApiError::new(StatusCode::BAD_REQUEST, e))?;
    if req.human_seat as usize >= env.seats() {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            format!("{env} has seats 0..{}", env.seats()),
        ));
    }
    if !gw.opponents.contains(&req.opponent) {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            format!("unknown opponent `{}`", req.opponent),
        ));
    }
    let n = gw.counter.fetch_add(1, Ordering::SeqCst);
    let id = format!("human-{}-{n:04}", env.slug());
    let seed = Seed(req.seed.unwrap_or_else(|| Seed(gw.seed).derive(n).0));
    let human = PlayerId(req.human_seat);
    let mut options = gw.options.clone();
    if let Some(h) = req.hints {
        options.config.hints_enabled = h;
    }
    let mut agents: Vec<Option<Box<dyn Agent>>> = Vec::new();
    let mut roster = Vec::new();
    for seat in 0..env.seats() {
        if seat == human.index() {
            agents.push(None);
            roster.push(("human".to_string(), AgentKind::Human));
        } else {
            let mut a = gw.roster.instantiate(&req.opponent)?;
            a.begin_match(env, PlayerId(seat as u8), seed);
            roster.push((req.opponent.clone(), a.kind()));
            agents.push(Some(a));
        }
    }
    let session = MatchSession::new(id.clone(), env, seed, roster, &options)?;
    let (tx, _) = broadcast::channel(256);
    let handle = Arc::new(SessionHandle {
        id: id.clone(),
        env,
        human_seat: human,
        opponent: req.opponent,
        live: Mutex::new(Live {
            session,
            agents,
            persisted: false,
        }),
        history: Mutex::new(Vec::new()),
        events: tx,
    });
    let view = {
        let live = lock(&handle.live);
        handle.emit(&live, "start", None, String::new());
        handle.view(&live)
    };
    lock(&gw.sessions).insert(id, handle.clone());
    spawn_advance(handle, gw.clone());
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(State(gw): State<Arc<GatewayState>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let h = gw.session(&id)?;
    let live = lock(&h.live);
    Ok(Json(h.view(&live)))
}

async fn get_observation(
    State(gw): State<Arc<GatewayState>>,
    Path(id): Path<String>,
) -> Result<Json<Value>, ApiError> {
    let h = gw.session(&id)?;
    let live = lock(&h.live);
    let obs = live.session.state().observe(h.human_seat);
    let your_turn = live.session.to_act() == Some(h.human_seat);
    let prompt = if your_turn { turn_prompt(&obs)? } else { observation_prompt(&obs)? };
    Ok(Json(json!({
        "seat": h.human_seat.0,
        "your_turn": your_turn,
        "system_prompt": system_prompt(h.env)?,
        "prompt": prompt,
        "legal_actions": if your_turn { obs.legal_actions.surfaces() } else { Vec::new() },
    })))
}

#[derive(Debug, Deserialize)]
pub struct SubmitAction {
    pub action: String,
}

async fn submit_action(
    State(gw): State<Arc<GatewayState>>,
    Path(id): Path<String>,
    Json(req): Json<SubmitAction>,
) -> Result<Json<Value>, ApiError> {
    let h = gw.session(&id)?;
    let view = {
        let mut live = lock(&h.live);
        if live.session.is_over() {
            return Err(ApiError::new(StatusCode::CONFLICT, "game is over"));
        }
        let to_act = live.session.to_act();
        if to_act != Some(h.human_seat) {
            return Err(ApiError {
                status: StatusCode::CONFLICT,
                body: json!({ "error": "not your turn", "to_act": to_act.map(|p| p.0) }),
            });
        }
        match live.session.submit_human(h.human_seat, &req.action) {
            Ok(_) => {}
            Err(e @ (ArenaError::IllegalAction { .. } | ArenaError::InvalidInput(_))) => {
                let legal = live.session.state().observe(h.human_seat).legal_actions.surfaces();
                return Err(ApiError {
                    status: StatusCode::UNPROCESSABLE_ENTITY,
                    body: json!({ "error": e.to_string(), "legal_actions": legal }),
                });
            }
            Err(e) => return Err(e.into()),
        }
        h.emit_last_turn(&live);
        h.finish_if_over(&mut live, &gw);
        h.view(&live)
    };
    spawn_advance(h, gw.clone());
    Ok(Json(view))
}

async fn get_record(State(gw): State<Arc<GatewayState>>, Path(id): Path<String>) -> Result<Json<MatchRecord>, ApiError> {
    let h = gw.session(&id)?;
    let live = lock(&h.live);
    Ok(Json(live.session.record().clone()))
}

fn to_sse(ev: TurnEvent) -> Result<Event, Infallible> {
    Ok(Event::default()
        .event(ev.kind.clone())
        .id(ev.id.to_string())
        .json_data(&ev)
        .unwrap_or_default())
}

/// Past events, then live ones; the stream ends after `game_over`.
async fn session_events(
    State(gw): State<Arc<GatewayState>>,
    Path(id): Path<String>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let h = gw.session(&id)?;
    let rx = h.events.subscribe();
    let past = lock(&h.history).clone();
    let next_id = past.len() as u64;
    let finished = past.iter().any(|e| e.kind == "game_over");
    let live = stream::unfold((rx, finished), move |(mut rx, done)| async move {
        if done {
            return None;
        }
        loop {
            match rx.recv().await {
                Ok(ev) if ev.id < next_id => continue,
                Ok(ev) => {
                    let over = ev.kind == "game_over";
                    return Some((ev, (rx, over)));
                }
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    });
    Ok(Sse::new(stream::iter(past).chain(live).map(to_sse)).keep_alive(KeepAlive::default()))
}

async fn list_sessions(State(gw): State<Arc<GatewayState>>) -> Json<Value> {
    let sessions: Vec<Value> = lock(&gw.sessions)
        .values()
        .map(|h| {
            let live = lock(&h.live);
            json!({
                "id": h.id,
                "env": h.env.slug(),
                "status": live.session.record().status,
            })
        })
        .collect();
    Json(json!({ "sessions": sessions }))
}

async fn leaderboard(State(gw): State<Arc<GatewayState>>) -> Result<Json<LeaderboardFile>, ApiError> {
    if gw.store.path(crate::store::LEADERBOARD).exists() {
        return Ok(Json(gw.store.load_leaderboard()?));
    }
    let lb = gw.store.load_ratings(&Default::default())?;
    Ok(Json(LeaderboardFile::build(&lb, &BTreeMap::new())))
}

async fn analysis_index(State(gw): State<Arc<GatewayState>>) -> Result<Json<Value>, ApiError> {
    Ok(Json(json!({ "files": gw.store.analysis_files()? })))
}

async fn analysis_file(State(gw): State<Arc<GatewayState>>, Path(name): Path<String>) -> Result<Response, ApiError> {
    let text = gw
        .store
        .read_analysis(&name)
        .map_err(|e| ApiError::new(StatusCode::NOT_FOUND, e.to_string()))?;
    Ok(match serde_json::from_str::<Value>(&text) {
        Ok(v) if name.ends_with(".json") => Json(v).into_response(),
        _ => text.into_response(),
    })
}

async fn envs() -> Json<Value> {
    let list: Vec<Value> = EnvKind::ALL
        .iter()
        .map(|e| json!({ "env": e.slug(), "seats": e.seats() }))
        .collect();
    Json(json!({ "envs": list }))
}

async fn agents(State(gw): State<Arc<GatewayState>>) -> Json<Value> {
    Json(json!({ "opponents": gw.opponents }))
}

async fn health() -> Json<Value> {
    Json(json!({ "ok": true }))
}

pub fn router(state: Arc<GatewayState>) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/envs", get(envs))
        .route("/api/agents", get(agents))
        .route("/api/sessions", get(list_sessions).post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/observation", get(get_observation))
        .route("/api/sessions/{id}/actions", post(submit_action))
        .route("/api/sessions/{id}/events", get(session_events))
        .route("/api/sessions/{id}/record", get(get_record))
        .route("/api/leaderboard", get(leaderboard))
        .route("/api/analysis", get(analysis_index))
        .route("/api/analysis/{name}", get(analysis_file))
        .with_state(state)
}

/// Serves until the process is interrupted.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<GatewayState>) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
