//! Turn-based game server over HTTP.
//!
//! Every session is event-sourced: an append-only JSONL log under the data
//! directory, replayed on startup. Engine-only transitions and bot seats are
//! advanced by the server, so a session only ever waits on a human.

use std::collections::{BTreeMap, HashMap};
use std::convert::Infallible;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::sse::{Event as SseEvent, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::Stream;
use idge_core::engine::{
    init_round_at, legal_actions, next_state, player_name, Agent, GameState, LegalAction, Notice, PlayerId,
    PlayerInput, RandomAgent, Round,
};
use idge_core::rephrase::parse_rephrased;
use idge_core::rng::fnv1a;
use idge_core::script::{serialize_script, GameScript};
use idge_core::statelang::{action_text, parse_action, parse_input, parse_player, parse_state, redact, serialize_input, serialize_state};
use idge_core::variants;
use serde::{Deserialize, Serialize};
use tokio::sync::watch;
use tokio_stream::wrappers::WatchStream;
use tokio_stream::StreamExt;

use crate::datagen::{round_category, round_seed, RoundLog};
use crate::harness::transcript_of;
use crate::records::{NspRecord, TranscriptRecord};

pub const DATA_DIR_ENV: &str = "IDGE_DATA_DIR";
pub const BIND_ENV: &str = "IDGE_BIND";
pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

const MAX_WAIT_MS: u64 = 60_000;
const DEFAULT_WAIT_MS: u64 = 25_000;

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Forbidden(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Internal(String),
}

impl ApiError {
    fn status(&self) -> StatusCode {
        match self {
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Forbidden(_) => StatusCode::FORBIDDEN,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status(), Json(ErrorBody { error: self.to_string() })).into_response()
    }
}

/// Failure to restore sessions from the data directory.
#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path} line {line}: {reason}")]
    Log { path: PathBuf, line: usize, reason: String },
}

// ---- wire types ----

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CreateSession {
    pub script_text: String,
    #[serde(default)]
    pub seed: u64,
    /// One starting stack per seat.
    #[serde(default)]
    pub stacks: Option<Vec<u64>>,
    /// Same starting stack for every seat; 100 minimum bets when neither is given.
    #[serde(default)]
    pub stack: Option<u64>,
    /// Button seat name, e.g. `p3`.
    #[serde(default)]
    pub button: Option<String>,
    /// Seats played by the built-in random agent.
    #[serde(default)]
    pub bots: Vec<String>,
    /// Start from this state instead of a freshly dealt round.
    #[serde(default)]
    pub state_text: Option<String>,
    /// Later rounds keep the previous round's final stacks.
    #[serde(default)]
    pub carry_stacks: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
    /// Seat name to token.
    pub tokens: BTreeMap<String, String>,
    pub spectator_token: String,
    /// Needed to export transcripts, which reveal every card.
    pub owner_token: String,
    pub view: View,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionRequest {
    pub token: String,
    pub action: String,
    #[serde(default)]
    pub idempotency_key: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    pub round: usize,
    /// Index of the state the action produced.
    pub step: usize,
    pub player: String,
    pub action: String,
    /// True when this is a repeat of an earlier submission.
    #[serde(default)]
    pub replayed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LegalMove {
    Check,
    Call { amount: u64 },
    RaiseTo { min: u64, max: u64 },
    Fold,
    AllIn,
    Switch { max_cards: usize },
}

impl From<&LegalAction> for LegalMove {
    fn from(l: &LegalAction) -> Self {
        match *l {
            LegalAction::Check => LegalMove::Check,
            LegalAction::Call { amount } => LegalMove::Call { amount },
            LegalAction::RaiseTo { min, max } => LegalMove::RaiseTo { min, max },
            LegalAction::Fold => LegalMove::Fold,
            LegalAction::AllIn => LegalMove::AllIn,
            LegalAction::Switch { max_cards } => LegalMove::Switch { max_cards },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct View {
    pub session: String,
    /// Seat name, or `spectator`.
    pub viewer: String,
    pub round: usize,
    pub step: usize,
    /// Bumped on every change; pass it back as `after` to long-poll.
    pub version: u64,
    pub state_text: String,
    pub prompted: Option<String>,
    /// Empty unless the viewer is the prompted seat.
    pub legal_actions: Vec<LegalMove>,
    pub finished: bool,
    /// Chips paid per seat, once the round is over.
    pub result: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenQuery {
    pub token: String,
    /// Long-poll: wait until the version exceeds this.
    #[serde(default)]
    pub after: Option<u64>,
    #[serde(default)]
    pub wait_ms: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenBody {
    pub token: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Export {
    pub rounds: Vec<TranscriptRecord>,
    pub samples: Vec<NspRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidateRequest {
    pub script_text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Validation {
    pub valid: bool,
    #[serde(default)]
    pub error: Option<String>,
    /// Structured form of a valid script.
    #[serde(default)]
    pub canonical: Option<String>,
    #[serde(default)]
    pub players: Option<u8>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BundledScript {
    pub id: String,
    pub script_text: String,
}

// ---- event log ----

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum LogEvent {
    Create {
        id: String,
        script_text: String,
        seed: u64,
        stacks: Vec<u64>,
        button: usize,
        bots: Vec<usize>,
        tokens: Vec<String>,
        spectator: String,
        owner: String,
        #[serde(default)]
        state_text: Option<String>,
        #[serde(default)]
        carry_stacks: bool,
        at: u64,
    },
    Step {
        round: usize,
        step: usize,
        input: String,
        #[serde(default)]
        key: Option<String>,
        state: String,
        at: u64,
    },
    Round {
        round: usize,
        seed: u64,
        stacks: Vec<u64>,
        button: usize,
        at: u64,
    },
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

// ---- sessions ----

#[derive(Debug, Clone)]
struct Play {
    seed: u64,
    stacks: Vec<u64>,
    /// Began from a supplied state rather than a shuffle.
    from_text: bool,
    states: Vec<GameState>,
    inputs: Vec<Option<PlayerInput>>,
}

impl Play {
    fn last(&self) -> &GameState {
        self.states.last().expect("a round has its initial state")
    }
}

struct Inner {
    rounds: Vec<Play>,
    acks: HashMap<String, Ack>,
    log: Option<File>,
    version: u64,
}

impl Inner {
    fn play(&self) -> &Play {
        self.rounds.last().expect("a session has a round")
    }

    fn record(&mut self, event: &LogEvent) -> Result<(), ApiError> {
        if let Some(f) = &mut self.log {
            let mut line = serde_json::to_vec(event).map_err(|e| ApiError::Internal(e.to_string()))?;
            line.push(b'\n');
            f.write_all(&line).and_then(|_| f.flush()).map_err(|e| ApiError::Internal(format!("event log: {e}")))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Viewer {
    Seat(PlayerId),
    Spectator,
    Owner,
}

pub struct Session {
    id: String,
    script: GameScript,
    script_text: String,
    seed: u64,
    fresh_stacks: Vec<u64>,
    bots: Vec<bool>,
    tokens: Vec<String>,
    spectator: String,
    owner: String,
    carry_stacks: bool,
    inner: Mutex<Inner>,
    tx: watch::Sender<u64>,
}

fn token() -> String {
    uuid::Uuid::new_v4().simple().to_string()
}

impl Session {
    fn viewer(&self, token: &str) -> Result<Viewer, ApiError> {
        if let Some(p) = self.tokens.iter().position(|t| t == token) {
            Ok(Viewer::Seat(p))
        } else if token == self.spectator {
            Ok(Viewer::Spectator)
        } else if token == self.owner {
            Ok(Viewer::Owner)
        } else {
            Err(ApiError::Forbidden("unknown token for this session".into()))
        }
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Applies one transition to the current round and logs it.
    fn push(&self, inner: &mut Inner, input: Option<PlayerInput>, key: Option<String>) -> Result<GameState, ApiError> {
        let play = inner.rounds.last_mut().expect("a session has a round");
        let next = next_state(play.last(), input.as_ref(), &self.script).map_err(|e| ApiError::Conflict(e.to_string()))?;
        play.states.push(next.clone());
        play.inputs.push(input.clone());
        let event = LogEvent::Step {
            round: inner.rounds.len() - 1,
            step: inner.play().states.len() - 1,
            input: input.as_ref().map(serialize_input).unwrap_or_default(),
            key,
            state: serialize_state(&next),
            at: now_ms(),
        };
        inner.record(&event)?;
        inner.version += 1;
        Ok(next)
    }

    /// Runs engine steps and bot turns until a human is prompted or the round ends.
    fn advance(&self, inner: &mut Inner) -> Result<(), ApiError> {
        loop {
            let state = inner.play().last();
            if state.finished() {
                return Ok(());
            }
            let input = match state.prompted() {
                None => None,
                Some((p, _)) if self.bots[p] => Some(PlayerInput::new(p, self.bot_action(state))),
                Some(_) => return Ok(()),
            };
            self.push(inner, input, None)?;
        }
    }

    /// Seeded by the state text, so replays and restarts agree.
    fn bot_action(&self, state: &GameState) -> idge_core::engine::Action {
        let seed = self.seed ^ fnv1a(serialize_state(state).as_bytes());
        let legal = legal_actions(state, &self.script);
        RandomAgent::new(seed).act(state, &self.script, &legal)
    }

    fn notify(&self, inner: &Inner) {
        self.tx.send_replace(inner.version);
    }

    fn view_of(&self, inner: &Inner, viewer: Viewer) -> View {
        let play = inner.play();
        let state = play.last();
        let seat = match viewer {
            Viewer::Seat(p) => Some(p),
            _ => None,
        };
        let text = serialize_state(state);
        let state_text = redact(&text, seat).expect("seat tokens are issued per seat");
        let prompted = state.prompted();
        let legal_actions = match (prompted, seat) {
            (Some((p, _)), Some(s)) if p == s => legal_actions(state, &self.script).iter().map(LegalMove::from).collect(),
            _ => Vec::new(),
        };
        let result = match &state.notice {
            Notice::Payouts(paid) if state.finished() => Some(
                paid.iter()
                    .map(|(p, x)| format!("{} wins {x}.", player_name(*p)))
                    .collect::<Vec<_>>()
                    .join(" "),
            ),
            _ => None,
        };
        View {
            session: self.id.clone(),
            viewer: seat.map(player_name).unwrap_or_else(|| "spectator".into()),
            round: inner.rounds.len() - 1,
            step: play.states.len() - 1,
            version: inner.version,
            state_text,
            prompted: prompted.map(|(p, _)| player_name(p)),
            legal_actions,
            finished: state.finished(),
            result,
        }
    }

    pub fn view(&self, token: &str) -> Result<View, ApiError> {
        let viewer = self.viewer(token)?;
        Ok(self.view_of(&self.lock(), viewer))
    }

    pub fn submit(&self, req: &ActionRequest) -> Result<Ack, ApiError> {
        let player = match self.viewer(&req.token)? {
            Viewer::Seat(p) => p,
            _ => return Err(ApiError::Forbidden("only seated players can act".into())),
        };
        let mut inner = self.lock();
        if let Some(key) = &req.idempotency_key {
            if let Some(ack) = inner.acks.get(key) {
                if ack.player != player_name(player) {
                    return Err(ApiError::Forbidden("idempotency key belongs to another seat".into()));
                }
                return Ok(Ack {
                    replayed: true,
                    ..ack.clone()
                });
            }
        }
        let state = inner.play().last();
        let prompted = match state.prompted() {
            Some((p, _)) => p,
            None if state.finished() => return Err(ApiError::Conflict("the round is over".into())),
            None => return Err(ApiError::Conflict("no player is prompted".into())),
        };
        if prompted != player {
            return Err(ApiError::Forbidden(format!(
                "it is {}'s turn, not {}'s",
                player_name(prompted),
                player_name(player)
            )));
        }
        let action = parse_action(&req.action)
            .ok_or_else(|| ApiError::BadRequest(format!("unrecognized action {:?}", req.action)))?;
        let input = PlayerInput::new(player, action.clone());
        self.push(&mut inner, Some(input), req.idempotency_key.clone())?;
        let ack = Ack {
            round: inner.rounds.len() - 1,
            step: inner.play().states.len() - 1,
            player: player_name(player),
            action: action_text(&action),
            replayed: false,
        };
        if let Some(key) = &req.idempotency_key {
            inner.acks.insert(key.clone(), ack.clone());
        }
        let advanced = self.advance(&mut inner);
        self.notify(&inner);
        advanced?;
        Ok(ack)
    }

    /// Deals the next round once the current one is over.
    pub fn next_round(&self, token: &str) -> Result<View, ApiError> {
        let viewer = self.viewer(token)?;
        if viewer == Viewer::Spectator {
            return Err(ApiError::Forbidden("spectators cannot start rounds".into()));
        }
        let mut inner = self.lock();
        let last = inner.play().last();
        if !last.finished() {
            return Err(ApiError::Conflict("the current round is not over".into()));
        }
        let n = self.fresh_stacks.len();
        let stacks = if self.carry_stacks {
            let s: Vec<u64> = last.seats.iter().map(|s| s.stack + s.bet).collect();
            if let Some(p) = s.iter().position(|&x| x < self.script.min_bet) {
                return Err(ApiError::Conflict(format!("{} cannot cover the minimum bet", player_name(p))));
            }
            s
        } else {
            self.fresh_stacks.clone()
        };
        let button = (last.button + 1) % n;
        let round = inner.rounds.len();
        let seed = round_seed(self.seed, round as u64);
        let first = init_round_at(&self.script, seed, &stacks, button).map_err(|e| ApiError::Conflict(e.to_string()))?;
        inner.record(&LogEvent::Round {
            round,
            seed,
            stacks: stacks.clone(),
            button,
            at: now_ms(),
        })?;
        inner.rounds.push(Play {
            seed,
            stacks,
            from_text: false,
            states: vec![first],
            inputs: Vec::new(),
        });
        inner.version += 1;
        let advanced = self.advance(&mut inner);
        self.notify(&inner);
        advanced?;
        Ok(self.view_of(&inner, viewer))
    }

    pub fn export(&self, token: &str) -> Result<Export, ApiError> {
        if self.viewer(token)? != Viewer::Owner {
            return Err(ApiError::Forbidden("transcripts need the owner token".into()));
        }
        let inner = self.lock();
        let mut rounds = Vec::new();
        let mut samples = Vec::new();
        for (i, play) in inner.rounds.iter().enumerate() {
            let round = Round {
                states: play.states.clone(),
                inputs: play.inputs.clone(),
            };
            let mut t = transcript_of(
                format!("{}-{i}", self.id),
                &self.script.name,
                self.script_text.clone(),
                play.seed,
                play.stacks.clone(),
                &round,
            );
            if play.from_text {
                t.steps.remove(0);
            }
            rounds.push(t);
            let log = RoundLog {
                index: i as u64,
                copy: 0,
                variant: self.script.name.clone(),
                category: round_category(&round, &self.script),
                script: self.script.clone(),
                seed: play.seed,
                stacks: play.stacks.clone(),
                round,
            };
            samples.extend(log.samples_with(&self.script_text, "structured"));
        }
        Ok(Export { rounds, samples })
    }

    pub fn subscribe(&self) -> watch::Receiver<u64> {
        self.tx.subscribe()
    }
}

// ---- registry ----

#[derive(Default)]
pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<Session>>>,
    data_dir: Option<PathBuf>,
}

fn parse_seat(name: &str, n: usize) -> Result<PlayerId, ApiError> {
    parse_player(name)
        .filter(|&p| p < n)
        .ok_or_else(|| ApiError::BadRequest(format!("no seat {name:?}")))
}

fn log_path(dir: &Path, id: &str) -> PathBuf {
    dir.join("sessions").join(format!("{id}.jsonl"))
}

impl AppState {
    pub fn in_memory() -> Arc<Self> {
        Arc::new(Self::default())
    }

    /// Opens `dir` and replays every session log found there.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Arc<Self>, ReplayError> {
        let dir = dir.into();
        let sessions_dir = dir.join("sessions");
        std::fs::create_dir_all(&sessions_dir).map_err(|source| ReplayError::Io {
            path: sessions_dir.clone(),
            source,
        })?;
        let mut sessions = HashMap::new();
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&sessions_dir)
            .map_err(|source| ReplayError::Io {
                path: sessions_dir.clone(),
                source,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            let s = replay(&path)?;
            sessions.insert(s.id.clone(), Arc::new(s));
        }
        Ok(Arc::new(Self {
            sessions: RwLock::new(sessions),
            data_dir: Some(dir),
        }))
    }

    pub fn session(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("no session {id}")))
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut v: Vec<String> = self.sessions.read().unwrap_or_else(|e| e.into_inner()).keys().cloned().collect();
        v.sort();
        v
    }

    pub fn create(&self, req: &CreateSession) -> Result<Created, ApiError> {
        let script = parse_rephrased(&req.script_text).map_err(|e| ApiError::BadRequest(format!("script: {e}")))?;
        let n = script.num_players as usize;
        let mut bots = vec![false; n];
        for b in &req.bots {
            bots[parse_seat(b, n)?] = true;
        }
        let (first, stacks, button, from_text) = match &req.state_text {
            Some(text) => {
                let s = parse_state(text.trim_end(), &script).map_err(|e| ApiError::BadRequest(format!("state: {e}")))?;
                if s.seats.len() != n {
                    return Err(ApiError::BadRequest("state and script disagree on the number of players".into()));
                }
                let stacks = s.seats.iter().map(|x| x.stack + x.bet).collect();
                let button = s.button;
                (s, stacks, button, true)
            }
            None => {
                let stacks = match (&req.stacks, req.stack) {
                    (Some(v), _) => v.clone(),
                    (None, Some(x)) => vec![x; n],
                    (None, None) => vec![script.min_bet * 100; n],
                };
                let button = match &req.button {
                    Some(b) => parse_seat(b, n)?,
                    None => idge_core::engine::default_button(n),
                };
                let s = init_round_at(&script, req.seed, &stacks, button).map_err(|e| ApiError::BadRequest(e.to_string()))?;
                (s, stacks, button, false)
            }
        };
        let id = token();
        let tokens: Vec<String> = (0..n).map(|_| token()).collect();
        let (spectator, owner) = (token(), token());
        let log = match &self.data_dir {
            Some(dir) => {
                let path = log_path(dir, &id);
                if let Some(parent) = path.parent() {
                    std::fs::create_dir_all(parent).map_err(|e| ApiError::Internal(e.to_string()))?;
                }
                Some(File::create(&path).map_err(|e| ApiError::Internal(format!("{}: {e}", path.display())))?)
            }
            None => None,
        };
        let session = Session {
            id: id.clone(),
            script_text: req.script_text.clone(),
            seed: req.seed,
            fresh_stacks: stacks.clone(),
            bots: bots.clone(),
            tokens: tokens.clone(),
            spectator: spectator.clone(),
            owner: owner.clone(),
            carry_stacks: req.carry_stacks,
            inner: Mutex::new(Inner {
                rounds: vec![Play {
                    seed: req.seed,
                    stacks: stacks.clone(),
                    from_text,
                    states: vec![first],
                    inputs: Vec::new(),
                }],
                acks: HashMap::new(),
                log,
                version: 0,
            }),
            tx: watch::channel(0).0,
            script,
        };
        let view = {
            let mut inner = session.lock();
            inner.record(&LogEvent::Create {
                id: id.clone(),
                script_text: req.script_text.clone(),
                seed: req.seed,
                stacks,
                button,
                bots: (0..n).filter(|&p| bots[p]).collect(),
                tokens: tokens.clone(),
                spectator: spectator.clone(),
                owner: owner.clone(),
                state_text: req.state_text.clone(),
                carry_stacks: req.carry_stacks,
                at: now_ms(),
            })?;
            session.advance(&mut inner)?;
            session.notify(&inner);
            session.view_of(&inner, Viewer::Spectator)
        };
        self.sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(id.clone(), Arc::new(session));
        Ok(Created {
            id,
            tokens: tokens.into_iter().enumerate().map(|(p, t)| (player_name(p), t)).collect(),
            spectator_token: spectator,
            owner_token: owner,
            view,
        })
    }
}

/// Rebuilds a session from its log, checking every logged state against the engine.
fn replay(path: &Path) -> Result<Session, ReplayError> {
    let text = std::fs::read_to_string(path).map_err(|source| ReplayError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let bad = |line: usize, reason: String| ReplayError::Log {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or_else(|| bad(1, "empty log".into()))?;
    let session = match serde_json::from_str(head).map_err(|e| bad(1, e.to_string()))? {
        LogEvent::Create {
            id,
            script_text,
            seed,
            stacks,
            button,
            bots,
            tokens,
            spectator,
            owner,
            state_text,
            carry_stacks,
            ..
        } => {
            let script = parse_rephrased(&script_text).map_err(|e| bad(1, e.to_string()))?;
            let first = match &state_text {
                Some(t) => parse_state(t.trim_end(), &script).map_err(|e| bad(1, e.to_string()))?,
                None => init_round_at(&script, seed, &stacks, button).map_err(|e| bad(1, e.to_string()))?,
            };
            let n = script.num_players as usize;
            let mut bot_seats = vec![false; n];
            for b in bots.into_iter().filter(|&b| b < n) {
                bot_seats[b] = true;
            }
            Session {
                id,
                script_text,
                seed,
                fresh_stacks: stacks.clone(),
                bots: bot_seats,
                tokens,
                spectator,
                owner,
                carry_stacks,
                inner: Mutex::new(Inner {
                    rounds: vec![Play {
                        seed,
                        stacks,
                        from_text: state_text.is_some(),
                        states: vec![first],
                        inputs: Vec::new(),
                    }],
                    acks: HashMap::new(),
                    log: None,
                    version: 0,
                }),
                tx: watch::channel(0).0,
                script,
            }
        }
        _ => return Err(bad(1, "log does not start with a create event".into())),
    };
    {
        let mut inner = session.lock();
        for (i, line) in lines {
            let ln = i + 1;
            match serde_json::from_str(line).map_err(|e| bad(ln, e.to_string()))? {
                LogEvent::Step {
                    round,
                    step,
                    input,
                    key,
                    state,
                    ..
                } => {
                    if round + 1 != inner.rounds.len() || step != inner.play().states.len() {
                        return Err(bad(ln, format!("out-of-order step {round}/{step}")));
                    }
                    let input = if input.is_empty() {
                        None
                    } else {
                        Some(parse_input(&input).map_err(|e| bad(ln, e.to_string()))?)
                    };
                    let next = next_state(inner.play().last(), input.as_ref(), &session.script)
                        .map_err(|e| bad(ln, e.to_string()))?;
                    if serialize_state(&next) != state {
                        return Err(bad(ln, "logged state differs from the engine's".into()));
                    }
                    if let (Some(key), Some(inp)) = (key, &input) {
                        let ack = Ack {
                            round,
                            step,
                            player: player_name(inp.player),
                            action: action_text(&inp.action),
                            replayed: false,
                        };
                        inner.acks.insert(key, ack);
                    }
                    let play = inner.rounds.last_mut().expect("non-empty");
                    play.states.push(next);
                    play.inputs.push(input);
                }
                LogEvent::Round {
                    round,
                    seed,
                    stacks,
                    button,
                    ..
                } => {
                    if round != inner.rounds.len() {
                        return Err(bad(ln, format!("out-of-order round {round}")));
                    }
                    let first = init_round_at(&session.script, seed, &stacks, button).map_err(|e| bad(ln, e.to_string()))?;
                    inner.rounds.push(Play {
                        seed,
                        stacks,
                        from_text: false,
                        states: vec![first],
                        inputs: Vec::new(),
                    });
                }
                LogEvent::Create { .. } => return Err(bad(ln, "second create event".into())),
            }
            inner.version += 1;
        }
        inner.log = Some(
            OpenOptions::new()
                .append(true)
                .open(path)
                .map_err(|source| ReplayError::Io {
                    path: path.to_path_buf(),
                    source,
                })?,
        );
        // A crash between an action and the bot turns after it leaves work to finish.
        session.advance(&mut inner).map_err(|e| bad(0, e.to_string()))?;
        session.notify(&inner);
    }
    Ok(session)
}

// ---- handlers ----

type Shared = Arc<AppState>;

async fn create_session(State(app): State<Shared>, Json(req): Json<CreateSession>) -> Result<Json<Created>, ApiError> {
    Ok(Json(app.create(&req)?))
}

async fn get_view(
    State(app): State<Shared>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<TokenQuery>,
) -> Result<Json<View>, ApiError> {
    let session = app.session(&id)?;
    let view = session.view(&q.token)?;
    let after = match q.after {
        Some(a) if view.version <= a => a,
        _ => return Ok(Json(view)),
    };
    let wait = Duration::from_millis(q.wait_ms.unwrap_or(DEFAULT_WAIT_MS).min(MAX_WAIT_MS));
    let mut rx = session.subscribe();
    let _ = tokio::time::timeout(wait, rx.wait_for(|v| *v > after)).await;
    Ok(Json(session.view(&q.token)?))
}

async fn post_action(
    State(app): State<Shared>,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<ActionRequest>,
) -> Result<Json<Ack>, ApiError> {
    Ok(Json(app.session(&id)?.submit(&req)?))
}

async fn post_round(
    State(app): State<Shared>,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<TokenBody>,
) -> Result<Json<View>, ApiError> {
    Ok(Json(app.session(&id)?.next_round(&req.token)?))
}

async fn get_transcript(
    State(app): State<Shared>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<TokenQuery>,
) -> Result<Json<Export>, ApiError> {
    Ok(Json(app.session(&id)?.export(&q.token)?))
}

async fn get_events(
    State(app): State<Shared>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<TokenQuery>,
) -> Result<Sse<impl Stream<Item = Result<SseEvent, Infallible>>>, ApiError> {
    let session = app.session(&id)?;
    session.view(&q.token)?;
    let token = q.token;
    let stream = WatchStream::new(session.subscribe()).filter_map(move |_| {
        let view = session.view(&token).ok()?;
        SseEvent::default().event("view").json_data(view).ok().map(Ok)
    });
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

async fn validate_script(Json(req): Json<ValidateRequest>) -> Json<Validation> {
    Json(match parse_rephrased(&req.script_text) {
        Ok(s) => Validation {
            valid: true,
            error: None,
            canonical: Some(serialize_script(&s)),
            players: Some(s.num_players),
        },
        Err(e) => Validation {
            valid: false,
            error: Some(e.to_string()),
            canonical: None,
            players: None,
        },
    })
}

async fn list_scripts() -> Json<Vec<BundledScript>> {
    Json(
        variants::STANDARD
            .iter()
            .chain(variants::OUT_OF_DOMAIN.iter())
            .map(|b| BundledScript {
                id: b.id.to_string(),
                script_text: b.text.to_string(),
            })
            .collect(),
    )
}

pub fn router(app: Shared) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/view", get(get_view))
        .route("/sessions/{id}/actions", post(post_action))
        .route("/sessions/{id}/rounds", post(post_round))
        .route("/sessions/{id}/transcript", get(get_transcript))
        .route("/sessions/{id}/events", get(get_events))
        .route("/scripts", get(list_scripts))
        .route("/scripts/validate", post(validate_script))
        .route("/healthz", get(|| async { "ok" }))
        .with_state(app)
}

/// Serves until ctrl-c.
pub async fn serve(addr: &str, app: Shared) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(app))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
