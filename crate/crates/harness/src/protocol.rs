//! The episode wire protocol: newline-delimited JSON frames, one response per
//! request, and the session table behind them.
//!
//! Requests carry `"type"` ∈ {`reset`, `step`, `close`}; responses carry
//! `"type"` ∈ {`reset`, `step`, `result`, `closed`, `error`}. A `step` whose response
//! text does not parse, or names an illegal action, forfeits the episode and
//! is answered with a `result` frame carrying the reason.
//!
//! ```text
//! → {"type":"reset","env":"tictactoe","seed":1}
//! ← {"type":"reset","session":"…","observation":"...\n...\n...","legal_actions":["<X(0,0)>",…],…}
//! → {"type":"step","session":"…","action":"<answer><X(1,1)></answer>"}
//! ← {"type":"step","session":"…","turn":{…},"reward":1.0,"terminal":false,…}
//! ```

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use vpr_core::game::{parse_action, EnvKind, Outcome, TurnRecord, VerifierVerdict};
use vpr_core::minesweeper::MineConfig;
use vpr_core::oracle::search::SearchVerdictConfig;
use vpr_core::reward::RewardMode;

use crate::episode::{Episode, EpisodeConfig, Seat, StepReport};
use crate::policies::ScriptedPolicy;
use crate::prompt;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Request {
    /// Starts an episode. With `session`, replaces that session's episode.
    Reset {
        #[serde(default)]
        session: Option<String>,
        env: EnvKind,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        reward_mode: Option<RewardMode>,
        #[serde(default)]
        seat: Option<Seat>,
        #[serde(default)]
        opponent: Option<ScriptedPolicy>,
        #[serde(default)]
        verifier: Option<SearchVerdictConfig>,
        #[serde(default)]
        mines: Option<MineConfig>,
        #[serde(default)]
        sudoku_blanks: Option<usize>,
    },
    /// Submits raw agent response text.
    Step { session: String, action: String },
    Close { session: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    BadRequest,
    SessionNotFound,
    EpisodeOver,
    InvalidConfig,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Response {
    Reset {
        session: String,
        env: EnvKind,
        seed: u64,
        reward_mode: RewardMode,
        /// The agent's mark in Tic-Tac-Toe.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mark: Option<char>,
        observation: String,
        legal_actions: Vec<String>,
        system_prompt: String,
        prompt: String,
    },
    Step {
        session: String,
        turn: TurnRecord,
        verdict: Option<VerifierVerdict>,
        /// Reward known at this point (VPR mode); 0 otherwise until the result frame.
        reward: f64,
        terminal: bool,
        observation: String,
        legal_actions: Vec<String>,
        prompt: String,
    },
    /// The episode ended, by its last step or by forfeit.
    Result {
        session: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        turn: Option<TurnRecord>,
        outcome: Outcome,
        /// Final per-turn rewards under the session's reward mode.
        rewards: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        forfeit_reason: Option<String>,
        observation: String,
    },
    Closed {
        session: String,
    },
    Error {
        code: ErrorCode,
        message: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        session: Option<String>,
    },
}

impl Response {
    fn error(code: ErrorCode, message: impl Into<String>, session: Option<&str>) -> Self {
        Response::Error {
            code,
            message: message.into(),
            session: session.map(str::to_owned),
        }
    }

    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).unwrap_or_else(|e| {
            format!(r#"{{"type":"error","code":"internal","message":"encoding failed: {e}"}}"#)
        });
        s.push('\n');
        s
    }
}

/// Server-side defaults applied to reset requests that omit a field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionDefaults {
    pub reward_mode: RewardMode,
    pub opponent: ScriptedPolicy,
    pub verifier: SearchVerdictConfig,
    pub idle_timeout_secs: u64,
    pub max_sessions: usize,
}

impl Default for SessionDefaults {
    fn default() -> Self {
        SessionDefaults {
            reward_mode: RewardMode::Vpr,
            opponent: ScriptedPolicy::mcts(10_000),
            verifier: SearchVerdictConfig::default(),
            idle_timeout_secs: 600,
            max_sessions: 4096,
        }
    }
}

struct Session {
    episode: Episode,
    last_active: Instant,
}

type SessionCell = Arc<Mutex<Session>>;

/// Live sessions. Each session sits behind its own lock, so a slow step in
/// one session never blocks another.
pub struct SessionManager {
    defaults: SessionDefaults,
    sessions: Mutex<HashMap<String, SessionCell>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    // A panic while holding a session lock is caught per request; the data is
    // still structurally valid, so recover rather than poison every later call.
    m.lock().unwrap_or_else(|p| p.into_inner())
}

impl SessionManager {
    pub fn new(defaults: SessionDefaults) -> Self {
        SessionManager {
            defaults,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    pub fn defaults(&self) -> &SessionDefaults {
        &self.defaults
    }

    fn timeout(&self) -> Duration {
        Duration::from_secs(self.defaults.idle_timeout_secs)
    }

    pub fn len(&self) -> usize {
        lock(&self.sessions).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops sessions idle for longer than the timeout; returns how many.
    pub fn sweep(&self) -> usize {
        self.sweep_at(Instant::now())
    }

    pub fn sweep_at(&self, now: Instant) -> usize {
        let timeout = self.timeout();
        let mut table = lock(&self.sessions);
        let before = table.len();
        table.retain(|_, cell| match cell.try_lock() {
            Ok(s) => now.saturating_duration_since(s.last_active) <= timeout,
            // Busy sessions are not idle.
            Err(_) => true,
        });
        before - table.len()
    }

    /// Parses and handles one frame. Never panics.
    pub fn handle_line(&self, line: &str) -> Response {
        match serde_json::from_str::<Request>(line) {
            Ok(req) => self.handle(req),
            Err(e) => Response::error(ErrorCode::BadRequest, format!("malformed frame: {e}"), None),
        }
    }

    pub fn handle_bytes(&self, bytes: &[u8]) -> Response {
        match std::str::from_utf8(bytes) {
            Ok(s) => self.handle_line(s),
            Err(e) => Response::error(ErrorCode::BadRequest, format!("frame is not UTF-8: {e}"), None),
        }
    }

    pub fn handle(&self, req: Request) -> Response {
        let session = match &req {
            Request::Reset { session, .. } => session.clone(),
            Request::Step { session, .. } | Request::Close { session } => Some(session.clone()),
        };
        catch_unwind(AssertUnwindSafe(|| self.dispatch(req))).unwrap_or_else(|_| {
            Response::error(ErrorCode::Internal, "request handler panicked", session.as_deref())
        })
    }

    fn dispatch(&self, req: Request) -> Response {
        match req {
            Request::Reset {
                session,
                env,
                seed,
                reward_mode,
                seat,
                opponent,
                verifier,
                mines,
                sudoku_blanks,
            } => {
                let mut cfg = EpisodeConfig::new(env, seed);
                cfg.reward_mode = reward_mode.unwrap_or(self.defaults.reward_mode);
                cfg.seat = seat.unwrap_or_default();
                cfg.verifier = verifier.unwrap_or(self.defaults.verifier);
                if let Some(m) = mines {
                    cfg.mines = m;
                }
                if let Some(b) = sudoku_blanks {
                    cfg.sudoku_blanks = b;
                }
                let opponent = opponent.unwrap_or_else(|| self.defaults.opponent.clone());
                self.reset(session, cfg, &opponent)
            }
            Request::Step { session, action } => self.step(&session, &action),
            Request::Close { session } => match lock(&self.sessions).remove(&session) {
                Some(_) => Response::Closed { session },
                None => Response::error(ErrorCode::SessionNotFound, "no such session", Some(&session)),
            },
        }
    }

    fn lookup(&self, id: &str) -> Option<SessionCell> {
        let mut table = lock(&self.sessions);
        let cell = table.get(id)?.clone();
        // Expire lazily too, so an idle session is gone even between sweeps.
        let idle = cell
            .try_lock()
            .map(|s| s.last_active.elapsed() > self.timeout())
            .unwrap_or(false);
        if idle {
            table.remove(id);
            return None;
        }
        Some(cell)
    }

    fn reset(&self, id: Option<String>, cfg: EpisodeConfig, opponent: &ScriptedPolicy) -> Response {
        let sid = id.as_deref();
        if let Err(e) = opponent.validate() {
            return Response::error(ErrorCode::InvalidConfig, e.to_string(), sid);
        }
        let existing = match &id {
            Some(id) => match self.lookup(id) {
                Some(cell) => Some(cell),
                None => return Response::error(ErrorCode::SessionNotFound, "no such session", sid),
            },
            None => None,
        };
        let episode = match Episode::start(cfg.clone(), opponent.build(cfg.policy_seed())) {
            Ok(ep) => ep,
            Err(e) => return Response::error(ErrorCode::InvalidConfig, e.to_string(), sid),
        };
        let frame_for = |id: &str, ep: &Episode| Response::Reset {
            session: id.to_owned(),
            env: cfg.env,
            seed: cfg.seed,
            reward_mode: cfg.reward_mode,
            mark: ep.protagonist().map(|m| m.as_char()),
            observation: ep.observation(),
            legal_actions: action_strings(ep),
            system_prompt: prompt::system_prompt(cfg.env).to_owned(),
            prompt: prompt::user_prompt(ep.state(), ep.protagonist()),
        };
        match existing {
            Some(cell) => {
                let id = id.expect("existing session has an id");
                let mut s = lock(&cell);
                let frame = frame_for(&id, &episode);
                s.episode = episode;
                s.last_active = Instant::now();
                frame
            }
            None => {
                let mut table = lock(&self.sessions);
                if table.len() >= self.defaults.max_sessions {
                    return Response::error(ErrorCode::InvalidConfig, "session limit reached", None);
                }
                let id = uuid::Uuid::new_v4().to_string();
                let frame = frame_for(&id, &episode);
                table.insert(
                    id,
                    Arc::new(Mutex::new(Session {
                        episode,
                        last_active: Instant::now(),
                    })),
                );
                frame
            }
        }
    }

    fn step(&self, id: &str, text: &str) -> Response {
        let Some(cell) = self.lookup(id) else {
            return Response::error(ErrorCode::SessionNotFound, "no such session", Some(id));
        };
        let mut s = lock(&cell);
        s.last_active = Instant::now();
        let ep = &mut s.episode;
        if ep.is_over() {
            return Response::error(ErrorCode::EpisodeOver, "episode is over; send reset", Some(id));
        }
        let report = match parse_action(text, ep.config().env) {
            Ok(action) => ep.step(action),
            Err(e) => ep.forfeit(format!("malformed response: {e}")),
        };
        match report {
            Ok(r) => step_frame(id, ep, r),
            Err(e) => Response::error(ErrorCode::Internal, e.to_string(), Some(id)),
        }
    }
}

fn action_strings(ep: &Episode) -> Vec<String> {
    ep.legal_actions().iter().map(ToString::to_string).collect()
}

fn step_frame(id: &str, ep: &Episode, r: StepReport) -> Response {
    match (r.outcome, r.turn) {
        (Some(outcome), turn) => Response::Result {
            session: id.to_owned(),
            turn,
            outcome,
            rewards: ep.trajectory().turns.iter().map(|t| t.reward).collect(),
            forfeit_reason: r.forfeit_reason,
            observation: ep.observation(),
        },
        (None, Some(turn)) => Response::Step {
            session: id.to_owned(),
            verdict: turn.verdict.clone(),
            reward: turn.reward,
            terminal: turn.terminal,
            turn,
            observation: ep.observation(),
            legal_actions: action_strings(ep),
            prompt: prompt::user_prompt(ep.state(), ep.protagonist()),
        },
        (None, None) => Response::error(ErrorCode::Internal, "step produced nothing", Some(id)),
    }
}
