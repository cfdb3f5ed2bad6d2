//! Shared episode model: environment tags, actions and their text grammar,
//! verifier verdicts, and trajectories.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minesweeper::{mine_flag, mine_initial, mine_reveal, MineBoard, MineConfig};
use crate::oracle::search::{SearchStats, SearchVerdictConfig};
use crate::sudoku::{sudoku_apply, sudoku_generate, sudoku_legal, SudokuEpisode};
use crate::tictactoe::{ttt_apply, ttt_initial, ttt_legal, TttState};

pub const TRAJECTORY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    TicTacToe,
    Sudoku,
    Minesweeper,
}

impl EnvKind {
    pub const ALL: [EnvKind; 3] = [EnvKind::TicTacToe, EnvKind::Sudoku, EnvKind::Minesweeper];

    pub fn as_str(self) -> &'static str {
        match self {
            EnvKind::TicTacToe => "tictactoe",
            EnvKind::Sudoku => "sudoku",
            EnvKind::Minesweeper => "minesweeper",
        }
    }

    /// Maximum number of agent turns per episode.
    pub fn horizon(self) -> usize {
        match self {
            EnvKind::TicTacToe => 9,
            EnvKind::Sudoku => 40,
            EnvKind::Minesweeper => 60,
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tictactoe" | "tic-tac-toe" | "ttt" => Ok(EnvKind::TicTacToe),
            "sudoku" => Ok(EnvKind::Sudoku),
            "minesweeper" => Ok(EnvKind::Minesweeper),
            other => Err(Error::InvalidArgument(format!("unknown environment {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mark {
    X,
    O,
}

impl Mark {
    pub fn other(self) -> Mark {
        match self {
            Mark::X => Mark::O,
            Mark::O => Mark::X,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Mark::X => 'X',
            Mark::O => 'O',
        }
    }
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// One agent move. Sudoku coordinates are 1-indexed, the others 0-indexed,
/// exactly as they appear in the action strings shown to agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Action {
    Place { mark: Mark, row: u8, col: u8 },
    Fill { row: u8, col: u8, digit: u8 },
    Reveal { row: u8, col: u8 },
    Flag { row: u8, col: u8 },
}

impl Action {
    pub fn env(&self) -> EnvKind {
        match self {
            Action::Place { .. } => EnvKind::TicTacToe,
            Action::Fill { .. } => EnvKind::Sudoku,
            Action::Reveal { .. } | Action::Flag { .. } => EnvKind::Minesweeper,
        }
    }

    /// The canonical response an agent would emit for this action.
    pub fn to_answer(&self) -> String {
        format!("<answer>{self}</answer>")
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Place { mark, row, col } => write!(f, "<{mark}({row},{col})>"),
            Action::Fill { row, col, digit } => write!(f, "<fill({row},{col},{digit})>"),
            Action::Reveal { row, col } => write!(f, "<reveal({row},{col})>"),
            Action::Flag { row, col } => write!(f, "<flag({row},{col})>"),
        }
    }
}

impl From<Action> for String {
    fn from(a: Action) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for Action {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for Action {
    type Err = Error;

    /// Parses a bare action token such as `<fill(1,2,3)>`. Ranges are not
    /// checked here; see [`parse_action`].
    fn from_str(s: &str) -> Result<Self> {
        parse_token(s.trim())
    }
}

const ANSWER_OPEN: &str = "<answer>";
const ANSWER_CLOSE: &str = "</answer>";

fn parse_coord(raw: &str) -> Result<u8> {
    let raw = raw.trim();
    if raw.is_empty() || !raw.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Format(format!("expected a non-negative integer, got {raw:?}")));
    }
    // Digits only, so the only failure left is overflow.
    let value: u64 = raw
        .parse()
        .map_err(|_| Error::OutOfRange(format!("{raw} is too large")))?;
    u8::try_from(value).map_err(|_| Error::OutOfRange(format!("{value} is too large")))
}

fn parse_token(token: &str) -> Result<Action> {
    let body = token
        .strip_prefix('<')
        .and_then(|t| t.strip_suffix('>'))
        .ok_or_else(|| Error::Format(format!("action {token:?} is not of the form <...>")))?;
    let (name, rest) = body
        .split_once('(')
        .ok_or_else(|| Error::Format(format!("action {token:?} has no argument list")))?;
    let args = rest
        .strip_suffix(')')
        .ok_or_else(|| Error::Format(format!("action {token:?} has an unterminated argument list")))?;
    let args: Vec<&str> = args.split(',').collect();
    let arity = |n: usize| -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(Error::Format(format!("{name} takes {n} arguments, got {}", args.len())))
        }
    };
    let action = match name.trim() {
        "X" | "O" => {
            arity(2)?;
            let mark = if name.trim() == "X" { Mark::X } else { Mark::O };
            Action::Place {
                mark,
                row: parse_coord(args[0])?,
                col: parse_coord(args[1])?,
            }
        }
        "fill" => {
            arity(3)?;
            Action::Fill {
                row: parse_coord(args[0])?,
                col: parse_coord(args[1])?,
                digit: parse_coord(args[2])?,
            }
        }
        "reveal" => {
            arity(2)?;
            Action::Reveal {
                row: parse_coord(args[0])?,
                col: parse_coord(args[1])?,
            }
        }
        "flag" => {
            arity(2)?;
            Action::Flag {
                row: parse_coord(args[0])?,
                col: parse_coord(args[1])?,
            }
        }
        other => return Err(Error::Format(format!("unknown action {other:?}"))),
    };
    Ok(action)
}

fn check_range(action: &Action) -> Result<()> {
    let ok = match *action {
        Action::Place { row, col, .. } => row <= 2 && col <= 2,
        Action::Fill { row, col, digit } => {
            (1..=9).contains(&row) && (1..=9).contains(&col) && (1..=9).contains(&digit)
        }
        Action::Reveal { row, col } | Action::Flag { row, col } => row <= 4 && col <= 4,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("{action} is outside the {} board", action.env())))
    }
}

/// Extracts the single action inside an `<answer>…</answer>` wrapper.
///
/// Reasoning text before the wrapper is ignored. Anything other than
/// whitespace after the closing tag, a second wrapper, or a token that is not
/// an action of `env` is a [`Error::Format`]; coordinates or digits outside
/// the environment's board are [`Error::OutOfRange`].
pub fn parse_action(text: &str, env: EnvKind) -> Result<Action> {
    let opens = text.matches(ANSWER_OPEN).count();
    if opens == 0 {
        return Err(Error::Format("no <answer> wrapper".into()));
    }
    if opens > 1 || text.matches(ANSWER_CLOSE).count() > 1 {
        return Err(Error::Format("more than one <answer> wrapper".into()));
    }
    let start = text.find(ANSWER_OPEN).unwrap() + ANSWER_OPEN.len();
    let end = text[start..]
        .find(ANSWER_CLOSE)
        .map(|i| start + i)
        .ok_or_else(|| Error::Format("unterminated <answer> wrapper".into()))?;
    if !text[end + ANSWER_CLOSE.len()..].trim().is_empty() {
        return Err(Error::Format("text after </answer>".into()));
    }
    let action = parse_token(text[start..end].trim())?;
    if action.env() != env {
        return Err(Error::Format(format!("{action} is not a {env} action")));
    }
    check_range(&action)?;
    Ok(action)
}

/// Diagnostic payload attached to a verdict. Externally tagged: internally
/// tagged enums cannot carry the `u128` configuration counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMeta {
    Search(SearchStats),
    Posterior {
        config_count: u128,
        /// Mine-membership count of the chosen cell, when the action targets one.
        membership: Option<u128>,
    },
    Constraint {
        expected_digit: u8,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifierVerdict {
    pub valid: bool,
    pub oracle_valid_set: Vec<Action>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_meta: Option<OracleMeta>,
}

impl VerifierVerdict {
    /// Verdict for `action` given the oracle-valid set; `valid` is set-membership.
    pub fn from_set(action: &Action, mut set: Vec<Action>, meta: Option<OracleMeta>) -> Self {
        set.sort();
        set.dedup();
        VerifierVerdict {
            valid: set.binary_search(action).is_ok(),
            oracle_valid_set: set,
            oracle_meta: meta,
        }
    }

    pub fn reward(&self) -> u8 {
        u8::from(self.valid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub turn_index: u32,
    pub observation_text: String,
    pub action: Action,
    pub verdict: Option<VerifierVerdict>,
    pub reward_vpr: u8,
    /// Reward under the episode's reward mode (equal to `reward_vpr` in VPR mode).
    pub reward: f64,
    pub terminal: bool,
    /// Tic-Tac-Toe only: the opponent's reply after this turn, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opponent_action: Option<Action>,
}

/// What is needed, together with the trajectory seed, to rebuild the initial state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "env", rename_all = "lowercase")]
pub enum EpisodeSetup {
    TicTacToe {
        protagonist: Mark,
        /// Opponent moves played before the agent's first turn.
        #[serde(default)]
        opening: Vec<Action>,
    },
    Sudoku {
        blanks: usize,
    },
    Minesweeper(MineConfig),
}

impl EpisodeSetup {
    pub fn kind(&self) -> EnvKind {
        match self {
            EpisodeSetup::TicTacToe { .. } => EnvKind::TicTacToe,
            EpisodeSetup::Sudoku { .. } => EnvKind::Sudoku,
            EpisodeSetup::Minesweeper(_) => EnvKind::Minesweeper,
        }
    }

    pub fn default_for(env: EnvKind) -> Self {
        match env {
            EnvKind::TicTacToe => EpisodeSetup::TicTacToe {
                protagonist: Mark::X,
                opening: Vec::new(),
            },
            EnvKind::Sudoku => EpisodeSetup::Sudoku { blanks: 40 },
            EnvKind::Minesweeper => EpisodeSetup::Minesweeper(MineConfig::default()),
        }
    }

    pub fn protagonist(&self) -> Option<Mark> {
        match self {
            EpisodeSetup::TicTacToe { protagonist, .. } => Some(*protagonist),
            _ => None,
        }
    }

    /// Initial environment state for `seed`.
    pub fn initial_state(&self, seed: u64) -> Result<EnvState> {
        Ok(match self {
            EpisodeSetup::TicTacToe { opening, .. } => {
                let mut s = ttt_initial();
                for a in opening {
                    s = ttt_apply(&s, a)?;
                }
                EnvState::TicTacToe(s)
            }
            EpisodeSetup::Sudoku { blanks } => EnvState::Sudoku(sudoku_generate(seed, *blanks)?),
            EpisodeSetup::Minesweeper(cfg) => EnvState::Minesweeper(mine_initial(seed, cfg)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub success: bool,
    /// Game-theoretic return for Tic-Tac-Toe, `I(success)` otherwise.
    #[serde(rename = "return")]
    pub ret: f64,
    pub completion_rate: f64,
    /// The episode ended because a response could not be parsed or was illegal.
    #[serde(default)]
    pub forfeit: bool,
    /// The episode hit the horizon before reaching a terminal state.
    #[serde(default)]
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub schema_version: u32,
    pub env: EnvKind,
    pub seed: u64,
    pub setup: EpisodeSetup,
    pub turns: Vec<TurnRecord>,
    pub outcome: Option<Outcome>,
    /// Search settings behind Tic-Tac-Toe verdicts; turn `t` searched with
    /// seed `derive(verifier.seed, t)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verifier: Option<SearchVerdictConfig>,
}

impl Trajectory {
    pub fn new(seed: u64, setup: EpisodeSetup) -> Self {
        Trajectory {
            schema_version: TRAJECTORY_SCHEMA_VERSION,
            env: setup.kind(),
            seed,
            setup,
            turns: Vec::new(),
            outcome: None,
            verifier: None,
        }
    }

    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }

    /// Closed either by a terminal turn or by an outcome recorded without one
    /// (forfeit, horizon).
    pub fn is_terminal(&self) -> bool {
        self.outcome.is_some() || self.turns.last().is_some_and(|t| t.terminal)
    }

    /// Rebuilds the state seen before each agent turn, and the state after the last.
    pub fn replay(&self) -> Result<Replay> {
        let mut state = self
            .setup
            .initial_state(self.seed)
            .map_err(|e| Error::Replay(format!("initial state: {e}")))?;
        let mut decision_states = Vec::with_capacity(self.turns.len());
        for rec in &self.turns {
            decision_states.push(state.clone());
            state = state
                .apply(&rec.action)
                .map_err(|e| Error::Replay(format!("turn {}: {e}", rec.turn_index)))?;
            if let Some(reply) = &rec.opponent_action {
                state = state
                    .apply(reply)
                    .map_err(|e| Error::Replay(format!("turn {} reply: {e}", rec.turn_index)))?;
            }
        }
        Ok(Replay {
            decision_states,
            final_state: state,
        })
    }
}

pub struct Replay {
    /// `decision_states[t]` is the state the agent acted on at turn `t + 1`.
    pub decision_states: Vec<EnvState>,
    pub final_state: EnvState,
}

/// Appends `rec`, which must carry the next turn index, to an open trajectory.
pub fn append_turn(mut traj: Trajectory, rec: TurnRecord) -> Result<Trajectory> {
    if traj.is_terminal() {
        return Err(Error::Sequence("trajectory is already terminal".into()));
    }
    let expected = traj.turns.len() as u32 + 1;
    if rec.turn_index != expected {
        return Err(Error::Sequence(format!(
            "expected turn {expected}, got {}",
            rec.turn_index
        )));
    }
    traj.turns.push(rec);
    Ok(traj)
}

/// State of any of the three environments.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum EnvState {
    TicTacToe(TttState),
    Sudoku(SudokuEpisode),
    Minesweeper(MineBoard),
}

impl EnvState {
    pub fn kind(&self) -> EnvKind {
        match self {
            EnvState::TicTacToe(_) => EnvKind::TicTacToe,
            EnvState::Sudoku(_) => EnvKind::Sudoku,
            EnvState::Minesweeper(_) => EnvKind::Minesweeper,
        }
    }

    pub fn is_terminal(&self) -> bool {
        match self {
            EnvState::TicTacToe(s) => s.is_terminal(),
            EnvState::Sudoku(ep) => ep.is_terminal(),
            EnvState::Minesweeper(b) => b.is_terminal(),
        }
    }

    /// Legal actions; empty for terminal states.
    pub fn legal_actions(&self) -> Vec<Action> {
        match self {
            EnvState::TicTacToe(s) => ttt_legal(s).unwrap_or_default(),
            EnvState::Sudoku(ep) => sudoku_legal(ep),
            EnvState::Minesweeper(b) => b.legal_actions(),
        }
    }

    pub fn apply(&self, action: &Action) -> Result<EnvState> {
        match (self, action) {
            (EnvState::TicTacToe(s), _) => ttt_apply(s, action).map(EnvState::TicTacToe),
            (EnvState::Sudoku(ep), _) => sudoku_apply(ep, action).map(EnvState::Sudoku),
            (EnvState::Minesweeper(b), Action::Reveal { row, col }) => {
                mine_reveal(b, *row as usize, *col as usize).map(EnvState::Minesweeper)
            }
            (EnvState::Minesweeper(b), Action::Flag { row, col }) => {
                mine_flag(b, *row as usize, *col as usize).map(EnvState::Minesweeper)
            }
            (EnvState::Minesweeper(_), _) => {
                Err(Error::IllegalMove(format!("{action} is not a minesweeper move")))
            }
        }
    }

    /// Tic-Tac-Toe only: the mark whose turn it is.
    pub fn to_move(&self) -> Option<Mark> {
        match self {
            EnvState::TicTacToe(s) => Some(s.to_move()),
            _ => None,
        }
    }

    pub fn render(&self) -> String {
        crate::render::render_observation(self)
    }
}
