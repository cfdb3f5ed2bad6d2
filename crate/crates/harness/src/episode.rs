//! Stepping one episode: verdicts, opponent replies, forfeits and rewards.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use vpr_core::game::{append_turn, Action, EnvKind, EnvState, EpisodeSetup, Mark, Outcome, Trajectory, TurnRecord};
use vpr_core::minesweeper::MineConfig;
use vpr_core::oracle::search::SearchVerdictConfig;
use vpr_core::oracle::verdict_for;
use vpr_core::policy::{Policy, UniformRandom};
use vpr_core::reward::{mcpr_rewards, static_rewards, RewardMode, DEFAULT_MCPR_ROLLOUTS};
use vpr_core::seed::{self, derive, Rng};
use vpr_core::{minesweeper, sudoku, Error};

// Independent seed streams hanging off an episode seed.
const AGENT_STREAM: u64 = 1;
const OPPONENT_STREAM: u64 = 2;
const VERIFIER_STREAM: u64 = 3;
const MCPR_STREAM: u64 = 4;
const POLICY_STREAM: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Seat {
    #[default]
    First,
    Second,
}

impl Seat {
    pub fn mark(self) -> Mark {
        match self {
            Seat::First => Mark::X,
            Seat::Second => Mark::O,
        }
    }
}

impl fmt::Display for Seat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Seat::First => "first",
            Seat::Second => "second",
        })
    }
}

impl FromStr for Seat {
    type Err = Error;

    fn from_str(s: &str) -> vpr_core::Result<Self> {
        match s {
            "first" | "1st" | "x" | "X" => Ok(Seat::First),
            "second" | "2nd" | "o" | "O" => Ok(Seat::Second),
            _ => Err(Error::Config(format!("unknown seat `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeConfig {
    pub env: EnvKind,
    /// Tic-Tac-Toe only; with `second` the opponent opens.
    pub seat: Seat,
    pub reward_mode: RewardMode,
    pub verifier: SearchVerdictConfig,
    /// Attach a verdict to every turn. Forced on in VPR mode.
    pub verify: bool,
    pub mcpr_rollouts: u32,
    pub sudoku_blanks: usize,
    pub mines: MineConfig,
    pub seed: u64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            env: EnvKind::TicTacToe,
            seat: Seat::First,
            reward_mode: RewardMode::Vpr,
            verifier: SearchVerdictConfig::default(),
            verify: true,
            mcpr_rollouts: DEFAULT_MCPR_ROLLOUTS,
            sudoku_blanks: 40,
            mines: MineConfig::default(),
            seed: 0,
        }
    }
}

impl EpisodeConfig {
    pub fn new(env: EnvKind, seed: u64) -> Self {
        EpisodeConfig {
            env,
            seed,
            ..Default::default()
        }
    }

    fn verifies(&self) -> bool {
        self.verify || self.reward_mode == RewardMode::Vpr
    }

    fn setup(&self, opening: Vec<Action>) -> EpisodeSetup {
        match self.env {
            EnvKind::TicTacToe => EpisodeSetup::TicTacToe {
                protagonist: self.seat.mark(),
                opening,
            },
            EnvKind::Sudoku => EpisodeSetup::Sudoku {
                blanks: self.sudoku_blanks,
            },
            EnvKind::Minesweeper => EpisodeSetup::Minesweeper(self.mines),
        }
    }

    /// Generator for the agent's own choices in this episode.
    pub fn agent_rng(&self) -> Rng {
        seed::rng(derive(self.seed, AGENT_STREAM))
    }

    /// Seed used to instantiate per-episode policies (see `ScriptedPolicy::build`).
    pub fn policy_seed(&self) -> u64 {
        derive(self.seed, POLICY_STREAM)
    }
}

/// What one agent action produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    /// `None` when the action forfeited the episode before being applied.
    pub turn: Option<TurnRecord>,
    /// Set once the episode is over.
    pub outcome: Option<Outcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forfeit_reason: Option<String>,
}

/// A live episode.
pub struct Episode {
    cfg: EpisodeConfig,
    traj: Trajectory,
    state: EnvState,
    opponent: Box<dyn Policy>,
    opponent_rng: Rng,
    forfeit_reason: Option<String>,
}

impl Episode {
    /// Builds the initial state. In the second seat the opponent's opening
    /// move is played here and recorded in the trajectory setup.
    pub fn start(cfg: EpisodeConfig, mut opponent: Box<dyn Policy>) -> vpr_core::Result<Self> {
        cfg.verifier.validate()?;
        let mut opponent_rng = seed::rng(derive(cfg.seed, OPPONENT_STREAM));
        let mut opening = Vec::new();
        if cfg.env == EnvKind::TicTacToe && cfg.seat == Seat::Second {
            let empty = cfg.setup(Vec::new()).initial_state(cfg.seed)?;
            opening.push(opponent.act(&empty, &mut opponent_rng)?);
        }
        let setup = cfg.setup(opening);
        let state = setup.initial_state(cfg.seed)?;
        let mut traj = Trajectory::new(cfg.seed, setup);
        if cfg.env == EnvKind::TicTacToe && cfg.verifies() {
            traj.verifier = Some(cfg.verifier.with_seed(derive(cfg.seed, VERIFIER_STREAM)));
        }
        Ok(Episode {
            cfg,
            traj,
            state,
            opponent,
            opponent_rng,
            forfeit_reason: None,
        })
    }

    pub fn config(&self) -> &EpisodeConfig {
        &self.cfg
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.traj
    }

    pub fn into_trajectory(self) -> Trajectory {
        self.traj
    }

    pub fn is_over(&self) -> bool {
        self.traj.outcome.is_some()
    }

    pub fn observation(&self) -> String {
        self.state.render()
    }

    pub fn legal_actions(&self) -> Vec<Action> {
        if self.is_over() {
            Vec::new()
        } else {
            self.state.legal_actions()
        }
    }

    pub fn protagonist(&self) -> Option<Mark> {
        self.traj.setup.protagonist()
    }

    pub fn forfeit_reason(&self) -> Option<&str> {
        self.forfeit_reason.as_deref()
    }

    /// Applies an agent action. Illegal actions forfeit the episode.
    pub fn step(&mut self, action: Action) -> vpr_core::Result<StepReport> {
        if self.is_over() {
            return Err(Error::Sequence("episode is over".into()));
        }
        if !self.state.legal_actions().contains(&action) {
            return self.forfeit(format!("illegal action {action}"));
        }
        let turn_index = self.traj.len() as u32 + 1;
        let verdict = match (&self.traj.verifier, self.cfg.verifies()) {
            (_, false) => None,
            (Some(search), true) => {
                let search = search.with_seed(derive(search.seed, u64::from(turn_index)));
                Some(verdict_for(&self.state, &action, &search)?)
            }
            (None, true) => Some(verdict_for(&self.state, &action, &self.cfg.verifier)?),
        };
        let observation_text = self.state.render();
        let mut next = self.state.apply(&action)?;
        let mut opponent_action = None;
        if let EnvState::TicTacToe(_) = next {
            if !next.is_terminal() {
                let reply = self.opponent.act(&next, &mut self.opponent_rng)?;
                next = next.apply(&reply)?;
                opponent_action = Some(reply);
            }
        }
        let at_horizon = turn_index as usize >= self.cfg.env.horizon();
        let terminal = next.is_terminal() || at_horizon;
        let reward_vpr = verdict.as_ref().map_or(0, |v| v.reward());
        let rec = TurnRecord {
            turn_index,
            observation_text,
            action,
            verdict,
            reward_vpr,
            reward: 0.0,
            terminal,
            opponent_action,
        };
        self.traj = append_turn(self.traj.clone(), rec)?;
        self.state = next;
        if terminal {
            self.finish(false, !self.state.is_terminal())?;
        } else if self.cfg.reward_mode == RewardMode::Vpr {
            let last = self.traj.turns.last_mut().expect("just appended");
            last.reward = f64::from(last.reward_vpr);
        }
        Ok(StepReport {
            turn: self.traj.turns.last().cloned(),
            outcome: self.traj.outcome.clone(),
            forfeit_reason: None,
        })
    }

    /// Ends the episode as a loss for the agent.
    pub fn forfeit(&mut self, reason: impl Into<String>) -> vpr_core::Result<StepReport> {
        if self.is_over() {
            return Err(Error::Sequence("episode is over".into()));
        }
        let reason = reason.into();
        log::debug!("episode {} forfeited: {reason}", self.cfg.seed);
        self.forfeit_reason = Some(reason.clone());
        self.finish(true, false)?;
        Ok(StepReport {
            turn: None,
            outcome: self.traj.outcome.clone(),
            forfeit_reason: Some(reason),
        })
    }

    fn finish(&mut self, forfeit: bool, truncated: bool) -> vpr_core::Result<()> {
        let (success, ret, completion_rate) = match &self.state {
            EnvState::TicTacToe(s) => {
                let ret = if forfeit || !s.is_terminal() {
                    -1.0
                } else {
                    vpr_core::tictactoe::ttt_return(s, self.cfg.seat.mark())?
                };
                (ret > 0.0, ret, if ret > 0.0 { 1.0 } else { 0.0 })
            }
            EnvState::Sudoku(ep) => {
                let (solved, cr) = sudoku::completion(ep);
                (solved, f64::from(u8::from(solved)), cr)
            }
            EnvState::Minesweeper(b) => {
                let (won, cr) = minesweeper::completion(b);
                (won, f64::from(u8::from(won)), cr)
            }
        };
        if let Some(last) = self.traj.turns.last_mut() {
            last.terminal = true;
        }
        self.traj.outcome = Some(Outcome {
            success,
            ret,
            completion_rate,
            forfeit,
            truncated,
        });
        let rewards = match self.cfg.reward_mode {
            RewardMode::Mcpr => mcpr_rewards(
                &self.traj,
                &mut UniformRandom,
                &mut UniformRandom,
                self.cfg.mcpr_rollouts,
                derive(self.cfg.seed, MCPR_STREAM),
            )?
            .rewards(),
            mode => static_rewards(&self.traj, mode)?,
        };
        for (rec, r) in self.traj.turns.iter_mut().zip(rewards) {
            rec.reward = r;
        }
        Ok(())
    }
}

/// Plays `agent` until the episode ends. Agent failures (no move, or a move
/// the environment rejects) forfeit.
pub fn run_episode(cfg: EpisodeConfig, agent: &mut dyn Policy, opponent: Box<dyn Policy>) -> vpr_core::Result<Trajectory> {
    let mut rng = cfg.agent_rng();
    let mut ep = Episode::start(cfg, opponent)?;
    while !ep.is_over() {
        match agent.act(ep.state(), &mut rng) {
            Ok(a) => {
                ep.step(a)?;
            }
            Err(e) => {
                ep.forfeit(format!("agent failed: {e}"))?;
            }
        }
    }
    Ok(ep.into_trajectory())
}
