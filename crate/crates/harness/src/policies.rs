//! Scripted agents: the baselines and reference players the harness runs.

use rand::seq::IndexedRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use vpr_core::game::{Action, EnvState};
use vpr_core::oracle::constraint::oracle_valid_constraint;
use vpr_core::oracle::posterior::{oracle_valid_probabilistic, posterior_of};
use vpr_core::oracle::search::{mcts_search, minimax, search_oracle_set, SearchVerdictConfig};
use vpr_core::policy::{Policy, UniformRandom};
use vpr_core::seed::{self, Rng};
use vpr_core::Error;

/// Serializable description of a policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScriptedPolicy {
    UniformRandom,
    /// Uniform over the exact oracle-valid set: minimax-optimal moves,
    /// solution fills, or minimum-posterior reveals and certain flags.
    OracleFollowing,
    /// Uniform legal action with probability `epsilon`, oracle-following otherwise.
    EpsilonOracle { epsilon: f64 },
    /// Tic-Tac-Toe MCTS playing its most-visited root move.
    MctsPlayer { search: SearchVerdictConfig },
    /// Plays the listed actions in order.
    ScriptedReplay { actions: Vec<Action> },
    /// Tic-Tac-Toe: uniform over the search oracle's argmax set.
    SearchOracle { search: SearchVerdictConfig },
    /// Per episode: uniform random with probability `random_fraction`, MCTS otherwise.
    Mixed {
        random_fraction: f64,
        search: SearchVerdictConfig,
    },
}

impl ScriptedPolicy {
    pub fn mcts(n_simulations: u32) -> Self {
        ScriptedPolicy::MctsPlayer {
            search: SearchVerdictConfig::default().with_simulations(n_simulations),
        }
    }

    pub fn validate(&self) -> vpr_core::Result<()> {
        match self {
            ScriptedPolicy::EpsilonOracle { epsilon } if !(0.0..=1.0).contains(epsilon) => {
                Err(Error::Config(format!("epsilon {epsilon} outside [0, 1]")))
            }
            ScriptedPolicy::Mixed { random_fraction, .. } if !(0.0..=1.0).contains(random_fraction) => {
                Err(Error::Config(format!("random_fraction {random_fraction} outside [0, 1]")))
            }
            ScriptedPolicy::MctsPlayer { search }
            | ScriptedPolicy::SearchOracle { search }
            | ScriptedPolicy::Mixed { search, .. } => search.validate(),
            _ => Ok(()),
        }
    }

    /// Instantiates the policy for one episode; `episode_seed` resolves `Mixed`.
    pub fn build(&self, episode_seed: u64) -> Box<dyn Policy> {
        match self {
            ScriptedPolicy::UniformRandom => Box::new(UniformRandom),
            ScriptedPolicy::OracleFollowing => Box::new(OracleFollowing),
            ScriptedPolicy::EpsilonOracle { epsilon } => Box::new(EpsilonOracle { epsilon: *epsilon }),
            ScriptedPolicy::MctsPlayer { search } => Box::new(MctsPlayer { search: *search }),
            ScriptedPolicy::SearchOracle { search } => Box::new(SearchOracle { search: *search }),
            ScriptedPolicy::ScriptedReplay { actions } => Box::new(ScriptedReplay {
                actions: actions.clone(),
                next: 0,
            }),
            ScriptedPolicy::Mixed { random_fraction, search } => {
                let mut r = seed::rng(seed::derive(episode_seed, 0x313D));
                if r.random_bool(*random_fraction) {
                    Box::new(UniformRandom)
                } else {
                    Box::new(MctsPlayer { search: *search })
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            ScriptedPolicy::UniformRandom => "uniform_random".into(),
            ScriptedPolicy::OracleFollowing => "oracle_following".into(),
            ScriptedPolicy::EpsilonOracle { epsilon } => format!("epsilon_oracle({epsilon})"),
            ScriptedPolicy::MctsPlayer { search } => format!("mcts_player(N={})", search.n_simulations),
            ScriptedPolicy::SearchOracle { search } => format!("search_oracle(N={})", search.n_simulations),
            ScriptedPolicy::ScriptedReplay { actions } => format!("scripted_replay({})", actions.len()),
            ScriptedPolicy::Mixed { random_fraction, search } => {
                format!("mixed(random={random_fraction}, N={})", search.n_simulations)
            }
        }
    }
}

/// Exact oracle-valid actions of a state.
pub fn exact_oracle_set(state: &EnvState) -> vpr_core::Result<Vec<Action>> {
    match state {
        EnvState::TicTacToe(s) => {
            if s.is_terminal() {
                return Err(Error::Terminal);
            }
            Ok(minimax(s).optimal_set)
        }
        EnvState::Sudoku(ep) => oracle_valid_constraint(ep),
        EnvState::Minesweeper(b) => oracle_valid_probabilistic(b, &posterior_of(b)?),
    }
}

pub struct OracleFollowing;

impl Policy for OracleFollowing {
    fn act(&mut self, state: &EnvState, rng: &mut Rng) -> vpr_core::Result<Action> {
        let set = exact_oracle_set(state)?;
        set.choose(rng).copied().ok_or(Error::Terminal)
    }

    fn name(&self) -> String {
        "oracle_following".into()
    }
}

pub struct EpsilonOracle {
    pub epsilon: f64,
}

impl Policy for EpsilonOracle {
    fn act(&mut self, state: &EnvState, rng: &mut Rng) -> vpr_core::Result<Action> {
        if rng.random_bool(self.epsilon) {
            UniformRandom.act(state, rng)
        } else {
            OracleFollowing.act(state, rng)
        }
    }

    fn name(&self) -> String {
        format!("epsilon_oracle({})", self.epsilon)
    }
}

pub struct MctsPlayer {
    pub search: SearchVerdictConfig,
}

impl Policy for MctsPlayer {
    fn act(&mut self, state: &EnvState, rng: &mut Rng) -> vpr_core::Result<Action> {
        let EnvState::TicTacToe(s) = state else {
            return Err(Error::InvalidArgument("the MCTS player only plays tic-tac-toe".into()));
        };
        let cfg = self.search.with_seed(rng.random());
        mcts_search(s, &cfg)?.robust_child().ok_or(Error::Terminal)
    }

    fn name(&self) -> String {
        format!("mcts_player(N={})", self.search.n_simulations)
    }
}

pub struct SearchOracle {
    pub search: SearchVerdictConfig,
}

impl Policy for SearchOracle {
    fn act(&mut self, state: &EnvState, rng: &mut Rng) -> vpr_core::Result<Action> {
        let EnvState::TicTacToe(s) = state else {
            return Err(Error::InvalidArgument("the search oracle only covers tic-tac-toe".into()));
        };
        let set = search_oracle_set(s, &self.search.with_seed(rng.random()))?;
        set.choose(rng).copied().ok_or(Error::Terminal)
    }

    fn name(&self) -> String {
        format!("search_oracle(N={})", self.search.n_simulations)
    }
}

pub struct ScriptedReplay {
    actions: Vec<Action>,
    next: usize,
}

impl Policy for ScriptedReplay {
    fn act(&mut self, _state: &EnvState, _rng: &mut Rng) -> vpr_core::Result<Action> {
        let a = self
            .actions
            .get(self.next)
            .copied()
            .ok_or_else(|| Error::InvalidArgument("scripted actions exhausted".into()))?;
        self.next += 1;
        Ok(a)
    }

    fn name(&self) -> String {
        "scripted_replay".into()
    }
}
