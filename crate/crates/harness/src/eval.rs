//! The evaluation protocol: independent runs of many games, summarised as
//! mean ± std across runs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vpr_core::game::{EnvKind, Trajectory};
use vpr_core::oracle::search::SearchVerdictConfig;
use vpr_core::reward::RewardMode;
use vpr_core::seed::derive_path;

use crate::episode::{run_episode, EpisodeConfig, Seat};
use crate::policies::ScriptedPolicy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub env: EnvKind,
    pub n_games: usize,
    pub n_runs: usize,
    pub seat: Seat,
    pub opponent: ScriptedPolicy,
    pub base_seed: u64,
    /// Attach verifier verdicts to evaluation games (not needed for metrics).
    pub verify: bool,
    pub verifier: SearchVerdictConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            env: EnvKind::TicTacToe,
            n_games: 1024,
            n_runs: 5,
            seat: Seat::First,
            opponent: ScriptedPolicy::mcts(10_000),
            base_seed: 0,
            verify: false,
            verifier: SearchVerdictConfig::default(),
        }
    }
}

impl EvalConfig {
    /// Environment seed of game `game` in run `run`; shared by every policy
    /// evaluated with the same base seed, so comparisons are paired.
    pub fn game_seed(&self, run: usize, game: usize) -> u64 {
        derive_path(self.base_seed, &[run as u64, game as u64])
    }

    fn episode(&self, seed: u64) -> EpisodeConfig {
        EpisodeConfig {
            env: self.env,
            seat: self.seat,
            reward_mode: RewardMode::Outcome,
            verifier: self.verifier,
            verify: self.verify,
            seed,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub run: usize,
    pub games: usize,
    /// Percent of games won / solved.
    pub success_rate: f64,
    /// Percent, averaged over games.
    pub completion_rate: f64,
    pub mean_return: f64,
    pub wins: usize,
    pub draws: usize,
    pub losses: usize,
    pub forfeits: usize,
}

impl RunMetrics {
    pub fn from_trajectories(run: usize, trajs: &[Trajectory]) -> Self {
        let n = trajs.len().max(1) as f64;
        let outcomes: Vec<_> = trajs.iter().filter_map(|t| t.outcome.as_ref()).collect();
        RunMetrics {
            run,
            games: trajs.len(),
            success_rate: 100.0 * outcomes.iter().filter(|o| o.success).count() as f64 / n,
            completion_rate: 100.0 * outcomes.iter().map(|o| o.completion_rate).sum::<f64>() / n,
            mean_return: outcomes.iter().map(|o| o.ret).sum::<f64>() / n,
            wins: outcomes.iter().filter(|o| o.ret > 0.0).count(),
            draws: outcomes.iter().filter(|o| o.ret == 0.0).count(),
            losses: outcomes.iter().filter(|o| o.ret < 0.0).count(),
            forfeits: outcomes.iter().filter(|o| o.forfeit).count(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation across runs (0 for a single run).
    pub std: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Summary { mean: 0.0, std: 0.0 };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Summary { mean, std }
    }
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2} ± {:.2}", self.mean, self.std)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub env: EnvKind,
    pub policy: String,
    pub opponent: Option<String>,
    pub seat: Option<Seat>,
    pub n_games: usize,
    pub n_runs: usize,
    pub base_seed: u64,
    pub success_rate: Summary,
    pub completion_rate: Summary,
    pub mean_return: Summary,
    pub runs: Vec<RunMetrics>,
}

/// Plays every game of one run; games are independent and run in parallel.
pub fn play_run(cfg: &EvalConfig, policy: &ScriptedPolicy, run: usize) -> vpr_core::Result<Vec<Trajectory>> {
    (0..cfg.n_games)
        .into_par_iter()
        .map(|game| {
            let ep = cfg.episode(cfg.game_seed(run, game));
            let mut agent = policy.build(ep.policy_seed());
            let opponent = cfg.opponent.build(derive_path(ep.seed, &[0x0990]));
            run_episode(ep, agent.as_mut(), opponent)
        })
        .collect()
}

pub fn evaluate(cfg: &EvalConfig, policy: &ScriptedPolicy) -> vpr_core::Result<EvalReport> {
    policy.validate()?;
    cfg.opponent.validate()?;
    if cfg.n_games == 0 || cfg.n_runs == 0 {
        return Err(vpr_core::Error::Config("n_games and n_runs must be positive".into()));
    }
    let runs = (0..cfg.n_runs)
        .map(|run| {
            let trajs = play_run(cfg, policy, run)?;
            let m = RunMetrics::from_trajectories(run, &trajs);
            log::info!(
                "run {run}: SR {:.2} CR {:.2} return {:.3}",
                m.success_rate,
                m.completion_rate,
                m.mean_return
            );
            Ok(m)
        })
        .collect::<vpr_core::Result<Vec<_>>>()?;
    let col = |f: fn(&RunMetrics) -> f64| Summary::of(&runs.iter().map(f).collect::<Vec<_>>());
    let tictactoe = cfg.env == EnvKind::TicTacToe;
    Ok(EvalReport {
        env: cfg.env,
        policy: policy.label(),
        opponent: tictactoe.then(|| cfg.opponent.label()),
        seat: tictactoe.then_some(cfg.seat),
        n_games: cfg.n_games,
        n_runs: cfg.n_runs,
        base_seed: cfg.base_seed,
        success_rate: col(|m| m.success_rate),
        completion_rate: col(|m| m.completion_rate),
        mean_return: col(|m| m.mean_return),
        runs,
    })
}
