//! Oracle-quality ablation: search-verifier disagreement ε̄ and the returns of
//! a search-oracle-following player, both as functions of the simulation budget.

use serde::{Deserialize, Serialize};
use vpr_core::game::EnvKind;
use vpr_core::oracle::search::{disagreement_rate, sample_positions, SearchVerdictConfig};
use vpr_core::seed::derive;

use crate::episode::Seat;
use crate::eval::{evaluate, EvalConfig, Summary};
use crate::policies::ScriptedPolicy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AblateConfig {
    pub budgets: Vec<u32>,
    pub n_positions: usize,
    /// Independent position/search seeds; ε̄ is averaged over them.
    pub seeds: Vec<u64>,
    pub solver: bool,
    /// Games per seat for the return measurement; 0 skips it.
    pub n_games: usize,
    pub n_runs: usize,
    pub opponent_simulations: u32,
    pub base_seed: u64,
}

impl Default for AblateConfig {
    fn default() -> Self {
        AblateConfig {
            budgets: vec![100, 1000, 10_000],
            n_positions: 200,
            seeds: vec![0, 1, 2],
            solver: true,
            n_games: 256,
            n_runs: 1,
            opponent_simulations: 10_000,
            base_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblateRow {
    pub n_simulations: u32,
    /// ε̄ per seed, in `seeds` order.
    pub disagreement: Vec<f64>,
    pub mean_disagreement: f64,
    pub return_first: Option<Summary>,
    pub return_second: Option<Summary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblateReport {
    pub config: AblateConfig,
    pub rows: Vec<AblateRow>,
}

impl AblateReport {
    /// Whether mean ε̄ never increases with the budget.
    pub fn monotone(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].mean_disagreement <= w[0].mean_disagreement)
    }
}

pub fn search_config(n: u32, solver: bool) -> SearchVerdictConfig {
    SearchVerdictConfig {
        solver,
        ..SearchVerdictConfig::default().with_simulations(n)
    }
}

/// Mean ε̄ at each budget; positions and sampled actions are shared across budgets.
pub fn disagreement_by_budget(cfg: &AblateConfig) -> vpr_core::Result<Vec<Vec<f64>>> {
    cfg.budgets
        .iter()
        .map(|&n| {
            cfg.seeds
                .iter()
                .map(|&s| {
                    let positions = sample_positions(cfg.n_positions, derive(s, 0xB0A4D));
                    disagreement_rate(&search_config(n, cfg.solver).with_seed(s), &positions)
                })
                .collect()
        })
        .collect()
}

pub fn ablate(cfg: &AblateConfig) -> vpr_core::Result<AblateReport> {
    if cfg.budgets.is_empty() || cfg.seeds.is_empty() || cfg.n_positions == 0 {
        return Err(vpr_core::Error::Config("budgets, seeds and n_positions must be non-empty".into()));
    }
    let eps = disagreement_by_budget(cfg)?;
    let mut rows = Vec::with_capacity(cfg.budgets.len());
    for (&n, disagreement) in cfg.budgets.iter().zip(eps) {
        let mean_disagreement = disagreement.iter().sum::<f64>() / disagreement.len() as f64;
        let (mut return_first, mut return_second) = (None, None);
        if cfg.n_games > 0 {
            let player = ScriptedPolicy::SearchOracle {
                search: search_config(n, cfg.solver),
            };
            for seat in [Seat::First, Seat::Second] {
                let ec = EvalConfig {
                    env: EnvKind::TicTacToe,
                    n_games: cfg.n_games,
                    n_runs: cfg.n_runs,
                    seat,
                    opponent: ScriptedPolicy::mcts(cfg.opponent_simulations),
                    base_seed: cfg.base_seed,
                    ..EvalConfig::default()
                };
                let r = evaluate(&ec, &player)?.mean_return;
                match seat {
                    Seat::First => return_first = Some(r),
                    Seat::Second => return_second = Some(r),
                }
            }
        }
        log::info!("N={n}: mean disagreement {mean_disagreement:.4}");
        rows.push(AblateRow {
            n_simulations: n,
            disagreement,
            mean_disagreement,
            return_first,
            return_second,
        });
    }
    Ok(AblateReport {
        config: cfg.clone(),
        rows,
    })
}
