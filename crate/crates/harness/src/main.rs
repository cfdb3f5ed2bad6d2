use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use vpr_core::game::EnvKind;
use vpr_core::oracle::search::SearchVerdictConfig;
use vpr_core::reward::RewardMode;
use vpr_core::seed::derive;
use vpr_core::sudoku::sudoku_generate;
use vpr_core::theory::{bias_bound_check, gradient_agreement, imitation_equivalence_check, scaling_table, FiniteBandit};
use vpr_harness::ablate::ablate;
use vpr_harness::config::FileConfig;
use vpr_harness::episode::{run_episode, EpisodeConfig, Seat};
use vpr_harness::eval::evaluate;
use vpr_harness::persist::write_jsonl;
use vpr_harness::policies::ScriptedPolicy;
use vpr_harness::server::serve;

/// Verifiable process rewards for text games.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true, env = "VPR_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

/// A policy spec: `uniform_random`, `oracle_following`, `epsilon_oracle:<ε>`,
/// `mcts:<N>`, `search_oracle:<N>`, `mixed:<random fraction>:<N>`, or a JSON object.
#[derive(Clone, Debug)]
struct PolicyArg(ScriptedPolicy);

impl FromStr for PolicyArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim_start().starts_with('{') {
            return serde_json::from_str(s).map(PolicyArg).map_err(|e| e.to_string());
        }
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64, String> {
            parts
                .get(i)
                .ok_or_else(|| format!("`{s}` needs a parameter"))?
                .parse::<f64>()
                .map_err(|e| format!("`{s}`: {e}"))
        };
        let search = |i: usize| -> Result<SearchVerdictConfig, String> {
            Ok(SearchVerdictConfig::default().with_simulations(num(i)? as u32))
        };
        let p = match parts[0] {
            "uniform_random" | "random" => ScriptedPolicy::UniformRandom,
            "oracle_following" | "oracle" => ScriptedPolicy::OracleFollowing,
            "epsilon_oracle" => ScriptedPolicy::EpsilonOracle { epsilon: num(1)? },
            "mcts" | "mcts_player" => ScriptedPolicy::MctsPlayer { search: search(1)? },
            "search_oracle" => ScriptedPolicy::SearchOracle { search: search(1)? },
            "mixed" => ScriptedPolicy::Mixed {
                random_fraction: num(1)?,
                search: search(2)?,
            },
            other => return Err(format!("unknown policy `{other}`")),
        };
        p.validate().map_err(|e| e.to_string())?;
        Ok(PolicyArg(p))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run episodes and write their trajectories as JSON lines.
    Play {
        #[arg(long)]
        env: Option<EnvKind>,
        #[arg(long, default_value = "oracle_following")]
        policy: PolicyArg,
        /// Tic-Tac-Toe opponent (default: 50/50 uniform random / MCTS(10000)).
        #[arg(long)]
        opponent: Option<PolicyArg>,
        #[arg(long)]
        reward_mode: Option<RewardMode>,
        #[arg(long)]
        seat: Option<Seat>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        episodes: usize,
        /// Output file; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Evaluation protocol: runs × games, SR/CR/return as mean ± std.
    Eval {
        #[arg(long)]
        env: Option<EnvKind>,
        #[arg(long, default_value = "oracle_following")]
        policy: PolicyArg,
        #[arg(long)]
        opponent: Option<PolicyArg>,
        #[arg(long)]
        seat: Option<Seat>,
        #[arg(long)]
        n_games: Option<usize>,
        #[arg(long)]
        n_runs: Option<usize>,
        #[arg(long)]
        base_seed: Option<u64>,
        /// Print the full JSON report instead of a summary line.
        #[arg(long)]
        json: bool,
    },
    /// Search-oracle quality: disagreement rate and returns vs simulation budget.
    AblateOracle {
        #[arg(long, value_delimiter = ',')]
        budgets: Option<Vec<u32>>,
        #[arg(long)]
        positions: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Plain UCT without proven-value propagation.
        #[arg(long)]
        no_solver: bool,
        /// Games per seat for the return columns (0 skips them).
        #[arg(long)]
        games: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Gradient-identity reports: signal scaling, baseline invariance, bias bound.
    Theory {
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "0.3,0.5,0.7")]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1,5,10,20")]
        horizons: Vec<u32>,
        /// Random bandit instances for the exact identities.
        #[arg(long, default_value_t = 20)]
        instances: u64,
        #[arg(long)]
        json: bool,
    },
    /// Generate uniquely solvable puzzles, one 81-character line each.
    GenSudoku {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        blanks: usize,
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Also print the solution after each puzzle.
        #[arg(long)]
        solutions: bool,
    },
    /// Serve the episode protocol on stdio or HTTP.
    Serve {
        /// `stdio` or a socket address.
        #[arg(long)]
        bind: Option<String>,
        #[arg(long)]
        idle_timeout_secs: Option<u64>,
        #[arg(long)]
        opponent: Option<PolicyArg>,
        #[arg(long)]
        reward_mode: Option<RewardMode>,
    },
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("VPR_LOG", "warn")).init();
    let cli = Cli::parse();
    let file = FileConfig::load_or_default(cli.config.as_deref())?;
    match cli.cmd {
        Command::Play {
            env,
            policy,
            opponent,
            reward_mode,
            seat,
            seed,
            episodes,
            out,
        } => {
            let mut base = file.episode;
            base.env = env.unwrap_or(base.env);
            base.reward_mode = reward_mode.unwrap_or(base.reward_mode);
            base.seat = seat.unwrap_or(base.seat);
            base.seed = seed.unwrap_or(base.seed);
            let opponent = opponent.map_or(
                ScriptedPolicy::Mixed {
                    random_fraction: 0.5,
                    search: SearchVerdictConfig::default(),
                },
                |p| p.0,
            );
            let trajs = (0..episodes as u64)
                .into_par_iter()
                .map(|i| {
                    let cfg = EpisodeConfig {
                        seed: derive(base.seed, i),
                        ..base.clone()
                    };
                    let mut agent = policy.0.build(cfg.policy_seed());
                    let opp = opponent.build(derive(cfg.seed, 0x0990));
                    run_episode(cfg, agent.as_mut(), opp)
                })
                .collect::<vpr_core::Result<Vec<_>>>()?;
            match out {
                Some(path) => {
                    let n = write_jsonl(&path, &trajs)?;
                    eprintln!("wrote {n} trajectories to {}", path.display());
                }
                None => {
                    for t in &trajs {
                        println!("{}", serde_json::to_string(t)?);
                    }
                }
            }
        }
        Command::Eval {
            env,
            policy,
            opponent,
            seat,
            n_games,
            n_runs,
            base_seed,
            json,
        } => {
            let mut cfg = file.eval;
            cfg.env = env.unwrap_or(cfg.env);
            cfg.opponent = opponent.map_or(cfg.opponent, |p| p.0);
            cfg.seat = seat.unwrap_or(cfg.seat);
            cfg.n_games = n_games.unwrap_or(cfg.n_games);
            cfg.n_runs = n_runs.unwrap_or(cfg.n_runs);
            cfg.base_seed = base_seed.unwrap_or(cfg.base_seed);
            let report = evaluate(&cfg, &policy.0)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                let who = match &report.opponent {
                    Some(o) => format!(" vs {o} ({} mover)", cfg.seat),
                    None => String::new(),
                };
                println!(
                    "{} {}{who}: SR {} CR {} return {} ({} runs × {} games)",
                    report.env,
                    report.policy,
                    report.success_rate,
                    report.completion_rate,
                    report.mean_return,
                    report.n_runs,
                    report.n_games
                );
            }
        }
        Command::AblateOracle {
            budgets,
            positions,
            seeds,
            no_solver,
            games,
            json,
        } => {
            let mut cfg = file.ablate;
            cfg.budgets = budgets.unwrap_or(cfg.budgets);
            cfg.n_positions = positions.unwrap_or(cfg.n_positions);
            cfg.seeds = seeds.unwrap_or(cfg.seeds);
            cfg.solver &= !no_solver;
            cfg.n_games = games.unwrap_or(cfg.n_games);
            let report = ablate(&cfg)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                println!("{:>7}  {:>8}  {:>14}  {:>14}", "N", "eps", "return (1st)", "return (2nd)");
                let fmt = |s: Option<vpr_harness::eval::Summary>| s.map_or("-".into(), |s| s.to_string());
                for r in &report.rows {
                    println!(
                        "{:>7}  {:>8.4}  {:>14}  {:>14}",
                        r.n_simulations,
                        r.mean_disagreement,
                        fmt(r.return_first),
                        fmt(r.return_second)
                    );
                }
                println!("monotone: {}", report.monotone());
            }
        }
        Command::Theory {
            samples,
            seed,
            p,
            horizons,
            instances,
            json,
        } => theory(samples, seed, &p, &horizons, instances, json)?,
        Command::GenSudoku {
            seed,
            blanks,
            count,
            solutions,
        } => {
            for i in 0..count {
                let ep = sudoku_generate(derive(seed, i), blanks)?;
                println!("{}", ep.puzzle().to_line());
                if solutions {
                    println!("{}", ep.solution().to_line());
                }
            }
        }
        Command::Serve {
            bind,
            idle_timeout_secs,
            opponent,
            reward_mode,
        } => {
            let mut cfg = file.serve;
            cfg.bind = bind.unwrap_or(cfg.bind);
            cfg.defaults.idle_timeout_secs = idle_timeout_secs.unwrap_or(cfg.defaults.idle_timeout_secs);
            cfg.defaults.opponent = opponent.map_or(cfg.defaults.opponent, |p| p.0);
            cfg.defaults.reward_mode = reward_mode.unwrap_or(cfg.defaults.reward_mode);
            if cfg.defaults.idle_timeout_secs == 0 {
                bail!("idle_timeout_secs must be positive");
            }
            tokio::runtime::Runtime::new()
                .context("starting runtime")?
                .block_on(serve(cfg))?;
        }
    }
    Ok(())
}

fn theory(samples: u64, seed: u64, ps: &[f64], horizons: &[u32], instances: u64, json: bool) -> anyhow::Result<()> {
    let rows = scaling_table(ps, horizons, samples, seed)?;
    let bandits: Vec<FiniteBandit> = (0..instances).map(|i| FiniteBandit::random(4, 3, derive(seed, i))).collect();
    let agreement: Vec<_> = bandits
        .iter()
        .enumerate()
        .map(|(i, fb)| {
            let baseline: Vec<f64> = (0..fb.d.len()).map(|s| (s as f64 + 1.0) * 0.37 + i as f64).collect();
            (imitation_equivalence_check(fb), gradient_agreement(fb, &baseline, 1e-5))
        })
        .collect();
    let bias = [0.05, 0.1, 0.2]
        .iter()
        .map(|&rate| {
            let reports = bandits
                .iter()
                .enumerate()
                .map(|(i, fb)| bias_bound_check(fb, &fb.verifier, rate, derive(seed ^ 0xB1A5, i as u64)))
                .collect::<vpr_core::Result<Vec<_>>>()?;
            Ok((rate, reports))
        })
        .collect::<vpr_core::Result<Vec<_>>>()?;
    if json {
        let doc = serde_json::json!({
            "scaling": rows,
            "gradient_agreement": agreement.iter().map(|(im, g)| serde_json::json!({"imitation": im, "agreement": g})).collect::<Vec<_>>(),
            "bias": bias,
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
        return Ok(());
    }
    println!("signal scaling ({samples} samples per cell)");
    println!(
        "{:>4} {:>3}  {:>10} {:>10} {:>6}  {:>12} {:>12} {:>6}  {:>9}",
        "p", "T", "vpr", "vpr mc", "z", "or", "or mc (is)", "z", "identity"
    );
    for r in &rows {
        let z = |g: &vpr_core::theory::GradientReport| g.z_score().map_or("-".into(), |z| format!("{z:.2}"));
        println!(
            "{:>4} {:>3}  {:>10.5} {:>10.5} {:>6}  {:>12.4e} {:>12.4e} {:>6}  {:>9.1e}",
            r.p,
            r.horizon,
            r.vpr_closed,
            r.vpr.mean,
            z(&r.vpr),
            r.or_closed,
            r.or.mean,
            z(&r.or),
            r.identity_rel_error
        );
    }
    let worst = |f: &dyn Fn(&(f64, vpr_core::theory::GradientAgreement)) -> f64| {
        agreement.iter().map(f).fold(0.0, f64::max)
    };
    println!("\nfinite bandits ({instances} instances)");
    println!("  imitation vs policy gradient   max |Δ| = {:.2e}", worst(&|a| a.0));
    println!("  score vs direct gradient       max |Δ| = {:.2e}", worst(&|a| a.1.score_vs_direct));
    println!("  baseline shift                 max |Δ| = {:.2e}", worst(&|a| a.1.baseline_shift));
    println!("  finite differences             max rel = {:.2e}", worst(&|a| a.1.finite_difference_rel));
    println!("\nbias bound ‖Δg‖ ≤ G·ε̄");
    for (rate, reports) in &bias {
        let violations = reports.iter().filter(|r| !r.holds()).count();
        let ratio = reports
            .iter()
            .filter(|r| r.bound > 0.0)
            .map(|r| r.bias_norm / r.bound)
            .fold(0.0, f64::max);
        println!("  flip rate {rate:<4}  violations {violations}/{}  max ratio {ratio:.3}", reports.len());
    }
    Ok(())
}
