use vpr_core::game::{Action, EnvKind, Mark};
use vpr_core::reward::RewardMode;
use vpr_harness::episode::{run_episode, Episode, EpisodeConfig, Seat};
use vpr_harness::eval::{evaluate, EvalConfig};
use vpr_harness::policies::ScriptedPolicy;

fn play(cfg: EpisodeConfig, policy: &ScriptedPolicy, opponent: &ScriptedPolicy) -> vpr_core::game::Trajectory {
    let mut agent = policy.build(cfg.policy_seed());
    let opp = opponent.build(cfg.seed ^ 1);
    run_episode(cfg, agent.as_mut(), opp).unwrap()
}

#[test]
fn oracle_following_solves_sudoku_with_full_process_reward() {
    let t = play(EpisodeConfig::new(EnvKind::Sudoku, 3), &ScriptedPolicy::OracleFollowing, &ScriptedPolicy::UniformRandom);
    assert_eq!(t.len(), 40);
    assert!(t.outcome.as_ref().unwrap().success);
    assert!(t.turns.iter().all(|r| r.reward_vpr == 1 && r.reward == 1.0));
    assert!(t.turns.last().unwrap().terminal);
}

#[test]
fn minimax_draws_strong_search_in_both_seats() {
    for seat in [Seat::First, Seat::Second] {
        for seed in 0..4 {
            let cfg = EpisodeConfig { seat, verify: false, reward_mode: RewardMode::Outcome, ..EpisodeConfig::new(EnvKind::TicTacToe, seed) };
            let t = play(cfg, &ScriptedPolicy::OracleFollowing, &ScriptedPolicy::mcts(10_000));
            assert_eq!(t.outcome.unwrap().ret, 0.0);
        }
    }
}

#[test]
fn second_seat_opponent_opens() {
    for seed in 0..8 {
        let cfg = EpisodeConfig { seat: Seat::Second, ..EpisodeConfig::new(EnvKind::TicTacToe, seed) };
        let ep = Episode::start(cfg, ScriptedPolicy::UniformRandom.build(0)).unwrap();
        assert_eq!(ep.protagonist(), Some(Mark::O));
        assert_eq!(ep.state().to_move(), Some(Mark::O));
        assert_eq!(ep.legal_actions().len(), 8);
    }
}

#[test]
fn random_minesweeper_terminates_with_valid_metrics() {
    for seed in 0..20 {
        let t = play(EpisodeConfig::new(EnvKind::Minesweeper, seed), &ScriptedPolicy::UniformRandom, &ScriptedPolicy::UniformRandom);
        let o = t.outcome.clone().unwrap();
        assert!((0.0..=1.0).contains(&o.completion_rate));
        assert!(t.len() <= EnvKind::Minesweeper.horizon());
    }
}

#[test]
fn illegal_action_forfeits() {
    let mut ep = Episode::start(EpisodeConfig::new(EnvKind::TicTacToe, 0), ScriptedPolicy::UniformRandom.build(0)).unwrap();
    let r = ep.step(Action::Place { mark: Mark::O, row: 0, col: 0 }).unwrap();
    let o = r.outcome.unwrap();
    assert!(o.forfeit);
    assert_eq!(o.ret, -1.0);
    assert!(ep.step(Action::Place { mark: Mark::X, row: 0, col: 0 }).is_err());
}

#[test]
fn reward_modes_shape_rewards() {
    let base = EpisodeConfig::new(EnvKind::Sudoku, 8);
    let or = play(EpisodeConfig { reward_mode: RewardMode::Outcome, ..base.clone() }, &ScriptedPolicy::OracleFollowing, &ScriptedPolicy::UniformRandom);
    let rewards: Vec<f64> = or.turns.iter().map(|t| t.reward).collect();
    assert_eq!(rewards.iter().sum::<f64>(), 1.0);
    assert_eq!(*rewards.last().unwrap(), 1.0);

    let mc = play(
        EpisodeConfig { reward_mode: RewardMode::Mcpr, mcpr_rollouts: 4, ..EpisodeConfig::new(EnvKind::TicTacToe, 2) },
        &ScriptedPolicy::UniformRandom,
        &ScriptedPolicy::UniformRandom,
    );
    assert!(mc.turns.iter().all(|t| t.reward.abs() <= 2.0));
}

#[test]
fn episodes_are_deterministic_in_the_seed() {
    let cfg = EpisodeConfig::new(EnvKind::TicTacToe, 21);
    let policy = ScriptedPolicy::EpsilonOracle { epsilon: 0.3 };
    let mixed = ScriptedPolicy::Mixed { random_fraction: 0.5, search: Default::default() };
    assert_eq!(play(cfg.clone(), &policy, &mixed), play(cfg, &policy, &mixed));
}

#[test]
fn evaluation_reports_are_reproducible() {
    let cfg = EvalConfig { env: EnvKind::Minesweeper, n_games: 64, n_runs: 3, base_seed: 5, ..EvalConfig::default() };
    let a = serde_json::to_string(&evaluate(&cfg, &ScriptedPolicy::OracleFollowing).unwrap()).unwrap();
    let b = serde_json::to_string(&evaluate(&cfg, &ScriptedPolicy::OracleFollowing).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn invalid_policies_are_rejected() {
    assert!(ScriptedPolicy::EpsilonOracle { epsilon: 1.5 }.validate().is_err());
    let cfg = EvalConfig { n_games: 0, ..EvalConfig::default() };
    assert!(evaluate(&cfg, &ScriptedPolicy::UniformRandom).is_err());
}
