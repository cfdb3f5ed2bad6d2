use vpr_core::game::EnvKind;
use vpr_harness::episode::{run_episode, EpisodeConfig};
use vpr_harness::persist::{read_jsonl, reverify, reverifies, write_jsonl};
use vpr_harness::policies::ScriptedPolicy;
use vpr_harness::HarnessError;

fn sample(env: EnvKind, seed: u64, policy: &ScriptedPolicy) -> vpr_core::game::Trajectory {
    let cfg = EpisodeConfig {
        verifier: vpr_core::oracle::search::SearchVerdictConfig::default().with_simulations(500),
        ..EpisodeConfig::new(env, seed)
    };
    let mut agent = policy.build(cfg.policy_seed());
    run_episode(cfg, agent.as_mut(), ScriptedPolicy::UniformRandom.build(seed)).unwrap()
}

#[test]
fn write_then_read_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trajs.jsonl");
    let trajs = vec![
        sample(EnvKind::TicTacToe, 1, &ScriptedPolicy::UniformRandom),
        sample(EnvKind::Sudoku, 2, &ScriptedPolicy::EpsilonOracle { epsilon: 0.2 }),
        sample(EnvKind::Minesweeper, 3, &ScriptedPolicy::OracleFollowing),
    ];
    assert_eq!(write_jsonl(&path, &trajs).unwrap(), 3);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().all(|l| l.contains("\"schema_version\":1")));
    assert_eq!(read_jsonl(&path).unwrap(), trajs);
}

#[test]
fn reloaded_trajectories_reverify_identically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.jsonl");
    let trajs: Vec<_> = (0..4)
        .flat_map(|s| {
            [
                sample(EnvKind::Sudoku, s, &ScriptedPolicy::EpsilonOracle { epsilon: 0.3 }),
                sample(EnvKind::TicTacToe, s, &ScriptedPolicy::UniformRandom),
                sample(EnvKind::Minesweeper, s, &ScriptedPolicy::UniformRandom),
            ]
        })
        .collect();
    write_jsonl(&path, &trajs).unwrap();
    for t in read_jsonl(&path).unwrap() {
        assert!(reverifies(&t).unwrap(), "{} seed {}", t.env, t.seed);
        let rewards: Vec<u8> = reverify(&t).unwrap().iter().map(|v| v.as_ref().unwrap().reward()).collect();
        assert_eq!(rewards, t.turns.iter().map(|r| r.reward_vpr).collect::<Vec<_>>());
    }
}

#[test]
fn unwritable_path_is_an_error_with_context() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("t.jsonl");
    let err = write_jsonl(&path, &[]).unwrap_err();
    assert!(matches!(err, HarnessError::Io { .. }));
    assert!(err.to_string().contains("missing"));
}

#[test]
fn corrupt_line_reports_its_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    let good = serde_json::to_string(&sample(EnvKind::Sudoku, 1, &ScriptedPolicy::OracleFollowing)).unwrap();
    std::fs::write(&path, format!("{good}\n{{not json\n")).unwrap();
    match read_jsonl(&path).unwrap_err() {
        HarnessError::Decode { line, .. } => assert_eq!(line, 2),
        other => panic!("unexpected {other}"),
    }
}
