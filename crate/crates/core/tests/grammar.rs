use proptest::prelude::*;
use rand::seq::IndexedRandom;
use vpr_core::game::{parse_action, Action, EnvKind, EnvState, EpisodeSetup, Mark};
use vpr_core::seed::rng;
use vpr_core::Error;

/// Every legal action of every state along one random playthrough.
fn legal_actions_along_playout(env: EnvKind, seed: u64) -> Vec<Action> {
    let mut state = EpisodeSetup::default_for(env).initial_state(seed).unwrap();
    let mut r = rng(seed ^ 0x5EED);
    let mut seen = Vec::new();
    while !state.is_terminal() {
        let legal = state.legal_actions();
        seen.extend(legal.iter().copied());
        let a = *legal.choose(&mut r).unwrap();
        state = state.apply(&a).unwrap();
    }
    seen
}

fn assert_round_trips(env: EnvKind, actions: &[Action]) {
    assert!(!actions.is_empty());
    for a in actions {
        assert_eq!(parse_action(&a.to_answer(), env).unwrap(), *a);
        let chatty = format!("Let me think.\nThe best move is clear.\n{}  \n", a.to_answer());
        assert_eq!(parse_action(&chatty, env).unwrap(), *a);
        let json = serde_json::to_string(a).unwrap();
        assert_eq!(serde_json::from_str::<Action>(&json).unwrap(), *a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tictactoe_actions_round_trip(seed in any::<u64>()) {
        assert_round_trips(EnvKind::TicTacToe, &legal_actions_along_playout(EnvKind::TicTacToe, seed));
    }

    #[test]
    fn sudoku_actions_round_trip(seed in 0u64..1_000) {
        assert_round_trips(EnvKind::Sudoku, &legal_actions_along_playout(EnvKind::Sudoku, seed));
    }

    #[test]
    fn minesweeper_actions_round_trip(seed in any::<u64>()) {
        assert_round_trips(EnvKind::Minesweeper, &legal_actions_along_playout(EnvKind::Minesweeper, seed));
    }

    #[test]
    fn arbitrary_text_never_panics(text in ".{0,80}") {
        for env in EnvKind::ALL {
            let _ = parse_action(&text, env);
        }
    }
}

#[test]
fn every_cell_of_each_board_round_trips() {
    for mark in [Mark::X, Mark::O] {
        for row in 0..3 {
            for col in 0..3 {
                let a = Action::Place { mark, row, col };
                assert_eq!(parse_action(&a.to_answer(), EnvKind::TicTacToe).unwrap(), a);
            }
        }
    }
    for row in 1..=9 {
        for col in 1..=9 {
            for digit in 1..=9 {
                let a = Action::Fill { row, col, digit };
                assert_eq!(parse_action(&a.to_answer(), EnvKind::Sudoku).unwrap(), a);
            }
        }
    }
    for row in 0..5 {
        for col in 0..5 {
            for a in [Action::Reveal { row, col }, Action::Flag { row, col }] {
                assert_eq!(parse_action(&a.to_answer(), EnvKind::Minesweeper).unwrap(), a);
            }
        }
    }
}

#[test]
fn malformed_responses() {
    let format = |text: &str, env| matches!(parse_action(text, env), Err(Error::Format(_)));
    assert!(format("<X(0,0)>", EnvKind::TicTacToe));
    assert!(format("<answer><X(0,0)></answer> done", EnvKind::TicTacToe));
    assert!(format("<answer><X(0,0)></answer><answer><X(1,1)></answer>", EnvKind::TicTacToe));
    assert!(format("<answer><X(0,0)>", EnvKind::TicTacToe));
    assert!(format("<answer><reveal(0,0)></answer>", EnvKind::Sudoku));
    assert!(format("<answer>X(0,0)</answer>", EnvKind::TicTacToe));
    assert!(matches!(
        parse_action("<answer><fill(0,1,5)></answer>", EnvKind::Sudoku),
        Err(Error::OutOfRange(_))
    ));
    assert!(matches!(
        parse_action("<answer><X(3,0)></answer>", EnvKind::TicTacToe),
        Err(Error::OutOfRange(_))
    ));
}

#[test]
fn states_render_for_every_env() {
    for env in EnvKind::ALL {
        let s: EnvState = EpisodeSetup::default_for(env).initial_state(3).unwrap();
        assert!(!s.render().is_empty());
    }
}
