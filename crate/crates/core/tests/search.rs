use vpr_core::game::{EnvState, Mark};
use vpr_core::oracle::search::{
    disagreement_rate, mcts_search, minimax, minimax_value, reachable_ongoing_states, sample_positions,
    search_oracle_set, SearchVerdictConfig,
};
use vpr_core::oracle::verdict_for;
use vpr_core::tictactoe::{ttt_apply, ttt_initial, ttt_legal, TttState};

#[test]
fn empty_board_is_a_draw() {
    assert_eq!(minimax_value(&ttt_initial()), 0);
    assert_eq!(minimax(&ttt_initial()).optimal_set.len(), 9);
}

#[test]
fn negamax_identity_on_all_reachable_states() {
    let states = reachable_ongoing_states();
    assert_eq!(states.len(), 4520);
    for s in &states {
        let children: Vec<TttState> = ttt_legal(s).unwrap().iter().map(|a| ttt_apply(s, a).unwrap()).collect();
        let best = children.iter().map(|c| -minimax_value(c)).max().unwrap();
        assert_eq!(minimax_value(s), best, "{s:?}");
        for c in children.iter().filter(|c| c.is_terminal()) {
            let expected = if c.winner().is_some() { -1 } else { 0 };
            assert_eq!(minimax_value(c), expected);
        }
    }
}

#[test]
fn optimal_set_is_exactly_the_value_preserving_moves() {
    for s in reachable_ongoing_states().iter().step_by(37) {
        let m = minimax(s);
        for a in ttt_legal(s).unwrap() {
            let keeps = -minimax_value(&ttt_apply(s, &a).unwrap()) == m.value;
            assert_eq!(m.optimal_set.contains(&a), keeps);
        }
    }
}

#[test]
fn winning_move_is_found_with_a_small_budget() {
    // X to move with two in the top row.
    let s = TttState::parse("XX./OO./...").unwrap();
    assert_eq!(s.to_move(), Mark::X);
    let cfg = SearchVerdictConfig::default().with_simulations(200).with_seed(3);
    let set = search_oracle_set(&s, &cfg).unwrap();
    assert_eq!(set, minimax(&s).optimal_set);
}

#[test]
fn search_is_deterministic_in_the_seed() {
    let cfg = SearchVerdictConfig::default().with_simulations(500).with_seed(9);
    let s = ttt_initial();
    assert_eq!(mcts_search(&s, &cfg).unwrap(), mcts_search(&s, &cfg).unwrap());
}

#[test]
fn solver_disagreement_is_small_at_a_large_budget() {
    let positions = sample_positions(60, 17);
    let cfg = SearchVerdictConfig::default().with_simulations(10_000).with_seed(17);
    assert!(disagreement_rate(&cfg, &positions).unwrap() <= 0.05);
}

#[test]
fn verdicts_reject_terminal_and_illegal_moves() {
    let s = TttState::parse("XXX/OO./...").unwrap();
    let a = vpr_core::game::Action::Place { mark: Mark::O, row: 2, col: 2 };
    assert!(verdict_for(&EnvState::TicTacToe(s), &a, &SearchVerdictConfig::default()).is_err());
}
