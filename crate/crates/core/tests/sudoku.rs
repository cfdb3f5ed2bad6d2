use rand::seq::IndexedRandom;
use vpr_core::game::Action;
use vpr_core::oracle::constraint::{oracle_valid_constraint, verdict_constraint};
use vpr_core::seed::rng;
use vpr_core::sudoku::{count_solutions, sudoku_apply, sudoku_generate, sudoku_legal, sudoku_metrics};

#[test]
fn generated_puzzles_have_forty_blanks_and_one_solution() {
    for seed in 0..100 {
        let ep = sudoku_generate(seed, 40).unwrap();
        assert_eq!(ep.puzzle().empty_count(), 40, "seed {seed}");
        assert_eq!(count_solutions(ep.puzzle(), 2).unwrap(), 1, "seed {seed}");
        assert!(ep.solution().is_full());
    }
}

#[test]
fn generation_is_deterministic_in_the_seed() {
    assert_eq!(sudoku_generate(11, 40).unwrap(), sudoku_generate(11, 40).unwrap());
    assert_ne!(
        sudoku_generate(11, 40).unwrap().puzzle(),
        sudoku_generate(12, 40).unwrap().puzzle()
    );
}

#[test]
fn following_the_oracle_solves_every_puzzle() {
    for seed in 0..100 {
        let mut ep = sudoku_generate(seed, 40).unwrap();
        let mut r = rng(seed);
        let mut turns = 0;
        while !ep.is_terminal() {
            let set = oracle_valid_constraint(&ep).unwrap();
            let a = *set.choose(&mut r).unwrap();
            assert!(verdict_constraint(&ep, &a).unwrap().valid);
            ep = sudoku_apply(&ep, &a).unwrap();
            turns += 1;
        }
        assert_eq!(turns, 40);
        assert_eq!(sudoku_metrics(&ep).unwrap(), (true, 1.0));
    }
}

#[test]
fn a_wrong_fill_leaves_no_solution() {
    let mut checked = 0;
    for seed in 0.. {
        let ep = sudoku_generate(1000 + seed, 40).unwrap();
        let wrong: Vec<Action> = sudoku_legal(&ep)
            .into_iter()
            .filter(|a| !verdict_constraint(&ep, a).unwrap().valid)
            .collect();
        let Some(&a) = wrong.choose(&mut rng(seed)) else { continue };
        let next = sudoku_apply(&ep, &a).unwrap();
        assert_eq!(count_solutions(next.current(), 2).unwrap(), 0, "{a} on seed {seed}");
        checked += 1;
        if checked == 50 {
            break;
        }
    }
}

#[test]
fn conflicting_and_occupied_fills_are_illegal() {
    let ep = sudoku_generate(5, 40).unwrap();
    let given = (0..81).find(|&i| ep.puzzle().cells()[i] != 0).unwrap();
    let a = Action::Fill { row: (given / 9 + 1) as u8, col: (given % 9 + 1) as u8, digit: 1 };
    assert!(sudoku_apply(&ep, &a).is_err());
    assert!(!sudoku_legal(&ep).contains(&a));
}
