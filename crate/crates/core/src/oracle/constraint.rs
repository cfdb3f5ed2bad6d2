//! Constraint-based verification for Sudoku: a fill is valid iff it writes
//! the solution digit.

use crate::error::{Error, Result};
use crate::game::{Action, OracleMeta, VerifierVerdict};
use crate::sudoku::{fill_target, SudokuEpisode, SudokuGrid};

/// The unique completion of an episode's puzzle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolutionRef {
    grid: SudokuGrid,
}

impl SolutionRef {
    pub fn new(grid: SudokuGrid) -> Result<Self> {
        if !grid.is_full() {
            return Err(Error::InvalidArgument("solution grid has empty cells".into()));
        }
        Ok(SolutionRef { grid })
    }

    pub fn of(ep: &SudokuEpisode) -> Self {
        SolutionRef {
            grid: *ep.solution(),
        }
    }

    pub fn grid(&self) -> &SudokuGrid {
        &self.grid
    }

    /// Solution digit at 1-indexed (row, col).
    pub fn digit(&self, row: u8, col: u8) -> u8 {
        self.grid.get(row as usize - 1, col as usize - 1)
    }

    pub fn accepts(&self, action: &Action) -> Result<bool> {
        let (r, c, d) = fill_target(action)?;
        Ok(self.grid.get(r, c) == d)
    }
}

/// One action per empty cell of the current grid: its solution digit.
pub fn oracle_valid_constraint(ep: &SudokuEpisode) -> Result<Vec<Action>> {
    if ep.is_terminal() {
        return Err(Error::Terminal);
    }
    Ok(solution_fills(ep))
}

fn solution_fills(ep: &SudokuEpisode) -> Vec<Action> {
    let cur = ep.current();
    let sol = ep.solution();
    (0..81)
        .filter(|&i| cur.cells()[i] == 0)
        .map(|i| Action::Fill {
            row: (i / 9 + 1) as u8,
            col: (i % 9 + 1) as u8,
            digit: sol.cells()[i],
        })
        .collect()
}

/// `valid` is `I(G*[i,j] = d)`; the attached set lists the solution fill of
/// every empty cell of `current`.
pub fn verify_fill(sol: &SolutionRef, current: &SudokuGrid, action: &Action) -> Result<VerifierVerdict> {
    let (r, c, d) = fill_target(action)?;
    let expected = sol.grid.get(r, c);
    let set: Vec<Action> = (0..81)
        .filter(|&i| current.cells()[i] == 0)
        .map(|i| Action::Fill {
            row: (i / 9 + 1) as u8,
            col: (i % 9 + 1) as u8,
            digit: sol.grid.cells()[i],
        })
        .collect();
    let mut verdict = VerifierVerdict::from_set(
        action,
        set,
        Some(OracleMeta::Constraint {
            expected_digit: expected,
        }),
    );
    // Validity is the digit check itself, independent of whether the cell is still open.
    verdict.valid = expected == d;
    Ok(verdict)
}

/// Verdict for an action taken in `ep`.
pub fn verdict_constraint(ep: &SudokuEpisode, action: &Action) -> Result<VerifierVerdict> {
    verify_fill(&SolutionRef::of(ep), ep.current(), action)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sudoku::{count_solutions, solve, sudoku_apply, sudoku_generate, sudoku_legal};

    const SAMPLE_PUZZLE: &str =
        "4..95.2.1...36.....6..84953.98.75..2....931.437.62..89.3.24.8....6.1..25...53841.";

    #[test]
    fn matching_digit_is_valid() {
        let ep = sudoku_generate(5, 40).unwrap();
        let set = oracle_valid_constraint(&ep).unwrap();
        assert_eq!(set.len(), 40);
        for a in &set {
            assert!(verdict_constraint(&ep, a).unwrap().valid);
        }
        let next = sudoku_apply(&ep, &set[0]).unwrap();
        assert_eq!(oracle_valid_constraint(&next).unwrap().len(), 39);
    }

    #[test]
    fn conflicting_digit_is_invalid() {
        let ep = SudokuEpisode::from_unique_puzzle(SAMPLE_PUZZLE.parse().unwrap()).unwrap();
        // Row 1 already contains 9, so 9 cannot be the solution digit of (1,2).
        let a = Action::Fill { row: 1, col: 2, digit: 9 };
        assert!(!verdict_constraint(&ep, &a).unwrap().valid);
        let far = Action::Fill { row: 10, col: 2, digit: 9 };
        assert!(matches!(verdict_constraint(&ep, &far), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn sample_blanks_checked_against_solver() {
        let puzzle: SudokuGrid = SAMPLE_PUZZLE.parse().unwrap();
        assert_eq!(count_solutions(&puzzle, 2).unwrap(), 1);
        let g_star = solve(&puzzle).unwrap().unwrap();
        let sol = SolutionRef::new(g_star).unwrap();
        for i in (0..81).filter(|&i| puzzle.cells()[i] == 0) {
            let a = Action::Fill {
                row: (i / 9 + 1) as u8,
                col: (i % 9 + 1) as u8,
                digit: g_star.cells()[i],
            };
            assert!(verify_fill(&sol, &puzzle, &a).unwrap().valid);
        }
    }

    #[test]
    fn solved_grid_is_terminal() {
        let ep = sudoku_generate(5, 0).unwrap();
        assert_eq!(oracle_valid_constraint(&ep), Err(Error::Terminal));
    }

    #[test]
    fn oracle_fills_are_legal_and_complete_the_grid() {
        let mut ep = sudoku_generate(21, 40).unwrap();
        let mut steps = 0;
        while !ep.is_terminal() {
            let set = oracle_valid_constraint(&ep).unwrap();
            let legal = sudoku_legal(&ep);
            assert!(set.iter().all(|a| legal.contains(a)));
            for a in &legal {
                assert_eq!(verdict_constraint(&ep, a).unwrap().valid, set.contains(a));
            }
            ep = sudoku_apply(&ep, &set[set.len() / 2]).unwrap();
            steps += 1;
        }
        assert_eq!(steps, 40);
        assert!(ep.is_solved());
    }
}
