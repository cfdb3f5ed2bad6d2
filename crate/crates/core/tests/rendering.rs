use vpr_core::game::{Action, EnvState, Mark};
use vpr_core::minesweeper::{mine_flag, mine_initial, mine_reveal, MineBoard, MineConfig};
use vpr_core::render::{render_minesweeper, render_sudoku, render_tictactoe};
use vpr_core::sudoku::SudokuGrid;
use vpr_core::tictactoe::{ttt_apply, ttt_initial};

const TICTACTOE_EMPTY: &str = include_str!("fixtures/tictactoe_empty.txt");
const SUDOKU_PUZZLE: &str = include_str!("fixtures/sudoku_puzzle.txt");
const MINESWEEPER_FRESH: &str = include_str!("fixtures/minesweeper_fresh.txt");

/// Digits of the `R1`…`R9` rows of a rendered grid, `.` as 0.
fn grid_from_block(block: &str) -> SudokuGrid {
    let mut cells = [0u8; 81];
    let rows: Vec<&str> = block.lines().filter(|l| l.starts_with('R')).collect();
    assert_eq!(rows.len(), 9);
    for (r, line) in rows.iter().enumerate() {
        let tokens: Vec<&str> = line[2..].split_whitespace().filter(|t| *t != "|").collect();
        assert_eq!(tokens.len(), 9, "{line}");
        for (c, t) in tokens.iter().enumerate() {
            cells[r * 9 + c] = if *t == "." { 0 } else { t.parse().unwrap() };
        }
    }
    SudokuGrid::new(cells).unwrap()
}

#[test]
fn tictactoe_empty_board_is_byte_exact() {
    assert_eq!(render_tictactoe(&ttt_initial()), TICTACTOE_EMPTY);
    assert_eq!(EnvState::TicTacToe(ttt_initial()).render(), TICTACTOE_EMPTY);
}

#[test]
fn sudoku_puzzle_is_byte_exact() {
    let grid = grid_from_block(SUDOKU_PUZZLE);
    assert_eq!(grid.empty_count(), 40);
    assert_eq!(render_sudoku(&grid), SUDOKU_PUZZLE);
}

#[test]
fn fresh_minesweeper_board_is_byte_exact() {
    for seed in 0..20 {
        let board = mine_initial(seed, &MineConfig::default()).unwrap();
        assert_eq!(render_minesweeper(&board), MINESWEEPER_FRESH);
    }
}

#[test]
fn blocks_have_no_trailing_newline() {
    for block in [TICTACTOE_EMPTY, SUDOKU_PUZZLE, MINESWEEPER_FRESH] {
        assert!(!block.ends_with('\n'));
    }
}

#[test]
fn played_tictactoe_board() {
    let s = ttt_apply(&ttt_initial(), &Action::Place { mark: Mark::X, row: 1, col: 1 }).unwrap();
    let s = ttt_apply(&s, &Action::Place { mark: Mark::O, row: 2, col: 0 }).unwrap();
    assert_eq!(
        render_tictactoe(&s),
        "    0  1  2\n 0  .  .  .\n 1  .  X  .\n 2  O  .  ."
    );
}

#[test]
fn minesweeper_digits_flags_and_row_spacing() {
    let board = MineBoard::from_fixture("M..../...../...../...../....M").unwrap();
    let board = mine_reveal(&board, 0, 1).unwrap();
    let board = mine_flag(&board, 0, 0).unwrap();
    let text = render_minesweeper(&board);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], " 0  F  1  .  .  . ");
    assert!(lines[1..4].iter().all(|l| l.ends_with(' ')));
    assert!(!lines[5].ends_with(' '));
}
