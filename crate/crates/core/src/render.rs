//! The `GAME STATE` block shown to agents.
//!
//! Layouts are fixed byte-for-byte, including trailing spaces: the Sudoku
//! header and box separators end in spaces, and every Minesweeper row except
//! the last ends in a single space.

use std::fmt::Write;

use crate::game::{EnvState, Mark};
use crate::minesweeper::{CellView, MineBoard};
use crate::sudoku::SudokuGrid;
use crate::tictactoe::TttState;

pub fn render_observation(state: &EnvState) -> String {
    match state {
        EnvState::TicTacToe(s) => render_tictactoe(s),
        EnvState::Sudoku(ep) => render_sudoku(ep.current()),
        EnvState::Minesweeper(b) => render_minesweeper(b),
    }
}

pub fn render_tictactoe(state: &TttState) -> String {
    let mut out = String::from("  ");
    for c in 0..3 {
        write!(out, "{c:>3}").unwrap();
    }
    for r in 0..3 {
        write!(out, "\n{r:>2}").unwrap();
        for c in 0..3 {
            let sym = match state.cell(r, c) {
                None => '.',
                Some(Mark::X) => 'X',
                Some(Mark::O) => 'O',
            };
            write!(out, "  {sym}").unwrap();
        }
    }
    out
}

pub fn render_sudoku(grid: &SudokuGrid) -> String {
    let mut out = String::new();
    for band in 0..3 {
        out.push_str("   ");
        let cols: Vec<String> = (1..=3).map(|k| format!("C{}", band * 3 + k)).collect();
        out.push_str(&cols.join(" "));
    }
    out.push_str("  ");
    for r in 0..9 {
        if r == 3 || r == 6 {
            out.push_str("\n   ");
            out.push_str(&"- ".repeat(16));
        }
        write!(out, "\nR{}", r + 1).unwrap();
        for c in 0..9 {
            if c == 3 || c == 6 {
                out.push_str(" |");
            }
            match grid.get(r, c) {
                0 => out.push_str("  ."),
                d => write!(out, "  {d}").unwrap(),
            }
        }
    }
    out
}

pub fn render_minesweeper(board: &MineBoard) -> String {
    let obs = board.observation();
    let mut out = String::from("  ");
    for c in 0..obs.cols {
        write!(out, "{c:>3}").unwrap();
    }
    for r in 0..obs.rows {
        write!(out, "\n{r:>2}").unwrap();
        for c in 0..obs.cols {
            match obs.get(r, c) {
                CellView::Hidden => out.push_str("  ."),
                CellView::Flagged => out.push_str("  F"),
                CellView::Revealed(d) => write!(out, "  {d}").unwrap(),
            }
        }
        if r + 1 < obs.rows {
            out.push(' ');
        }
    }
    out
}
