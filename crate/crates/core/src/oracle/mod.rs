//! The three verifiers.

pub mod constraint;
pub mod posterior;
pub mod search;

use crate::error::{Error, Result};
use crate::game::{Action, EnvState, OracleMeta, VerifierVerdict};
use search::{mcts_search, SearchVerdictConfig};

/// Verdict for `action` in `state` from the environment's verifier. Tic-Tac-Toe
/// searches with `search` (including its seed); the other two are exact.
pub fn verdict_for(state: &EnvState, action: &Action, search: &SearchVerdictConfig) -> Result<VerifierVerdict> {
    match state {
        EnvState::TicTacToe(s) => {
            if !state.legal_actions().contains(action) {
                return Err(Error::IllegalMove(format!("{action} is not legal here")));
            }
            let stats = mcts_search(s, search)?;
            let set = stats.argmax_set(search.tie_tolerance);
            Ok(VerifierVerdict::from_set(action, set, Some(OracleMeta::Search(stats))))
        }
        EnvState::Sudoku(ep) => constraint::verdict_constraint(ep, action),
        EnvState::Minesweeper(b) => posterior::verdict_probabilistic(b, action),
    }
}
