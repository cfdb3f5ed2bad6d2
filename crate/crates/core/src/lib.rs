//! Verifiable process rewards for multi-turn reasoning games.
//!
//! The crate is organised around three densely-verifiable environments
//! (Tic-Tac-Toe, Sudoku, Minesweeper) and one verifier per environment:
//!
//! * [`oracle::search`]: MCTS value estimates with an argmax oracle-valid set,
//!   plus an exact minimax reference.
//! * [`oracle::constraint`]: checks a Sudoku fill against the unique solution.
//! * [`oracle::posterior`]: exact Minesweeper mine posteriors by enumeration.
//!
//! Verdicts turn into dense per-turn rewards in [`reward`], which also holds
//! the outcome and Monte Carlo process-reward baselines, per-turn group
//! normalisation and the clipped surrogate. [`theory`] contains exact and
//! Monte Carlo checks of the policy-gradient identities behind the approach.

pub mod error;
pub mod game;
pub mod minesweeper;
pub mod oracle;
pub mod policy;
pub mod render;
pub mod reward;
pub mod seed;
pub mod sudoku;
pub mod theory;
pub mod tictactoe;

pub use error::{Error, Result};
pub use game::{
    append_turn, parse_action, Action, EnvKind, EnvState, EpisodeSetup, Mark, OracleMeta,
    Outcome, Trajectory, TurnRecord, VerifierVerdict,
};
pub use render::render_observation;
