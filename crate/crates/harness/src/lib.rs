//! Episode harness for verifiable process rewards: scripted policies,
//! evaluation, persistence and the agent wire protocol.

pub mod ablate;
pub mod config;
pub mod episode;
pub mod error;
pub mod eval;
pub mod persist;
pub mod policies;
pub mod prompt;
pub mod protocol;
pub mod server;

pub use error::{HarnessError, Result};
