use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Response text does not contain exactly one well-formed action.
    #[error("format error: {0}")]
    Format(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("sequence error: {0}")]
    Sequence(String),
    #[error("illegal move: {0}")]
    IllegalMove(String),
    /// The operation needs an ongoing state but the game is over.
    #[error("state is terminal")]
    Terminal,
    #[error("state is not terminal")]
    NonTerminal,
    #[error("inconsistent sudoku grid: {0}")]
    InconsistentGrid(String),
    #[error("sudoku generation failed: {0}")]
    Generation(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    /// No mine placement reproduces the revealed digits.
    #[error("observation admits no consistent mine configuration")]
    InconsistentObservation,
    #[error("turn {0} carries no verdict")]
    MissingVerdict(u32),
    #[error("replay failed: {0}")]
    Replay(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
