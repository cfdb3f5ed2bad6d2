//! Exact 3×3 Tic-Tac-Toe.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Action, Mark};

pub const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TttStatus {
    Ongoing,
    XWins,
    OWins,
    Draw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TttState {
    cells: [Option<Mark>; 9],
    to_move: Mark,
    status: TttStatus,
}

impl Default for TttState {
    fn default() -> Self {
        ttt_initial()
    }
}

pub fn ttt_initial() -> TttState {
    TttState {
        cells: [None; 9],
        to_move: Mark::X,
        status: TttStatus::Ongoing,
    }
}

fn status_of(cells: &[Option<Mark>; 9]) -> TttStatus {
    for line in LINES {
        if let Some(m) = cells[line[0]] {
            if cells[line[1]] == Some(m) && cells[line[2]] == Some(m) {
                return match m {
                    Mark::X => TttStatus::XWins,
                    Mark::O => TttStatus::OWins,
                };
            }
        }
    }
    if cells.iter().all(Option::is_some) {
        TttStatus::Draw
    } else {
        TttStatus::Ongoing
    }
}

impl TttState {
    /// The mark counts must satisfy `#X - #O ∈ {0, 1}`.
    pub fn from_cells(cells: [Option<Mark>; 9]) -> Result<Self> {
        let xs = cells.iter().filter(|c| **c == Some(Mark::X)).count();
        let os = cells.iter().filter(|c| **c == Some(Mark::O)).count();
        if xs != os && xs != os + 1 {
            return Err(Error::InvalidArgument(format!(
                "mark counts X={xs}, O={os} are unreachable"
            )));
        }
        let to_move = if xs == os { Mark::X } else { Mark::O };
        Ok(TttState {
            cells,
            to_move,
            status: status_of(&cells),
        })
    }

    /// Row-major `X`/`O`/`.` cells; whitespace and `/` are ignored.
    pub fn parse(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace() && *c != '/').collect();
        if chars.len() != 9 {
            return Err(Error::InvalidArgument(format!("expected 9 cells, got {}", chars.len())));
        }
        let mut cells = [None; 9];
        for (slot, ch) in cells.iter_mut().zip(chars) {
            *slot = match ch {
                'X' | 'x' => Some(Mark::X),
                'O' | 'o' => Some(Mark::O),
                '.' | '_' | '-' => None,
                other => return Err(Error::InvalidArgument(format!("bad cell {other:?}"))),
            };
        }
        Self::from_cells(cells)
    }

    pub fn cells(&self) -> &[Option<Mark>; 9] {
        &self.cells
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<Mark> {
        self.cells[row * 3 + col]
    }

    pub fn to_move(&self) -> Mark {
        self.to_move
    }

    pub fn status(&self) -> TttStatus {
        self.status
    }

    pub fn is_terminal(&self) -> bool {
        self.status != TttStatus::Ongoing
    }

    pub fn winner(&self) -> Option<Mark> {
        match self.status {
            TttStatus::XWins => Some(Mark::X),
            TttStatus::OWins => Some(Mark::O),
            _ => None,
        }
    }

    pub fn empty_cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..9).filter(move |&i| self.cells[i].is_none())
    }

    pub fn move_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    /// Places the side-to-move's mark on cell `idx` without legality checks
    /// beyond bounds; callers in search code guarantee the cell is empty.
    pub(crate) fn play_index(&self, idx: usize) -> TttState {
        debug_assert!(self.cells[idx].is_none() && !self.is_terminal());
        let mut cells = self.cells;
        cells[idx] = Some(self.to_move);
        TttState {
            cells,
            to_move: self.to_move.other(),
            status: status_of(&cells),
        }
    }

    /// Base-3 encoding (empty=0, X=1, O=2), row-major with cell 0 as the
    /// least significant digit. Unique per board.
    pub fn key(&self) -> u16 {
        self.cells.iter().rev().fold(0u16, |acc, c| {
            acc * 3
                + match c {
                    None => 0,
                    Some(Mark::X) => 1,
                    Some(Mark::O) => 2,
                }
        })
    }
}

pub fn ttt_legal(state: &TttState) -> Result<Vec<Action>> {
    if state.is_terminal() {
        return Err(Error::Terminal);
    }
    let mark = state.to_move;
    Ok(state
        .empty_cells()
        .map(|i| Action::Place {
            mark,
            row: (i / 3) as u8,
            col: (i % 3) as u8,
        })
        .collect())
}

pub fn ttt_apply(state: &TttState, action: &Action) -> Result<TttState> {
    let Action::Place { mark, row, col } = *action else {
        return Err(Error::IllegalMove(format!("{action} is not a tic-tac-toe move")));
    };
    if row > 2 || col > 2 {
        return Err(Error::OutOfRange(format!("cell ({row},{col}) is outside the 3x3 grid")));
    }
    if state.is_terminal() {
        return Err(Error::IllegalMove("game is over".into()));
    }
    if mark != state.to_move {
        return Err(Error::IllegalMove(format!("it is {}'s turn, not {mark}'s", state.to_move)));
    }
    let idx = row as usize * 3 + col as usize;
    if state.cells[idx].is_some() {
        return Err(Error::IllegalMove(format!("cell ({row},{col}) is occupied")));
    }
    Ok(state.play_index(idx))
}

/// Game-theoretic return for `protagonist`: +1 win, 0 draw, −1 loss.
pub fn ttt_return(state: &TttState, protagonist: Mark) -> Result<f64> {
    match state.status {
        TttStatus::Ongoing => Err(Error::NonTerminal),
        TttStatus::Draw => Ok(0.0),
        _ if state.winner() == Some(protagonist) => Ok(1.0),
        _ => Ok(-1.0),
    }
}
