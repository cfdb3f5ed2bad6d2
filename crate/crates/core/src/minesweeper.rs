//! Minesweeper with single-cell reveals and toggle flags.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::Action;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MineConfig {
    pub rows: usize,
    pub cols: usize,
    pub mines: usize,
    /// Classic auto-reveal of zero regions; off by default.
    #[serde(default)]
    pub flood_fill: bool,
}

impl Default for MineConfig {
    fn default() -> Self {
        MineConfig {
            rows: 5,
            cols: 5,
            mines: 5,
            flood_fill: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MineStatus {
    Ongoing,
    Lost,
    Won,
}

/// What the agent sees in one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellView {
    Hidden,
    Flagged,
    Revealed(u8),
}

/// The observable part of a board.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MineObservation {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<CellView>,
}

impl MineObservation {
    pub fn get(&self, row: usize, col: usize) -> CellView {
        self.cells[row * self.cols + col]
    }

    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = usize> {
        neighbors(self.rows, self.cols, idx)
    }
}

pub(crate) fn neighbors(rows: usize, cols: usize, idx: usize) -> impl Iterator<Item = usize> {
    let (r, c) = ((idx / cols) as isize, (idx % cols) as isize);
    (-1isize..=1)
        .flat_map(move |dr| (-1isize..=1).map(move |dc| (dr, dc)))
        .filter(|&(dr, dc)| dr != 0 || dc != 0)
        .filter_map(move |(dr, dc)| {
            let (nr, nc) = (r + dr, c + dc);
            (nr >= 0 && nc >= 0 && (nr as usize) < rows && (nc as usize) < cols)
                .then(|| nr as usize * cols + nc as usize)
        })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MineBoard {
    config: MineConfig,
    mines: Vec<bool>,
    revealed: Vec<bool>,
    flags: Vec<bool>,
    status: MineStatus,
}

/// Board with mines sampled uniformly without replacement from `seed`.
pub fn mine_initial(seed: u64, config: &MineConfig) -> Result<MineBoard> {
    let n = config.rows * config.cols;
    if n == 0 {
        return Err(Error::Config("board has no cells".into()));
    }
    if config.mines >= n {
        return Err(Error::Config(format!(
            "{} mines do not fit a {}x{} board with a safe cell to spare",
            config.mines, config.rows, config.cols
        )));
    }
    let mut rng = seed::rng(seed);
    let mut mines = vec![false; n];
    for i in index::sample(&mut rng, n, config.mines) {
        mines[i] = true;
    }
    Ok(MineBoard::with_mines(*config, mines))
}

impl MineBoard {
    fn with_mines(config: MineConfig, mines: Vec<bool>) -> Self {
        let n = mines.len();
        MineBoard {
            config,
            mines,
            revealed: vec![false; n],
            flags: vec![false; n],
            status: MineStatus::Ongoing,
        }
    }

    /// Fixture format: rows of `M` (mine) and `.` separated by `/` or newlines.
    pub fn from_fixture(s: &str) -> Result<Self> {
        let rows: Vec<&str> = s
            .split(['/', '\n'])
            .map(str::trim)
            .filter(|r| !r.is_empty())
            .collect();
        let cols = rows.first().map_or(0, |r| r.chars().count());
        if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.chars().count() != cols) {
            return Err(Error::InvalidArgument("fixture rows must be non-empty and equal length".into()));
        }
        let mut mines = Vec::with_capacity(rows.len() * cols);
        for r in &rows {
            for ch in r.chars() {
                mines.push(match ch {
                    'M' | '*' => true,
                    '.' => false,
                    other => {
                        return Err(Error::InvalidArgument(format!("bad fixture cell {other:?}")))
                    }
                });
            }
        }
        let count = mines.iter().filter(|&&m| m).count();
        if count >= mines.len() {
            return Err(Error::Config("fixture has no safe cell".into()));
        }
        let config = MineConfig {
            rows: rows.len(),
            cols,
            mines: count,
            flood_fill: false,
        };
        Ok(MineBoard::with_mines(config, mines))
    }

    pub fn to_fixture(&self) -> String {
        self.mines
            .chunks(self.config.cols)
            .map(|row| row.iter().map(|&m| if m { 'M' } else { '.' }).collect::<String>())
            .collect::<Vec<_>>()
            .join("/")
    }

    pub fn with_flood_fill(mut self, on: bool) -> Self {
        self.config.flood_fill = on;
        self
    }

    pub fn config(&self) -> &MineConfig {
        &self.config
    }

    pub fn rows(&self) -> usize {
        self.config.rows
    }

    pub fn cols(&self) -> usize {
        self.config.cols
    }

    pub fn n_mines(&self) -> usize {
        self.config.mines
    }

    pub fn status(&self) -> MineStatus {
        self.status
    }

    pub fn is_terminal(&self) -> bool {
        self.status != MineStatus::Ongoing
    }

    pub fn is_mine(&self, row: usize, col: usize) -> bool {
        self.mines[row * self.config.cols + col]
    }

    pub fn is_revealed(&self, row: usize, col: usize) -> bool {
        self.revealed[row * self.config.cols + col]
    }

    pub fn is_flagged(&self, row: usize, col: usize) -> bool {
        self.flags[row * self.config.cols + col]
    }

    pub fn safe_cells(&self) -> usize {
        self.mines.len() - self.config.mines
    }

    /// Revealed non-mine cells.
    pub fn revealed_safe(&self) -> usize {
        self.revealed
            .iter()
            .zip(&self.mines)
            .filter(|(&r, &m)| r && !m)
            .count()
    }

    pub fn adjacent_mines(&self, idx: usize) -> u8 {
        neighbors(self.config.rows, self.config.cols, idx)
            .filter(|&j| self.mines[j])
            .count() as u8
    }

    pub fn observation(&self) -> MineObservation {
        let cells = (0..self.mines.len())
            .map(|i| {
                if self.revealed[i] {
                    CellView::Revealed(self.adjacent_mines(i))
                } else if self.flags[i] {
                    CellView::Flagged
                } else {
                    CellView::Hidden
                }
            })
            .collect();
        MineObservation {
            rows: self.config.rows,
            cols: self.config.cols,
            cells,
        }
    }

    /// Reveals on unrevealed unflagged cells and flag toggles on unrevealed cells.
    pub fn legal_actions(&self) -> Vec<Action> {
        if self.is_terminal() {
            return Vec::new();
        }
        let mut out = Vec::new();
        for i in 0..self.mines.len() {
            if self.revealed[i] {
                continue;
            }
            let (row, col) = ((i / self.config.cols) as u8, (i % self.config.cols) as u8);
            if !self.flags[i] {
                out.push(Action::Reveal { row, col });
            }
            out.push(Action::Flag { row, col });
        }
        out
    }

    fn index(&self, row: usize, col: usize) -> Result<usize> {
        if row >= self.config.rows || col >= self.config.cols {
            return Err(Error::OutOfRange(format!(
                "cell ({row},{col}) is outside the {}x{} board",
                self.config.rows, self.config.cols
            )));
        }
        Ok(row * self.config.cols + col)
    }
}

pub fn mine_reveal(board: &MineBoard, row: usize, col: usize) -> Result<MineBoard> {
    let idx = board.index(row, col)?;
    if board.is_terminal() {
        return Err(Error::IllegalMove("game is over".into()));
    }
    if board.revealed[idx] {
        return Err(Error::IllegalMove(format!("cell ({row},{col}) is already revealed")));
    }
    if board.flags[idx] {
        return Err(Error::IllegalMove(format!("cell ({row},{col}) is flagged")));
    }
    let mut next = board.clone();
    next.revealed[idx] = true;
    if next.mines[idx] {
        next.status = MineStatus::Lost;
        return Ok(next);
    }
    if next.config.flood_fill && next.adjacent_mines(idx) == 0 {
        let mut stack = vec![idx];
        while let Some(i) = stack.pop() {
            for j in neighbors(next.config.rows, next.config.cols, i) {
                if next.revealed[j] || next.flags[j] || next.mines[j] {
                    continue;
                }
                next.revealed[j] = true;
                if next.adjacent_mines(j) == 0 {
                    stack.push(j);
                }
            }
        }
    }
    if next.revealed_safe() == next.safe_cells() {
        next.status = MineStatus::Won;
    }
    Ok(next)
}

/// Toggles the flag on an unrevealed cell.
pub fn mine_flag(board: &MineBoard, row: usize, col: usize) -> Result<MineBoard> {
    let idx = board.index(row, col)?;
    if board.is_terminal() {
        return Err(Error::IllegalMove("game is over".into()));
    }
    if board.revealed[idx] {
        return Err(Error::IllegalMove(format!("cell ({row},{col}) is revealed")));
    }
    let mut next = board.clone();
    next.flags[idx] = !next.flags[idx];
    Ok(next)
}

/// Success flag and revealed-safe fraction.
pub fn mine_metrics(board: &MineBoard) -> Result<(bool, f64)> {
    if !board.is_terminal() {
        return Err(Error::NonTerminal);
    }
    Ok(completion(board))
}

/// Metrics for a board in any state (used when the horizon or a forfeit ends the episode).
pub fn completion(board: &MineBoard) -> (bool, f64) {
    (
        board.status == MineStatus::Won,
        board.revealed_safe() as f64 / board.safe_cells() as f64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "M..../.M.../...../..M.M/....M";

    #[test]
    fn initial_is_deterministic() {
        let cfg = MineConfig::default();
        let a = mine_initial(3, &cfg).unwrap();
        let b = mine_initial(3, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mines.iter().filter(|&&m| m).count(), 5);
        assert_eq!(a.revealed.iter().filter(|&&r| r).count(), 0);
        let bad = MineConfig { mines: 25, ..cfg };
        assert!(matches!(mine_initial(3, &bad), Err(Error::Config(_))));
    }

    #[test]
    fn reveal_mine_loses_and_last_safe_wins() {
        let b = MineBoard::from_fixture(FIXTURE).unwrap();
        let lost = mine_reveal(&b, 0, 0).unwrap();
        assert_eq!(lost.status(), MineStatus::Lost);
        assert_eq!(mine_metrics(&lost).unwrap(), (false, 0.0));
        assert!(matches!(mine_reveal(&lost, 0, 1), Err(Error::IllegalMove(_))));

        let mut cur = b.clone();
        for i in 0..25 {
            if !b.mines[i] {
                assert_eq!(cur.status(), MineStatus::Ongoing);
                cur = mine_reveal(&cur, i / 5, i % 5).unwrap();
            }
        }
        assert_eq!(cur.status(), MineStatus::Won);
        assert_eq!(mine_metrics(&cur).unwrap(), (true, 1.0));
    }

    #[test]
    fn adjacency_digit() {
        // (3,3) touches the mines at (3,2), (3,4) and (4,4); (1,0) touches (0,0) and (1,1).
        let b = MineBoard::from_fixture(FIXTURE).unwrap();
        let r = mine_reveal(&b, 1, 0).unwrap();
        assert_eq!(r.observation().get(1, 0), CellView::Revealed(2));
        let r = mine_reveal(&r, 3, 3).unwrap();
        assert_eq!(r.observation().get(3, 3), CellView::Revealed(3));
    }

    #[test]
    fn flag_toggle() {
        let b = MineBoard::from_fixture(FIXTURE).unwrap();
        let f = mine_flag(&b, 2, 2).unwrap();
        assert_eq!(f.observation().get(2, 2), CellView::Flagged);
        assert!(matches!(mine_reveal(&f, 2, 2), Err(Error::IllegalMove(_))));
        assert_eq!(mine_flag(&f, 2, 2).unwrap(), b);
        let r = mine_reveal(&b, 2, 2).unwrap();
        assert!(matches!(mine_flag(&r, 2, 2), Err(Error::IllegalMove(_))));
    }

    #[test]
    fn lost_after_ten_safe_reveals() {
        let b = MineBoard::from_fixture(FIXTURE).unwrap();
        let mut cur = b.clone();
        let safe: Vec<usize> = (0..25).filter(|&i| !b.mines[i]).take(10).collect();
        for i in safe {
            cur = mine_reveal(&cur, i / 5, i % 5).unwrap();
        }
        cur = mine_reveal(&cur, 0, 0).unwrap();
        assert_eq!(mine_metrics(&cur).unwrap(), (false, 0.5));
    }

    #[test]
    fn flood_fill_is_opt_in() {
        let b = MineBoard::from_fixture("M..../...../...../...../.....").unwrap();
        let plain = mine_reveal(&b, 4, 4).unwrap();
        assert_eq!(plain.revealed_safe(), 1);
        let flooded = mine_reveal(&b.clone().with_flood_fill(true), 4, 4).unwrap();
        assert_eq!(flooded.status(), MineStatus::Won);
    }

    #[test]
    fn fixture_round_trip() {
        let b = MineBoard::from_fixture(FIXTURE).unwrap();
        assert_eq!(b.to_fixture(), FIXTURE);
        assert_eq!(b.n_mines(), 5);
    }
}
