//! Posterior-based verification for Minesweeper.
//!
//! Mine posteriors are exact: every placement of the mines over the
//! unrevealed cells that reproduces all revealed digits is counted. Cells
//! adjacent to a revealed digit (the frontier) are enumerated by
//! backtracking; the remaining unrevealed cells are unconstrained, so a
//! frontier assignment with `k` mines extends to `C(L, n − k)` full
//! configurations over the `L` interior cells. All counts are integers and
//! every probability shares the denominator `|Ω|`, so comparisons between
//! cells are exact comparisons of membership counts.
//!
//! Flags carry no evidence: they neither fix a cell as a mine nor exclude it.

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::game::{Action, OracleMeta, VerifierVerdict};
use crate::minesweeper::{CellView, MineBoard, MineObservation};

/// Exact posterior over the unrevealed cells of an observation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PosteriorMap {
    pub rows: usize,
    pub cols: usize,
    /// `|Ω|`: number of consistent mine configurations.
    pub config_count: u128,
    /// Per cell, the number of configurations with a mine there; `None` for revealed cells.
    pub membership: Vec<Option<u128>>,
    pub remaining_mines: usize,
}

impl PosteriorMap {
    pub fn membership_at(&self, row: usize, col: usize) -> Option<u128> {
        self.membership[row * self.cols + col]
    }

    /// Reduced fraction `(numerator, denominator)`.
    pub fn ratio(&self, row: usize, col: usize) -> Option<(u128, u128)> {
        self.membership_at(row, col).map(|m| {
            let g = m.gcd(&self.config_count);
            (m / g, self.config_count / g)
        })
    }

    pub fn probability(&self, row: usize, col: usize) -> Option<f64> {
        self.membership_at(row, col)
            .map(|m| m as f64 / self.config_count as f64)
    }

    pub fn is_certain_mine(&self, idx: usize) -> bool {
        self.membership[idx] == Some(self.config_count)
    }

    pub fn is_certain_safe(&self, idx: usize) -> bool {
        self.membership[idx] == Some(0)
    }

    /// `Σ membership = remaining_mines · |Ω|`, the integer form of `Σ p = remaining mines`.
    pub fn mass_is_conserved(&self) -> bool {
        let total: u128 = self.membership.iter().flatten().sum();
        total == self.remaining_mines as u128 * self.config_count
    }
}

/// Binomial coefficient; exact for the board sizes used here.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication.
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

struct Constraint {
    cells: Vec<usize>,
    target: u8,
}

struct Enumerator<'a> {
    frontier: &'a [usize],
    /// For each frontier position, the constraints it appears in.
    touches: Vec<Vec<usize>>,
    constraints: Vec<Constraint>,
    placed: Vec<u8>,
    open: Vec<u8>,
    assignment: Vec<bool>,
    n_mines: usize,
    interior: usize,
    config_count: u128,
    frontier_members: Vec<u128>,
    interior_member_total: u128,
}

impl Enumerator<'_> {
    fn run(&mut self, pos: usize, mines: usize) {
        if mines > self.n_mines {
            return;
        }
        if pos == self.frontier.len() {
            let rest = self.n_mines - mines;
            if rest > self.interior {
                return;
            }
            let weight = binomial(self.interior, rest);
            self.config_count += weight;
            for (k, &m) in self.assignment.iter().enumerate() {
                if m {
                    self.frontier_members[k] += weight;
                }
            }
            if rest > 0 {
                // Each interior cell is a mine in C(L-1, rest-1) of the C(L, rest) completions.
                self.interior_member_total += binomial(self.interior - 1, rest - 1);
            }
            return;
        }
        for mine in [false, true] {
            if self.assign(pos, mine) {
                self.assignment[pos] = mine;
                self.run(pos + 1, mines + usize::from(mine));
            }
            self.unassign(pos, mine);
        }
    }

    /// Updates the constraints touched by `pos`; false when one becomes unsatisfiable.
    fn assign(&mut self, pos: usize, mine: bool) -> bool {
        let mut ok = true;
        for &ci in &self.touches[pos] {
            self.open[ci] -= 1;
            if mine {
                self.placed[ci] += 1;
            }
            let target = self.constraints[ci].target;
            if self.placed[ci] > target || self.placed[ci] + self.open[ci] < target {
                ok = false;
            }
        }
        ok
    }

    fn unassign(&mut self, pos: usize, mine: bool) {
        for &ci in &self.touches[pos] {
            self.open[ci] += 1;
            if mine {
                self.placed[ci] -= 1;
            }
        }
    }
}

/// Counts all placements of `n_mines` over the unrevealed cells of `obs`
/// consistent with every revealed digit.
pub fn enumerate_consistent(obs: &MineObservation, n_mines: usize) -> Result<PosteriorMap> {
    let n = obs.rows * obs.cols;
    let hidden = |i: usize| !matches!(obs.cells[i], CellView::Revealed(_));

    let mut constraints = Vec::new();
    for i in 0..n {
        if let CellView::Revealed(d) = obs.cells[i] {
            let cells: Vec<usize> = obs.neighbors(i).filter(|&j| hidden(j)).collect();
            if usize::from(d) > cells.len() {
                return Err(Error::InconsistentObservation);
            }
            constraints.push(Constraint { cells, target: d });
        }
    }

    // Frontier in constraint order so that each constraint closes early.
    let mut position = vec![usize::MAX; n];
    let mut frontier = Vec::new();
    for c in &constraints {
        for &j in &c.cells {
            if position[j] == usize::MAX {
                position[j] = frontier.len();
                frontier.push(j);
            }
        }
    }
    let interior_cells: Vec<usize> = (0..n)
        .filter(|&i| hidden(i) && position[i] == usize::MAX)
        .collect();

    let mut touches = vec![Vec::new(); frontier.len()];
    for (ci, c) in constraints.iter().enumerate() {
        for &j in &c.cells {
            touches[position[j]].push(ci);
        }
    }
    let open = constraints.iter().map(|c| c.cells.len() as u8).collect();
    let mut en = Enumerator {
        frontier: &frontier,
        touches,
        placed: vec![0; constraints.len()],
        open,
        constraints,
        assignment: vec![false; frontier.len()],
        n_mines,
        interior: interior_cells.len(),
        config_count: 0,
        frontier_members: vec![0; frontier.len()],
        interior_member_total: 0,
    };
    en.run(0, 0);
    if en.config_count == 0 {
        return Err(Error::InconsistentObservation);
    }

    let mut membership = vec![None; n];
    for (k, &cell) in frontier.iter().enumerate() {
        membership[cell] = Some(en.frontier_members[k]);
    }
    for &cell in &interior_cells {
        membership[cell] = Some(en.interior_member_total);
    }
    Ok(PosteriorMap {
        rows: obs.rows,
        cols: obs.cols,
        config_count: en.config_count,
        membership,
        remaining_mines: n_mines,
    })
}

pub fn posterior_of(board: &MineBoard) -> Result<PosteriorMap> {
    enumerate_consistent(&board.observation(), board.n_mines())
}

/// Minimum-posterior reveals of unflagged cells, plus flags on unflagged
/// cells that are mines in every consistent configuration.
pub fn oracle_valid_probabilistic(board: &MineBoard, pm: &PosteriorMap) -> Result<Vec<Action>> {
    if board.is_terminal() {
        return Err(Error::Terminal);
    }
    let cols = board.cols();
    let unflagged_hidden = |i: usize| pm.membership[i].is_some() && !board.is_flagged(i / cols, i % cols);
    let min = (0..pm.membership.len())
        .filter(|&i| unflagged_hidden(i))
        .filter_map(|i| pm.membership[i])
        .min();
    let mut out = Vec::new();
    for i in (0..pm.membership.len()).filter(|&i| unflagged_hidden(i)) {
        let (row, col) = ((i / cols) as u8, (i % cols) as u8);
        if pm.membership[i] == min {
            out.push(Action::Reveal { row, col });
        }
        if pm.is_certain_mine(i) {
            out.push(Action::Flag { row, col });
        }
    }
    Ok(out)
}

/// Removing a flag is valid when the cell is not a certain mine.
fn valid_unflags(board: &MineBoard, pm: &PosteriorMap) -> Vec<Action> {
    let cols = board.cols();
    (0..pm.membership.len())
        .filter(|&i| board.is_flagged(i / cols, i % cols) && !pm.is_certain_mine(i))
        .map(|i| Action::Flag {
            row: (i / cols) as u8,
            col: (i % cols) as u8,
        })
        .collect()
}

/// Verdict for `action` taken on `board`. The attached set is the oracle-valid
/// set extended with the valid unflag toggles.
pub fn verdict_probabilistic(board: &MineBoard, action: &Action) -> Result<VerifierVerdict> {
    let (row, col) = match *action {
        Action::Reveal { row, col } | Action::Flag { row, col } => (row as usize, col as usize),
        _ => return Err(Error::IllegalMove(format!("{action} is not a minesweeper move"))),
    };
    if row >= board.rows() || col >= board.cols() {
        return Err(Error::OutOfRange(format!("cell ({row},{col}) is off the board")));
    }
    if board.is_terminal() {
        return Err(Error::IllegalMove("game is over".into()));
    }
    if board.is_revealed(row, col) {
        return Err(Error::IllegalMove(format!("cell ({row},{col}) is revealed")));
    }
    if matches!(action, Action::Reveal { .. }) && board.is_flagged(row, col) {
        return Err(Error::IllegalMove(format!("cell ({row},{col}) is flagged")));
    }
    let pm = posterior_of(board)?;
    let mut set = oracle_valid_probabilistic(board, &pm)?;
    set.extend(valid_unflags(board, &pm));
    let meta = OracleMeta::Posterior {
        config_count: pm.config_count,
        membership: pm.membership_at(row, col),
    };
    Ok(VerifierVerdict::from_set(action, set, Some(meta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minesweeper::{mine_flag, mine_initial, mine_reveal, MineConfig};

    #[test]
    fn fresh_board_is_uniform() {
        let b = mine_initial(1, &MineConfig::default()).unwrap();
        let pm = posterior_of(&b).unwrap();
        assert_eq!(pm.config_count, 53130);
        for r in 0..5 {
            for c in 0..5 {
                assert_eq!(pm.ratio(r, c), Some((1, 5)));
            }
        }
        assert!(pm.mass_is_conserved());
        let set = oracle_valid_probabilistic(&b, &pm).unwrap();
        assert_eq!(set.len(), 25);
        assert!(set.iter().all(|a| matches!(a, Action::Reveal { .. })));
    }

    #[test]
    fn zero_corner_clears_neighbors() {
        let b = MineBoard::from_fixture("...../...../..M../...MM/...MM").unwrap();
        let b = mine_reveal(&b, 0, 0).unwrap();
        let pm = posterior_of(&b).unwrap();
        for (r, c) in [(0, 1), (1, 0), (1, 1)] {
            assert_eq!(pm.membership_at(r, c), Some(0));
        }
        let set = oracle_valid_probabilistic(&b, &pm).unwrap();
        assert_eq!(set.len(), 3);
        assert!(set.iter().all(|a| matches!(a, Action::Reveal { .. })));
    }

    #[test]
    fn two_by_two_one_mine() {
        let b = MineBoard::from_fixture("../.M").unwrap();
        let b = mine_reveal(&b, 0, 0).unwrap();
        let pm = posterior_of(&b).unwrap();
        assert_eq!(pm.config_count, 3);
        for (r, c) in [(0, 1), (1, 0), (1, 1)] {
            assert_eq!(pm.ratio(r, c), Some((1, 3)));
        }
    }

    #[test]
    fn forced_mine_can_be_flagged() {
        // On a 1x4 strip with the mine at (0,2), revealing (0,0) and (0,1)
        // leaves (0,2) as the only hidden neighbour of a "1".
        let b = MineBoard::from_fixture("..M.").unwrap();
        let b = mine_reveal(&b, 0, 0).unwrap();
        let b = mine_reveal(&b, 0, 1).unwrap();
        let pm = posterior_of(&b).unwrap();
        assert_eq!(pm.ratio(0, 2), Some((1, 1)));
        assert_eq!(pm.ratio(0, 3), Some((0, 1)));
        let flag = Action::Flag { row: 0, col: 2 };
        assert!(verdict_probabilistic(&b, &flag).unwrap().valid);
        let reveal = Action::Reveal { row: 0, col: 3 };
        assert!(verdict_probabilistic(&b, &reveal).unwrap().valid);
        let bad_reveal = Action::Reveal { row: 0, col: 2 };
        assert!(!verdict_probabilistic(&b, &bad_reveal).unwrap().valid);

        // Unflagging a certain mine is invalid.
        let flagged = mine_flag(&b, 0, 2).unwrap();
        assert!(!verdict_probabilistic(&flagged, &flag).unwrap().valid);
    }

    #[test]
    fn uncertain_flag_invalid_and_unflag_valid() {
        let b = MineBoard::from_fixture("../.M").unwrap();
        let b = mine_reveal(&b, 0, 0).unwrap();
        let b2 = MineBoard::from_fixture("M./..").unwrap();
        let b2 = mine_reveal(&b2, 1, 1).unwrap();
        // Here every hidden cell has probability 1/3: no flag is valid.
        for (board, (r, c)) in [(&b, (1u8, 1u8)), (&b2, (0, 0))] {
            let flag = Action::Flag { row: r, col: c };
            assert!(!verdict_probabilistic(board, &flag).unwrap().valid);
            let flagged = mine_flag(board, r as usize, c as usize).unwrap();
            let v = verdict_probabilistic(&flagged, &flag).unwrap();
            assert!(v.valid);
            assert!(v.oracle_valid_set.contains(&flag));
        }
    }

    #[test]
    fn half_probability_flag_invalid() {
        // 1x4 strip, mine at (0,0): revealing (0,2) shows 0? No: it neighbours (0,1),(0,3).
        // Use (0,1) showing 1 with hidden neighbours (0,0) and (0,2): each 1/2.
        let b = MineBoard::from_fixture("M...").unwrap();
        let b = mine_reveal(&b, 0, 1).unwrap();
        let b = mine_reveal(&b, 0, 3).unwrap();
        let pm = posterior_of(&b).unwrap();
        assert_eq!(pm.ratio(0, 0), Some((1, 1)));
        assert_eq!(pm.ratio(0, 2), Some((0, 1)));
        let b = MineBoard::from_fixture("M...").unwrap();
        let b = mine_reveal(&b, 0, 1).unwrap();
        let pm = posterior_of(&b).unwrap();
        assert_eq!(pm.ratio(0, 0), Some((1, 2)));
        assert_eq!(pm.ratio(0, 2), Some((1, 2)));
        assert_eq!(pm.ratio(0, 3), Some((0, 1)));
        assert!(!verdict_probabilistic(&b, &Action::Flag { row: 0, col: 0 }).unwrap().valid);
        let set = oracle_valid_probabilistic(&b, &pm).unwrap();
        assert_eq!(set, vec![Action::Reveal { row: 0, col: 3 }]);
    }

    #[test]
    fn impossible_digit_is_inconsistent() {
        let obs = MineObservation {
            rows: 1,
            cols: 2,
            cells: vec![CellView::Revealed(2), CellView::Hidden],
        };
        assert_eq!(enumerate_consistent(&obs, 1), Err(Error::InconsistentObservation));
        let obs = MineObservation {
            rows: 1,
            cols: 3,
            cells: vec![CellView::Revealed(0), CellView::Hidden, CellView::Hidden],
        };
        assert_eq!(enumerate_consistent(&obs, 2), Err(Error::InconsistentObservation));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(25, 5), 53130);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(60, 30), 118264581564861424);
    }
}
