//! 9×9 Sudoku: grids, solution counting, unique-puzzle generation and the
//! fill dynamics of an episode.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::game::Action;
use crate::seed;

const ALL_DIGITS: u16 = 0b11_1111_1110;
const GENERATION_ATTEMPTS: u64 = 64;

#[inline]
fn box_of(idx: usize) -> usize {
    (idx / 27) * 3 + (idx % 9) / 3
}

/// Row-major 9×9 grid; `0` marks an empty cell.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SudokuGrid([u8; 81]);

impl SudokuGrid {
    pub fn empty() -> Self {
        SudokuGrid([0; 81])
    }

    /// Rejects digits outside 0..=9 and any duplicate within a row, column or box.
    pub fn new(cells: [u8; 81]) -> Result<Self> {
        if let Some(i) = cells.iter().position(|&d| d > 9) {
            return Err(Error::InconsistentGrid(format!("cell {i} holds {}", cells[i])));
        }
        let grid = SudokuGrid(cells);
        grid.masks()?;
        Ok(grid)
    }

    /// Zero-indexed access.
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.0[row * 9 + col]
    }

    pub fn cells(&self) -> &[u8; 81] {
        &self.0
    }

    pub fn empty_count(&self) -> usize {
        self.0.iter().filter(|&&d| d == 0).count()
    }

    pub fn is_full(&self) -> bool {
        self.0.iter().all(|&d| d != 0)
    }

    /// 81 characters, row-major, `.` for empty cells.
    pub fn to_line(&self) -> String {
        self.0
            .iter()
            .map(|&d| if d == 0 { '.' } else { char::from(b'0' + d) })
            .collect()
    }

    /// Row, column and box occupancy bitmasks (bit `d` set when digit `d` is used).
    fn masks(&self) -> Result<Masks> {
        let mut m = Masks::default();
        for (i, &d) in self.0.iter().enumerate() {
            if d == 0 {
                continue;
            }
            let bit = 1u16 << d;
            let (r, c, b) = (i / 9, i % 9, box_of(i));
            if (m.rows[r] | m.cols[c] | m.boxes[b]) & bit != 0 {
                return Err(Error::InconsistentGrid(format!(
                    "digit {d} repeated at row {}, column {}",
                    r + 1,
                    c + 1
                )));
            }
            m.place(i, d);
        }
        Ok(m)
    }

    /// Whether `digit` can be written into the empty cell without a duplicate.
    pub fn admits(&self, row: usize, col: usize, digit: u8) -> bool {
        let idx = row * 9 + col;
        if self.0[idx] != 0 {
            return false;
        }
        (0..9).all(|k| {
            self.0[row * 9 + k] != digit
                && self.0[k * 9 + col] != digit
                && self.0[(row / 3 * 3 + k / 3) * 9 + col / 3 * 3 + k % 3] != digit
        })
    }
}

impl fmt::Debug for SudokuGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SudokuGrid({})", self.to_line())
    }
}

impl fmt::Display for SudokuGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

impl FromStr for SudokuGrid {
    type Err = Error;

    /// Accepts the 81-character form; whitespace is ignored and `0`, `.` or `_` mean empty.
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        if chars.len() != 81 {
            return Err(Error::InvalidArgument(format!(
                "a sudoku grid has 81 cells, got {}",
                chars.len()
            )));
        }
        let mut cells = [0u8; 81];
        for (slot, ch) in cells.iter_mut().zip(chars) {
            *slot = match ch {
                '.' | '_' | '0' => 0,
                '1'..='9' => ch as u8 - b'0',
                other => return Err(Error::InvalidArgument(format!("bad sudoku cell {other:?}"))),
            };
        }
        SudokuGrid::new(cells)
    }
}

#[derive(Default, Clone, Copy)]
struct Masks {
    rows: [u16; 9],
    cols: [u16; 9],
    boxes: [u16; 9],
}

impl Masks {
    #[inline]
    fn place(&mut self, idx: usize, d: u8) {
        let bit = 1u16 << d;
        self.rows[idx / 9] |= bit;
        self.cols[idx % 9] |= bit;
        self.boxes[box_of(idx)] |= bit;
    }

    #[inline]
    fn remove(&mut self, idx: usize, d: u8) {
        let bit = !(1u16 << d);
        self.rows[idx / 9] &= bit;
        self.cols[idx % 9] &= bit;
        self.boxes[box_of(idx)] &= bit;
    }

    #[inline]
    fn candidates(&self, idx: usize) -> u16 {
        ALL_DIGITS & !(self.rows[idx / 9] | self.cols[idx % 9] | self.boxes[box_of(idx)])
    }
}

/// Backtracking search over the most constrained empty cell.
struct Search {
    cells: [u8; 81],
    masks: Masks,
    cap: usize,
    found: usize,
    first: Option<[u8; 81]>,
}

impl Search {
    fn new(grid: &SudokuGrid, cap: usize) -> Result<Self> {
        Ok(Search {
            cells: grid.0,
            masks: grid.masks()?,
            cap,
            found: 0,
            first: None,
        })
    }

    fn most_constrained(&self) -> Option<(usize, u16)> {
        let mut best: Option<(usize, u16)> = None;
        for i in 0..81 {
            if self.cells[i] != 0 {
                continue;
            }
            let cand = self.masks.candidates(i);
            let n = cand.count_ones();
            if best.is_none_or(|(_, b)| n < b.count_ones()) {
                best = Some((i, cand));
                if n <= 1 {
                    break;
                }
            }
        }
        best
    }

    fn run(&mut self) {
        if self.found >= self.cap {
            return;
        }
        let Some((idx, mut cand)) = self.most_constrained() else {
            self.found += 1;
            if self.first.is_none() {
                self.first = Some(self.cells);
            }
            return;
        };
        while cand != 0 {
            let d = cand.trailing_zeros() as u8;
            cand &= cand - 1;
            self.cells[idx] = d;
            self.masks.place(idx, d);
            self.run();
            self.masks.remove(idx, d);
            self.cells[idx] = 0;
            if self.found >= self.cap {
                return;
            }
        }
    }
}

/// Number of completions of `grid`, truncated at `cap`.
pub fn count_solutions(grid: &SudokuGrid, cap: usize) -> Result<usize> {
    let mut search = Search::new(grid, cap)?;
    search.run();
    Ok(search.found)
}

/// The first completion found, if any.
pub fn solve(grid: &SudokuGrid) -> Result<Option<SudokuGrid>> {
    let mut search = Search::new(grid, 1)?;
    search.run();
    Ok(search.first.map(SudokuGrid))
}

fn random_full_grid(rng: &mut seed::Rng) -> SudokuGrid {
    fn fill(cells: &mut [u8; 81], masks: &mut Masks, idx: usize, rng: &mut seed::Rng) -> bool {
        if idx == 81 {
            return true;
        }
        let cand = masks.candidates(idx);
        let mut digits: Vec<u8> = (1..=9).filter(|d| cand & (1 << d) != 0).collect();
        digits.shuffle(rng);
        for d in digits {
            cells[idx] = d;
            masks.place(idx, d);
            if fill(cells, masks, idx + 1, rng) {
                return true;
            }
            masks.remove(idx, d);
            cells[idx] = 0;
        }
        false
    }
    let mut cells = [0u8; 81];
    let mut masks = Masks::default();
    let complete = fill(&mut cells, &mut masks, 0, rng);
    debug_assert!(complete);
    SudokuGrid(cells)
}

fn try_generate(attempt_seed: u64, blanks: usize) -> Option<(SudokuGrid, SudokuGrid)> {
    let mut rng = seed::rng(attempt_seed);
    let solution = random_full_grid(&mut rng);
    let mut puzzle = solution;
    let mut order: Vec<usize> = (0..81).collect();
    order.shuffle(&mut rng);
    let mut removed = 0;
    for idx in order {
        if removed == blanks {
            break;
        }
        let digit = puzzle.0[idx];
        puzzle.0[idx] = 0;
        if count_solutions(&puzzle, 2).ok()? == 1 {
            removed += 1;
        } else {
            puzzle.0[idx] = digit;
        }
    }
    (removed == blanks).then_some((puzzle, solution))
}

/// Episode over a uniquely solvable puzzle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SudokuEpisode {
    puzzle: SudokuGrid,
    solution: SudokuGrid,
    current: SudokuGrid,
    givens_mask: [bool; 81],
}

impl SudokuEpisode {
    /// Starts an episode from a puzzle whose unique completion is `solution`.
    pub fn from_puzzle(puzzle: SudokuGrid, solution: SudokuGrid) -> Result<Self> {
        if count_solutions(&puzzle, 2)? != 1 {
            return Err(Error::InvalidArgument("puzzle does not have a unique solution".into()));
        }
        if solve(&puzzle)? != Some(solution) {
            return Err(Error::InvalidArgument("solution is not the puzzle's completion".into()));
        }
        Ok(Self::new_unchecked(puzzle, solution))
    }

    /// Solves `puzzle` and starts an episode; the puzzle must have exactly one completion.
    pub fn from_unique_puzzle(puzzle: SudokuGrid) -> Result<Self> {
        if count_solutions(&puzzle, 2)? != 1 {
            return Err(Error::InvalidArgument("puzzle does not have a unique solution".into()));
        }
        let solution = solve(&puzzle)?.expect("unique puzzle has a completion");
        Ok(Self::new_unchecked(puzzle, solution))
    }

    fn new_unchecked(puzzle: SudokuGrid, solution: SudokuGrid) -> Self {
        let mut givens_mask = [false; 81];
        for (g, &d) in givens_mask.iter_mut().zip(puzzle.0.iter()) {
            *g = d != 0;
        }
        SudokuEpisode {
            puzzle,
            solution,
            current: puzzle,
            givens_mask,
        }
    }

    pub fn puzzle(&self) -> &SudokuGrid {
        &self.puzzle
    }

    pub fn solution(&self) -> &SudokuGrid {
        &self.solution
    }

    pub fn current(&self) -> &SudokuGrid {
        &self.current
    }

    pub fn givens_mask(&self) -> &[bool; 81] {
        &self.givens_mask
    }

    pub fn initial_blanks(&self) -> usize {
        self.puzzle.empty_count()
    }

    pub fn is_solved(&self) -> bool {
        self.current == self.solution
    }

    /// Grid full, or no empty cell admits any digit.
    pub fn is_terminal(&self) -> bool {
        self.current.is_full() || !self.has_legal_action()
    }

    fn has_legal_action(&self) -> bool {
        let Ok(m) = self.current.masks() else {
            return false;
        };
        (0..81).any(|i| self.current.0[i] == 0 && m.candidates(i) != 0)
    }
}

/// Deterministic puzzle with exactly `blanks` empty cells and a unique solution.
///
/// A random full grid is built by backtracking; cells are then blanked in
/// random order, undoing any removal that admits a second solution. If the
/// target is not reached the whole attempt restarts from a derived seed.
pub fn sudoku_generate(seed: u64, blanks: usize) -> Result<SudokuEpisode> {
    if blanks > 64 {
        return Err(Error::Config(format!("blanks must be at most 64, got {blanks}")));
    }
    for attempt in 0..GENERATION_ATTEMPTS {
        let attempt_seed = if attempt == 0 { seed } else { seed::derive(seed, attempt) };
        if let Some((puzzle, solution)) = try_generate(attempt_seed, blanks) {
            return Ok(SudokuEpisode::new_unchecked(puzzle, solution));
        }
    }
    Err(Error::Generation(format!(
        "no unique puzzle with {blanks} blanks after {GENERATION_ATTEMPTS} attempts from seed {seed}"
    )))
}

pub fn sudoku_legal(ep: &SudokuEpisode) -> Vec<Action> {
    let Ok(m) = ep.current.masks() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for i in 0..81 {
        if ep.current.0[i] != 0 {
            continue;
        }
        let cand = m.candidates(i);
        for d in 1..=9u8 {
            if cand & (1 << d) != 0 {
                out.push(Action::Fill {
                    row: (i / 9 + 1) as u8,
                    col: (i % 9 + 1) as u8,
                    digit: d,
                });
            }
        }
    }
    out
}

/// Zero-indexed cell of a fill action after range checks.
pub(crate) fn fill_target(action: &Action) -> Result<(usize, usize, u8)> {
    let Action::Fill { row, col, digit } = *action else {
        return Err(Error::IllegalMove(format!("{action} is not a sudoku move")));
    };
    if !(1..=9).contains(&row) || !(1..=9).contains(&col) || !(1..=9).contains(&digit) {
        return Err(Error::OutOfRange(format!("{action} is outside the 9x9 grid")));
    }
    Ok((row as usize - 1, col as usize - 1, digit))
}

pub fn sudoku_apply(ep: &SudokuEpisode, action: &Action) -> Result<SudokuEpisode> {
    let (r, c, d) = fill_target(action)?;
    let idx = r * 9 + c;
    if ep.givens_mask[idx] {
        return Err(Error::IllegalMove(format!("({},{}) is a pre-filled cell", r + 1, c + 1)));
    }
    if ep.current.0[idx] != 0 {
        return Err(Error::IllegalMove(format!("({},{}) is already filled", r + 1, c + 1)));
    }
    if !ep.current.admits(r, c, d) {
        return Err(Error::IllegalMove(format!(
            "digit {d} conflicts at ({},{})",
            r + 1,
            c + 1
        )));
    }
    let mut next = ep.clone();
    next.current.0[idx] = d;
    Ok(next)
}

/// Success flag and completion rate: correct agent fills over initial blanks.
pub fn sudoku_metrics(ep: &SudokuEpisode) -> Result<(bool, f64)> {
    if !ep.is_terminal() {
        return Err(Error::NonTerminal);
    }
    Ok(completion(ep))
}

/// Metrics of an episode that ended early (forfeit or horizon): never a success
/// unless solved.
pub fn completion(ep: &SudokuEpisode) -> (bool, f64) {
    let blanks = ep.initial_blanks();
    let correct = (0..81)
        .filter(|&i| !ep.givens_mask[i] && ep.current.0[i] != 0 && ep.current.0[i] == ep.solution.0[i])
        .count();
    let rate = if blanks == 0 { 1.0 } else { correct as f64 / blanks as f64 };
    (ep.is_solved(), rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SAMPLE_PUZZLE: &str =
        "4..95.2.1...36.....6..84953.98.75..2....931.437.62..89.3.24.8....6.1..25...53841.";

    fn fill(row: u8, col: u8, digit: u8) -> Action {
        Action::Fill { row, col, digit }
    }

    #[test]
    fn sample_puzzle_is_unique() {
        let g: SudokuGrid = SAMPLE_PUZZLE.parse().unwrap();
        assert_eq!(g.empty_count(), 40);
        assert_eq!(count_solutions(&g, 2).unwrap(), 1);
        let sol = solve(&g).unwrap().unwrap();
        assert!(sol.is_full());
        for i in 0..81 {
            if g.0[i] != 0 {
                assert_eq!(g.0[i], sol.0[i]);
            }
        }
    }

    #[test]
    fn counting_edge_cases() {
        let g: SudokuGrid = SAMPLE_PUZZLE.parse().unwrap();
        let full = solve(&g).unwrap().unwrap();
        assert_eq!(count_solutions(&full, 2).unwrap(), 1);
        assert_eq!(count_solutions(&SudokuGrid::empty(), 2).unwrap(), 2);
        assert_eq!(count_solutions(&SudokuGrid::empty(), 5).unwrap(), 5);
        let mut bad = [0u8; 81];
        bad[0] = 5;
        bad[1] = 5;
        assert!(matches!(SudokuGrid::new(bad), Err(Error::InconsistentGrid(_))));
    }

    #[test]
    fn generation_is_deterministic_and_unique() {
        let a = sudoku_generate(7, 40).unwrap();
        let b = sudoku_generate(7, 40).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.puzzle().empty_count(), 40);
        assert_eq!(count_solutions(a.puzzle(), 2).unwrap(), 1);
        assert_eq!(solve(a.puzzle()).unwrap().as_ref(), Some(a.solution()));
        assert_ne!(a, sudoku_generate(8, 40).unwrap());
    }

    #[test]
    fn zero_blanks_is_the_solution() {
        let ep = sudoku_generate(7, 0).unwrap();
        assert_eq!(ep.puzzle(), ep.solution());
        assert!(ep.is_terminal());
        assert!(sudoku_legal(&ep).is_empty());
        assert_eq!(sudoku_metrics(&ep).unwrap(), (true, 1.0));
        assert!(matches!(sudoku_generate(7, 65), Err(Error::Config(_))));
    }

    #[test]
    fn legal_actions_respect_constraints() {
        let ep = sudoku_generate(11, 40).unwrap();
        let legal = sudoku_legal(&ep);
        assert!(!legal.is_empty());
        for a in &legal {
            let (r, c, d) = fill_target(a).unwrap();
            assert_eq!(ep.current().get(r, c), 0);
            for k in 0..9 {
                assert_ne!(ep.current().get(r, k), d);
                assert_ne!(ep.current().get(k, c), d);
            }
        }
        // Row 1 of the sample puzzle already holds a 5.
        let sample = SudokuEpisode::from_unique_puzzle(SAMPLE_PUZZLE.parse().unwrap()).unwrap();
        assert!(!sudoku_legal(&sample)
            .iter()
            .any(|a| matches!(a, Action::Fill { row: 1, digit: 5, .. })));
    }

    #[test]
    fn apply_errors() {
        let ep = SudokuEpisode::from_unique_puzzle(SAMPLE_PUZZLE.parse().unwrap()).unwrap();
        // (1,1) holds the given 4.
        assert!(matches!(sudoku_apply(&ep, &fill(1, 1, 4)), Err(Error::IllegalMove(_))));
        // (1,2) is empty but row 1 already has a 9.
        assert!(matches!(sudoku_apply(&ep, &fill(1, 2, 9)), Err(Error::IllegalMove(_))));
        assert!(matches!(sudoku_apply(&ep, &fill(0, 2, 9)), Err(Error::OutOfRange(_))));
        let d = ep.solution().get(0, 1);
        let next = sudoku_apply(&ep, &fill(1, 2, d)).unwrap();
        assert!(matches!(sudoku_apply(&next, &fill(1, 2, d)), Err(Error::IllegalMove(_))));
        assert!(!next.is_terminal());
    }

    #[test]
    fn metrics() {
        let ep = sudoku_generate(3, 40).unwrap();
        assert_eq!(sudoku_metrics(&ep), Err(Error::NonTerminal));
        assert_eq!(completion(&ep), (false, 0.0));
        let mut cur = ep.clone();
        let blanks: Vec<usize> = (0..81).filter(|&i| !ep.givens_mask()[i]).collect();
        for (n, &i) in blanks.iter().enumerate() {
            let d = ep.solution().0[i];
            cur = sudoku_apply(&cur, &fill((i / 9 + 1) as u8, (i % 9 + 1) as u8, d)).unwrap();
            if n == 19 {
                assert_eq!(completion(&cur), (false, 0.5));
            }
        }
        assert_eq!(sudoku_metrics(&cur).unwrap(), (true, 1.0));
    }
}
