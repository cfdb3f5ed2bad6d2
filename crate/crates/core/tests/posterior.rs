//! The frontier enumeration against brute force over every mine placement.

use rand::seq::index;
use rand::Rng;
use vpr_core::minesweeper::{mine_flag, mine_initial, mine_reveal, CellView, MineBoard, MineConfig};
use vpr_core::oracle::posterior::{posterior_of, PosteriorMap};
use vpr_core::seed::{derive, rng};

/// Counts placements of `n` mines consistent with every revealed digit.
fn brute_force(board: &MineBoard) -> (u128, Vec<Option<u128>>) {
    let obs = board.observation();
    let cells = obs.rows * obs.cols;
    let mut count = 0u128;
    let mut membership = vec![0u128; cells];
    for mask in 0u32..(1 << cells) {
        if mask.count_ones() as usize != board.n_mines() {
            continue;
        }
        let mine = |i: usize| mask & (1 << i) != 0;
        let consistent = (0..cells).all(|i| match obs.cells[i] {
            CellView::Revealed(d) => !mine(i) && obs.neighbors(i).filter(|&j| mine(j)).count() == d as usize,
            _ => true,
        });
        if consistent {
            count += 1;
            for (i, m) in membership.iter_mut().enumerate() {
                *m += u128::from(mine(i));
            }
        }
    }
    let membership = (0..cells)
        .map(|i| (!matches!(obs.cells[i], CellView::Revealed(_))).then_some(membership[i]))
        .collect();
    (count, membership)
}

/// A small board with a random subset of its safe cells revealed and a few flags.
fn fixture(seed: u64) -> MineBoard {
    let mut r = rng(seed);
    let rows = r.random_range(1..=4);
    let cols = r.random_range(if rows == 1 { 2 } else { 1 }..=4);
    let mines = r.random_range(0..=3.min(rows * cols - 1));
    let cfg = MineConfig { rows, cols, mines, flood_fill: false };
    let mut board = mine_initial(derive(seed, 1), &cfg).unwrap();
    let safe: Vec<usize> = (0..rows * cols).filter(|&i| !board.is_mine(i / cols, i % cols)).collect();
    let k = r.random_range(0..=safe.len());
    for pick in index::sample(&mut r, safe.len(), k) {
        let i = safe[pick];
        if board.is_terminal() {
            break;
        }
        if !board.is_revealed(i / cols, i % cols) {
            board = mine_reveal(&board, i / cols, i % cols).unwrap();
        }
    }
    if !board.is_terminal() {
        for i in 0..rows * cols {
            if !board.is_revealed(i / cols, i % cols) && r.random_bool(0.2) {
                board = mine_flag(&board, i / cols, i % cols).unwrap();
            }
        }
    }
    board
}

fn assert_matches(board: &MineBoard, pm: &PosteriorMap) {
    let (count, membership) = brute_force(board);
    assert_eq!(pm.config_count, count, "{}", board.to_fixture());
    assert_eq!(pm.membership, membership, "{}", board.to_fixture());
    assert!(pm.mass_is_conserved());
    let total: u128 = pm.membership.iter().flatten().sum();
    assert_eq!(total, board.n_mines() as u128 * pm.config_count);
}

#[test]
fn matches_brute_force_on_random_small_boards() {
    for seed in 0..500 {
        let board = fixture(seed);
        assert_matches(&board, &posterior_of(&board).unwrap());
    }
}

#[test]
fn matches_brute_force_on_full_size_opening_positions() {
    // 5x5 with 5 mines is still small enough for brute force (53130 placements).
    for seed in 0..20 {
        let mut board = mine_initial(seed, &MineConfig::default()).unwrap();
        let mut r = rng(derive(seed, 9));
        for _ in 0..3 {
            let safe: Vec<(usize, usize)> = (0..25)
                .map(|i| (i / 5, i % 5))
                .filter(|&(a, b)| !board.is_mine(a, b) && !board.is_revealed(a, b))
                .collect();
            if board.is_terminal() || safe.is_empty() {
                break;
            }
            let (a, b) = safe[r.random_range(0..safe.len())];
            board = mine_reveal(&board, a, b).unwrap();
        }
        assert_matches(&board, &posterior_of(&board).unwrap());
    }
}

#[test]
fn ratios_are_reduced_fractions() {
    let board = MineBoard::from_fixture("M.../..../..../...M").unwrap();
    let pm = posterior_of(&board).unwrap();
    assert_eq!(pm.ratio(0, 0), Some((1, 8)));
    let board = mine_reveal(&board, 3, 0).unwrap();
    let pm = posterior_of(&board).unwrap();
    assert_eq!(pm.ratio(3, 0), None);
}
