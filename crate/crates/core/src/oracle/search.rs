//! Search-based verification for Tic-Tac-Toe.
//!
//! [`mcts_search`] runs UCT with single-node expansion and uniform-random
//! playouts; the oracle-valid set is the argmax of the root action values.
//! By default the search also runs as an MCTS-Solver: terminal outcomes are
//! proven values that propagate upward (a child proven lost for the mover
//! proves the parent won; all children proven gives the parent the best of
//! them), proven moves report their exact value, and the root spends its
//! budget on moves that are still unproven. Moves of equal game value then
//! tie exactly instead of differing by playout noise.
//! [`minimax`] is the exact reference used to measure how often the search
//! oracle disagrees with perfect play.

use std::collections::HashMap;
use std::sync::OnceLock;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Action, Mark};
use crate::seed::{self, Rng};
use crate::tictactoe::{ttt_initial, TttState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchVerdictConfig {
    pub n_simulations: u32,
    pub uct_c: f64,
    pub tie_tolerance: f64,
    pub seed: u64,
    /// Propagate proven wins, losses and draws up the tree and report proven
    /// values exactly. Without it, moves of equal game value almost never tie
    /// on their playout means, so the argmax set shrinks to one move.
    #[serde(default = "default_solver")]
    pub solver: bool,
}

impl Default for SearchVerdictConfig {
    fn default() -> Self {
        SearchVerdictConfig {
            n_simulations: 10_000,
            uct_c: std::f64::consts::SQRT_2,
            tie_tolerance: 1e-9,
            seed: 0,
            solver: true,
        }
    }
}

fn default_solver() -> bool {
    true
}

impl SearchVerdictConfig {
    pub fn with_simulations(mut self, n: u32) -> Self {
        self.n_simulations = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_simulations == 0 {
            return Err(Error::Config("n_simulations must be at least 1".into()));
        }
        if self.tie_tolerance.is_nan() || self.tie_tolerance < 0.0 {
            return Err(Error::Config("tie_tolerance must be non-negative".into()));
        }
        if self.uct_c.is_nan() || self.uct_c < 0.0 {
            return Err(Error::Config("uct_c must be non-negative".into()));
        }
        Ok(())
    }
}

/// Root statistics for one legal action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionStats {
    pub action: Action,
    pub visits: u32,
    /// Mean playout value for the player to move at the root, in [−1, 1].
    /// `None` until the action has been visited.
    pub mean_value: Option<f64>,
    /// Exact value when the solver proved it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proven: Option<i8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub actions: Vec<ActionStats>,
    pub total_simulations: u32,
}

impl SearchStats {
    pub fn get(&self, action: &Action) -> Option<&ActionStats> {
        self.actions.iter().find(|s| &s.action == action)
    }

    pub fn max_value(&self) -> Option<f64> {
        self.actions
            .iter()
            .filter_map(|s| s.mean_value)
            .max_by(f64::total_cmp)
    }

    /// Visited actions whose value is within `tolerance` of the best.
    pub fn argmax_set(&self, tolerance: f64) -> Vec<Action> {
        let Some(best) = self.max_value() else {
            return Vec::new();
        };
        self.actions
            .iter()
            .filter(|s| s.mean_value.is_some_and(|v| v >= best - tolerance))
            .map(|s| s.action)
            .collect()
    }

    /// Move to play: most visits, ties to the higher value. With proven
    /// values, a proven win beats anything unproven and a proven loss loses to
    /// anything unproven.
    pub fn robust_child(&self) -> Option<Action> {
        let rank = |s: &ActionStats| s.proven.map_or(0, i32::from);
        self.actions
            .iter()
            .max_by(|a, b| {
                rank(a)
                    .cmp(&rank(b))
                    .then(a.visits.cmp(&b.visits))
                    .then(a.mean_value.unwrap_or(-2.0).total_cmp(&b.mean_value.unwrap_or(-2.0)))
                    // Prefer the earlier action on a full tie.
                    .then(b.action.cmp(&a.action))
            })
            .map(|s| s.action)
    }
}

const NO_PARENT: u32 = u32::MAX;

struct Node {
    state: TttState,
    parent: u32,
    cell: u8,
    children: Vec<u32>,
    untried: Vec<u8>,
    visits: u32,
    /// Sum of playout values from the perspective of the player who moved into this node.
    value_sum: f64,
    proven: Option<i8>,
}

impl Node {
    fn new(state: TttState, parent: u32, cell: u8) -> Self {
        let untried = if state.is_terminal() {
            Vec::new()
        } else {
            state.empty_cells().map(|i| i as u8).collect()
        };
        Node {
            state,
            parent,
            cell,
            children: Vec::new(),
            untried,
            visits: 0,
            value_sum: 0.0,
            proven: None,
        }
    }

    fn q(&self) -> f64 {
        match self.proven {
            Some(v) => f64::from(v),
            None => self.value_sum / f64::from(self.visits.max(1)),
        }
    }
}

/// Value of a finished game for the player who made the last move.
fn terminal_value(state: &TttState) -> f64 {
    if state.winner().is_some() {
        1.0
    } else {
        0.0
    }
}

fn rollout(state: &TttState, rng: &mut Rng) -> f64 {
    let mover = state.to_move().other();
    let mut s = *state;
    let mut empties: Vec<usize> = s.empty_cells().collect();
    while !s.is_terminal() {
        let k = rng.random_range(0..empties.len());
        let idx = empties.swap_remove(k);
        s = s.play_index(idx);
    }
    match s.winner() {
        Some(w) if w == mover => 1.0,
        Some(_) => -1.0,
        None => 0.0,
    }
}

struct Tree {
    nodes: Vec<Node>,
    uct_c: f64,
    solver: bool,
}

impl Tree {
    fn select_child(&self, node: usize) -> usize {
        let n = &self.nodes[node];
        let log_n = f64::from(n.visits).ln();
        // The root keeps working on unproven moves once a win is known there,
        // so that every optimal move can end up proven, not just the first.
        let skip_proven = self.solver
            && node == 0
            && n.children.iter().any(|&c| self.nodes[c as usize].proven.is_none());
        let mut best = n.children[0] as usize;
        let mut best_score = f64::NEG_INFINITY;
        for &c in &n.children {
            let child = &self.nodes[c as usize];
            if skip_proven && child.proven.is_some() {
                continue;
            }
            if self.solver && !skip_proven && child.proven == Some(1) {
                return c as usize;
            }
            let score = child.q() + self.uct_c * (log_n / f64::from(child.visits)).sqrt();
            if score > best_score {
                best_score = score;
                best = c as usize;
            }
        }
        best
    }

    fn update_proof(&mut self, node: usize) {
        let n = &self.nodes[node];
        if n.proven.is_some() || n.children.is_empty() {
            return;
        }
        let mut all_proven = n.untried.is_empty();
        let mut best = i8::MIN;
        for &c in &n.children {
            match self.nodes[c as usize].proven {
                Some(1) => {
                    self.nodes[node].proven = Some(-1);
                    return;
                }
                Some(v) => best = best.max(v),
                None => all_proven = false,
            }
        }
        if all_proven {
            self.nodes[node].proven = Some(-best);
        }
    }

    fn simulate(&mut self, rng: &mut Rng) {
        let mut node = 0usize;
        loop {
            let n = &self.nodes[node];
            if n.state.is_terminal() || (self.solver && node != 0 && n.proven.is_some()) {
                break;
            }
            if !n.untried.is_empty() {
                let k = rng.random_range(0..n.untried.len());
                let cell = self.nodes[node].untried.swap_remove(k);
                let state = self.nodes[node].state.play_index(cell as usize);
                let id = self.nodes.len() as u32;
                let mut child = Node::new(state, node as u32, cell);
                if self.solver && state.is_terminal() {
                    child.proven = Some(terminal_value(&state) as i8);
                }
                self.nodes.push(child);
                self.nodes[node].children.push(id);
                node = id as usize;
                break;
            }
            node = self.select_child(node);
        }

        let leaf = &self.nodes[node];
        let mut value = match leaf.proven {
            Some(v) if self.solver => f64::from(v),
            _ if leaf.state.is_terminal() => terminal_value(&leaf.state),
            _ => rollout(&leaf.state, rng),
        };
        let mut cur = node;
        loop {
            let n = &mut self.nodes[cur];
            n.visits += 1;
            n.value_sum += value;
            if self.solver {
                self.update_proof(cur);
            }
            let parent = self.nodes[cur].parent;
            if parent == NO_PARENT {
                break;
            }
            value = -value;
            cur = parent as usize;
        }
    }
}

/// Runs `cfg.n_simulations` UCT iterations from `state`.
pub fn mcts_search(state: &TttState, cfg: &SearchVerdictConfig) -> Result<SearchStats> {
    cfg.validate()?;
    if state.is_terminal() {
        return Err(Error::Terminal);
    }
    let mut rng = seed::rng(cfg.seed);
    let mut tree = Tree {
        nodes: Vec::with_capacity(cfg.n_simulations as usize + 1),
        uct_c: cfg.uct_c,
        solver: cfg.solver,
    };
    tree.nodes.push(Node::new(*state, NO_PARENT, 0));
    for _ in 0..cfg.n_simulations {
        tree.simulate(&mut rng);
    }

    let mark = state.to_move();
    let root = &tree.nodes[0];
    let mut actions: Vec<ActionStats> = state
        .empty_cells()
        .map(|i| ActionStats {
            action: place(mark, i),
            visits: 0,
            mean_value: None,
            proven: None,
        })
        .collect();
    for &c in &root.children {
        let child = &tree.nodes[c as usize];
        let slot = actions
            .iter_mut()
            .find(|s| s.action == place(mark, child.cell as usize))
            .expect("child move is legal at the root");
        slot.visits = child.visits;
        slot.proven = if cfg.solver { child.proven } else { None };
        slot.mean_value = match slot.proven {
            Some(v) => Some(f64::from(v)),
            None if child.visits > 0 => Some(child.value_sum / f64::from(child.visits)),
            None => None,
        };
    }
    Ok(SearchStats {
        actions,
        total_simulations: cfg.n_simulations,
    })
}

fn place(mark: Mark, idx: usize) -> Action {
    Action::Place {
        mark,
        row: (idx / 3) as u8,
        col: (idx % 3) as u8,
    }
}

/// Actions whose value estimate is within the tie tolerance of the maximum.
pub fn search_oracle_set(state: &TttState, cfg: &SearchVerdictConfig) -> Result<Vec<Action>> {
    let stats = mcts_search(state, cfg)?;
    Ok(stats.argmax_set(cfg.tie_tolerance))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimaxResult {
    /// Game-theoretic value for the player to move.
    pub value: i8,
    pub optimal_set: Vec<Action>,
}

fn negamax(state: &TttState, memo: &mut HashMap<u16, i8>) -> i8 {
    if let Some(&v) = memo.get(&state.key()) {
        return v;
    }
    let v = if state.is_terminal() {
        if state.winner().is_some() {
            -1
        } else {
            0
        }
    } else {
        state
            .empty_cells()
            .map(|i| -negamax(&state.play_index(i), memo))
            .max()
            .expect("ongoing state has a move")
    };
    memo.insert(state.key(), v);
    v
}

fn reachable_values() -> &'static HashMap<u16, i8> {
    static TABLE: OnceLock<HashMap<u16, i8>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut memo = HashMap::with_capacity(6000);
        negamax(&ttt_initial(), &mut memo);
        memo
    })
}

/// Exact value of `state` for the player to move.
pub fn minimax_value(state: &TttState) -> i8 {
    if let Some(&v) = reachable_values().get(&state.key()) {
        return v;
    }
    negamax(state, &mut HashMap::new())
}

/// Exact value and every value-maximising move (empty for terminal states).
pub fn minimax(state: &TttState) -> MinimaxResult {
    let value = minimax_value(state);
    if state.is_terminal() {
        return MinimaxResult {
            value,
            optimal_set: Vec::new(),
        };
    }
    let mark = state.to_move();
    let optimal_set = state
        .empty_cells()
        .filter(|&i| -minimax_value(&state.play_index(i)) == value)
        .map(|i| place(mark, i))
        .collect();
    MinimaxResult { value, optimal_set }
}

/// Every ongoing state reachable from the empty board.
pub fn reachable_ongoing_states() -> Vec<TttState> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut stack = vec![ttt_initial()];
    while let Some(s) = stack.pop() {
        if s.is_terminal() || !seen.insert(s.key()) {
            continue;
        }
        out.push(s);
        for i in s.empty_cells() {
            stack.push(s.play_index(i));
        }
    }
    out.sort_by_key(TttState::key);
    out
}

/// `n` positions drawn uniformly, with replacement, from the reachable ongoing states.
pub fn sample_positions(n: usize, seed: u64) -> Vec<TttState> {
    let all = reachable_ongoing_states();
    let mut rng = seed::rng(seed);
    (0..n).map(|_| all[rng.random_range(0..all.len())]).collect()
}

/// Per-position outcome of a disagreement measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct DisagreementSample {
    pub action: Action,
    pub search_valid: bool,
    pub exact_valid: bool,
}

/// Samples one uniform legal action per position and checks whether the
/// search oracle and minimax disagree on its validity.
///
/// The sampled actions depend only on `cfg.seed`, never on the simulation
/// budget, so runs at different budgets are paired.
pub fn disagreement_samples(
    cfg: &SearchVerdictConfig,
    positions: &[TttState],
) -> Result<Vec<DisagreementSample>> {
    if positions.is_empty() {
        return Err(Error::EmptyInput("no positions".into()));
    }
    positions
        .iter()
        .enumerate()
        .map(|(i, pos)| {
            if pos.is_terminal() {
                return Err(Error::Terminal);
            }
            let legal: Vec<usize> = pos.empty_cells().collect();
            let mut pick = seed::rng(seed::derive_path(cfg.seed, &[0xA5, i as u64]));
            let action = place(pos.to_move(), legal[pick.random_range(0..legal.len())]);
            let search_cfg = cfg.with_seed(seed::derive_path(cfg.seed, &[0x5E, i as u64]));
            let search_set = search_oracle_set(pos, &search_cfg)?;
            let exact = minimax(pos);
            Ok(DisagreementSample {
                action,
                search_valid: search_set.contains(&action),
                exact_valid: exact.optimal_set.contains(&action),
            })
        })
        .collect()
}

/// Fraction of sampled (position, action) pairs where the search oracle and
/// minimax disagree.
pub fn disagreement_rate(cfg: &SearchVerdictConfig, positions: &[TttState]) -> Result<f64> {
    let samples = disagreement_samples(cfg, positions)?;
    let bad = samples.iter().filter(|s| s.search_valid != s.exact_valid).count();
    Ok(bad as f64 / samples.len() as f64)
}
