//! Turn-level rewards and group-relative advantages.
//!
//! Three reward constructions share one trajectory format:
//!
//! * VPR: `r_t = V(s_t, a_t)`, the verifier bit of each turn.
//! * OR: zero everywhere except the last turn, which carries `I(success)`
//!   (the `{-1, 0, 1}` game return for Tic-Tac-Toe).
//! * MC-PR: `r_t = V̂(s_{t+1}) − V̂(s_t)` where `V̂` averages `m` playout
//!   returns and `V̂(s_{T+1})` is the realized return.
//!
//! Advantages are normalised per turn index across a group of trajectories,
//! with no discounting: turn `t` sees only the rewards of turn `t`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{EnvState, Mark, Trajectory};
use crate::policy::Policy;
use crate::seed::{derive_path, rng};
use crate::tictactoe::ttt_return;

pub const DEFAULT_DELTA: f64 = 1e-6;
pub const DEFAULT_MCPR_ROLLOUTS: u32 = 100;
/// Below this many active trajectories a turn uses batch-global statistics.
pub const MIN_GROUP: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardMode {
    Vpr,
    Outcome,
    Mcpr,
}

impl RewardMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RewardMode::Vpr => "vpr",
            RewardMode::Outcome => "outcome",
            RewardMode::Mcpr => "mcpr",
        }
    }
}

impl fmt::Display for RewardMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RewardMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vpr" => Ok(RewardMode::Vpr),
            "outcome" | "or" => Ok(RewardMode::Outcome),
            "mcpr" | "mc-pr" => Ok(RewardMode::Mcpr),
            _ => Err(Error::Config(format!("unknown reward mode `{s}`"))),
        }
    }
}

pub fn vpr_rewards(traj: &Trajectory) -> Result<Vec<u8>> {
    traj.turns
        .iter()
        .map(|t| {
            t.verdict
                .as_ref()
                .map(|v| v.reward())
                .ok_or(Error::MissingVerdict(t.turn_index))
        })
        .collect()
}

pub fn outcome_rewards(traj: &Trajectory) -> Result<Vec<f64>> {
    let outcome = traj.outcome.as_ref().ok_or(Error::NonTerminal)?;
    let mut out = vec![0.0; traj.len()];
    if let Some(last) = out.last_mut() {
        *last = outcome.ret;
    }
    Ok(out)
}

/// Return of a terminal state from the protagonist's point of view.
pub fn terminal_return(state: &EnvState, protagonist: Option<Mark>) -> Result<f64> {
    match state {
        EnvState::TicTacToe(s) => ttt_return(s, protagonist.unwrap_or(Mark::X)),
        EnvState::Sudoku(ep) if ep.is_terminal() => Ok(f64::from(u8::from(ep.is_solved()))),
        EnvState::Minesweeper(b) if b.is_terminal() => {
            Ok(f64::from(u8::from(crate::minesweeper::completion(b).0)))
        }
        _ => Err(Error::NonTerminal),
    }
}

/// Plays `state` out: the protagonist's turns come from `policy`, the
/// Tic-Tac-Toe opponent's from `opponent`. Runs that exhaust `budget`
/// protagonist turns score 0.
fn playout(
    state: &EnvState,
    protagonist: Option<Mark>,
    policy: &mut dyn Policy,
    opponent: &mut dyn Policy,
    budget: usize,
    seed: u64,
) -> Result<i64> {
    let mut rng = rng(seed);
    let mut s = state.clone();
    let mut turns = 0;
    while !s.is_terminal() {
        let ours = match (s.to_move(), protagonist) {
            (Some(m), Some(p)) => m == p,
            _ => true,
        };
        if ours {
            if turns == budget {
                return Ok(0);
            }
            turns += 1;
        }
        let who: &mut dyn Policy = if ours { &mut *policy } else { &mut *opponent };
        let a = who.act(&s, &mut rng)?;
        s = s.apply(&a)?;
    }
    // Returns are integers in all three environments.
    Ok(terminal_return(&s, protagonist)? as i64)
}

/// MC-PR rewards with exact rational values: `V̂(s_t) = values[t] / denominator`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct McprRewards {
    /// `T + 1` value numerators; the last is the realized return times `denominator`.
    pub values: Vec<i64>,
    pub denominator: u32,
}

impl McprRewards {
    pub fn numerators(&self) -> Vec<i64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn rewards(&self) -> Vec<f64> {
        let m = f64::from(self.denominator);
        self.numerators().into_iter().map(|n| n as f64 / m).collect()
    }

    pub fn value(&self, t: usize) -> f64 {
        self.values[t] as f64 / f64::from(self.denominator)
    }
}

/// Estimates `V̂` at every decision state of `traj` with `m` playouts each.
/// Playout `j` from turn `t` is seeded by `(seed, t, j)`, so results do not
/// depend on evaluation order.
pub fn mcpr_rewards(
    traj: &Trajectory,
    policy: &mut dyn Policy,
    opponent: &mut dyn Policy,
    m: u32,
    seed: u64,
) -> Result<McprRewards> {
    if m == 0 {
        return Err(Error::InvalidArgument("at least one rollout is required".into()));
    }
    let outcome = traj.outcome.as_ref().ok_or(Error::NonTerminal)?;
    let replay = traj.replay()?;
    let protagonist = traj.setup.protagonist();
    let horizon = traj.env.horizon();
    let mut values = Vec::with_capacity(traj.len() + 1);
    for (t, state) in replay.decision_states.iter().enumerate() {
        if state.is_terminal() {
            return Err(Error::Replay(format!("turn {} starts from a terminal state", t + 1)));
        }
        let mut sum = 0;
        for j in 0..m {
            let s = derive_path(seed, &[t as u64, u64::from(j)]);
            sum += playout(state, protagonist, policy, opponent, horizon - t, s)?;
        }
        values.push(sum);
    }
    let realized = outcome.ret.round() as i64;
    if realized as f64 != outcome.ret {
        return Err(Error::Replay(format!("non-integer return {}", outcome.ret)));
    }
    values.push(realized * i64::from(m));
    Ok(McprRewards { values, denominator: m })
}

/// Statistics used to normalise one turn index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnStats {
    /// 1-based turn index.
    pub turn: usize,
    /// `|I_t|`.
    pub active: usize,
    pub mean: f64,
    pub std: f64,
    /// Whether `mean`/`std` are the batch-global values.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvantageBatch {
    pub delta: f64,
    pub rewards: Vec<Vec<f64>>,
    pub advantages: Vec<Vec<f64>>,
    pub turns: Vec<TurnStats>,
    pub global_mean: f64,
    pub global_std: f64,
}

/// One exported row of an [`AdvantageBatch`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvantageRecord {
    pub trajectory: usize,
    pub turn: usize,
    pub reward: f64,
    pub mean: f64,
    pub std: f64,
    pub advantage: f64,
    pub fallback: bool,
}

impl AdvantageBatch {
    pub fn records(&self) -> Vec<AdvantageRecord> {
        let mut out = Vec::new();
        for (i, (rs, adv)) in self.rewards.iter().zip(&self.advantages).enumerate() {
            for (t, (&r, &a)) in rs.iter().zip(adv).enumerate() {
                let st = &self.turns[t];
                out.push(AdvantageRecord {
                    trajectory: i,
                    turn: t + 1,
                    reward: r,
                    mean: st.mean,
                    std: st.std,
                    advantage: a,
                    fallback: st.fallback,
                });
            }
        }
        out
    }
}

/// Population mean and standard deviation.
fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.clone().sum::<f64>() / n as f64;
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    (mean, var.sqrt())
}

/// `A_{i,t} = (r_{i,t} − μ_t) / (σ_t + δ)` over the trajectories still active
/// at turn `t`; turns with fewer than four active trajectories use the mean and
/// standard deviation of every reward in the batch instead.
pub fn normalize_advantages(rewards: &[Vec<f64>], delta: f64) -> Result<AdvantageBatch> {
    if rewards.is_empty() {
        return Err(Error::EmptyInput("advantage batch has no trajectories".into()));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let (global_mean, global_std) = mean_std(rewards.iter().flatten().copied());
    let horizon = rewards.iter().map(Vec::len).max().unwrap_or(0);
    let turns: Vec<TurnStats> = (0..horizon)
        .map(|t| {
            let column = rewards.iter().filter_map(move |r| r.get(t).copied());
            let active = column.clone().count();
            let fallback = active < MIN_GROUP;
            let (mean, std) = if fallback {
                (global_mean, global_std)
            } else {
                mean_std(column)
            };
            TurnStats { turn: t + 1, active, mean, std, fallback }
        })
        .collect();
    let advantages = rewards
        .iter()
        .map(|rs| {
            rs.iter()
                .zip(&turns)
                .map(|(&r, st)| (r - st.mean) / (st.std + delta))
                .collect()
        })
        .collect();
    Ok(AdvantageBatch {
        delta,
        rewards: rewards.to_vec(),
        advantages,
        turns,
        global_mean,
        global_std,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateInputs {
    pub ratios: Vec<Vec<f64>>,
    pub advantages: Vec<Vec<f64>>,
    pub epsilon: f64,
}

/// One clipped term `min(ρA, clip(ρ, 1−ε, 1+ε)·A)`.
pub fn clipped_term(rho: f64, adv: f64, epsilon: f64) -> f64 {
    (rho * adv).min(rho.clamp(1.0 - epsilon, 1.0 + epsilon) * adv)
}

/// Mean over trajectories of the per-trajectory sum of clipped terms.
pub fn clipped_surrogate(inp: &SurrogateInputs) -> Result<f64> {
    if inp.ratios.len() != inp.advantages.len() {
        return Err(Error::Shape(format!(
            "{} ratio rows vs {} advantage rows",
            inp.ratios.len(),
            inp.advantages.len()
        )));
    }
    if inp.ratios.is_empty() {
        return Err(Error::EmptyInput("surrogate has no trajectories".into()));
    }
    if !(inp.epsilon > 0.0 && inp.epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon {} outside (0, 1)", inp.epsilon)));
    }
    let mut total = 0.0;
    for (i, (rs, adv)) in inp.ratios.iter().zip(&inp.advantages).enumerate() {
        if rs.len() != adv.len() {
            return Err(Error::Shape(format!(
                "trajectory {i}: {} ratios vs {} advantages",
                rs.len(),
                adv.len()
            )));
        }
        for (&rho, &a) in rs.iter().zip(adv) {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(Error::InvalidArgument(format!("ratio {rho} is not positive")));
            }
            total += clipped_term(rho, a, inp.epsilon);
        }
    }
    Ok(total / inp.ratios.len() as f64)
}

/// Reward of each turn under `mode`, for modes that need no rollouts.
pub fn static_rewards(traj: &Trajectory, mode: RewardMode) -> Result<Vec<f64>> {
    match mode {
        RewardMode::Vpr => Ok(vpr_rewards(traj)?.into_iter().map(f64::from).collect()),
        RewardMode::Outcome => outcome_rewards(traj),
        RewardMode::Mcpr => Err(Error::InvalidArgument(
            "mcpr rewards need a rollout policy".into(),
        )),
    }
}
