//! Trajectory files: one JSON object per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use vpr_core::game::{Trajectory, TurnRecord, VerifierVerdict};
use vpr_core::oracle::verdict_for;

use crate::error::{HarnessError, Result};

/// Writes `trajs` to `path`, replacing it. Returns the number of records.
pub fn write_jsonl(path: &Path, trajs: &[Trajectory]) -> Result<usize> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for t in trajs {
        serde_json::to_writer(&mut w, t).map_err(|e| HarnessError::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| HarnessError::io(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(trajs.len())
}

/// Reads every non-blank line of `path` as a trajectory.
pub fn read_jsonl(path: &Path) -> Result<Vec<Trajectory>> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| HarnessError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let t = serde_json::from_str(&line).map_err(|source| HarnessError::Decode {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        out.push(t);
    }
    Ok(out)
}

/// Recomputes every turn's verdict from the replayed decision states, using
/// the search settings recorded in the trajectory. Turns recorded without a
/// verdict yield `None`.
pub fn reverify(traj: &Trajectory) -> vpr_core::Result<Vec<Option<VerifierVerdict>>> {
    let replay = traj.replay()?;
    let search = traj.verifier.unwrap_or_default();
    traj.turns
        .iter()
        .zip(&replay.decision_states)
        .map(|(rec, state): (&TurnRecord, _)| {
            if rec.verdict.is_none() {
                return Ok(None);
            }
            let cfg = search.with_seed(vpr_core::seed::derive(search.seed, u64::from(rec.turn_index)));
            verdict_for(state, &rec.action, &cfg).map(Some)
        })
        .collect()
}

/// True when re-verification reproduces every recorded verdict and VPR reward.
pub fn reverifies(traj: &Trajectory) -> vpr_core::Result<bool> {
    let fresh = reverify(traj)?;
    Ok(traj.turns.iter().zip(&fresh).all(|(rec, v)| {
        rec.verdict == *v && rec.reward_vpr == v.as_ref().map_or(0, |v| v.reward())
    }))
}
