//! Action-selection policies usable inside the engine (rollouts, baselines).

use rand::seq::IndexedRandom;

use crate::error::{Error, Result};
use crate::game::{Action, EnvState};
use crate::seed::Rng;

/// Chooses one action in a non-terminal state. Policies draw all randomness
/// from the supplied generator so that callers control determinism.
pub trait Policy: Send {
    fn act(&mut self, state: &EnvState, rng: &mut Rng) -> Result<Action>;

    fn name(&self) -> String;
}

/// Uniform over the legal actions.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformRandom;

impl Policy for UniformRandom {
    fn act(&mut self, state: &EnvState, rng: &mut Rng) -> Result<Action> {
        state.legal_actions().choose(rng).copied().ok_or(Error::Terminal)
    }

    fn name(&self) -> String {
        "uniform_random".into()
    }
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn act(&mut self, state: &EnvState, rng: &mut Rng) -> Result<Action> {
        (**self).act(state, rng)
    }

    fn name(&self) -> String {
        (**self).name()
    }
}
