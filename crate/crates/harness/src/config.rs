//! TOML configuration file. Every key is optional; command-line flags override
//! whatever the file sets.
//!
//! ```toml
//! [eval]
//! env = "sudoku"
//! n_games = 1024
//! n_runs = 5
//! seat = "second"
//! base_seed = 7
//! opponent = { kind = "mcts_player", search = { n_simulations = 10000, uct_c = 1.4142135623730951, tie_tolerance = 1e-9, seed = 0 } }
//!
//! [episode]
//! reward_mode = "vpr"
//! mcpr_rollouts = 100
//!
//! [ablate]
//! budgets = [100, 1000, 10000]
//!
//! [serve]
//! idle_timeout_secs = 600
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ablate::AblateConfig;
use crate::episode::EpisodeConfig;
use crate::error::{HarnessError, Result};
use crate::eval::EvalConfig;
use crate::server::ServeConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub episode: EpisodeConfig,
    pub eval: EvalConfig,
    pub ablate: AblateConfig,
    pub serve: ServeConfig,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// The file at `path`, or defaults when no path is given.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}
