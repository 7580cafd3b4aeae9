use std::path::PathBuf;

use anyhow::{bail, Result};
use dhap_core::{GridConfig, Tol};

/// Settings shared by every command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub m: u32,
    pub seed: u64,
    pub trials: usize,
    pub tol: Tol,
    /// Accretivity threshold.
    pub c_acc: f64,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { m: 4, seed: 0, trials: 20, tol: Tol::from_env(), c_acc: 0.5, out_dir: None }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            bail!("invalid configuration: trials must be at least 1");
        }
        if !(1..=GridConfig::MAX_M).contains(&self.m) {
            bail!("invalid configuration: M = {} outside 1..={}", self.m, GridConfig::MAX_M);
        }
        if !(self.tol.rel > 0.0 && self.tol.abs > 0.0) {
            bail!("invalid configuration: tolerances must be positive");
        }
        if !(self.c_acc > 0.0 && self.c_acc.is_finite()) {
            bail!("invalid configuration: c_acc must be positive");
        }
        Ok(())
    }

    pub fn grid(&self) -> GridConfig {
        GridConfig::new(self.m).expect("validated grid exponent")
    }

    /// Seed of trial `t`, logged with every failure so it can be replayed.
    pub fn trial_seed(&self, t: usize) -> u64 {
        self.seed.wrapping_add(t as u64)
    }
}
