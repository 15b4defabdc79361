//! Shared stopping rule for every fixed-point loop in the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Changes below this are at the round-off floor of O(1) quantities; if the
/// change stops shrinking there the loop is declared converged.
const ROUNDOFF_FLOOR: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointConfig {
    /// Every variable's change between sweeps must drop below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            tol: 1e-15,
            max_iter: 100,
        }
    }
}

impl FixedPointConfig {
    pub fn new(tol: f64, max_iter: usize) -> Result<Self> {
        let cfg = Self { tol, max_iter };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

pub(crate) struct Tracker {
    what: &'static str,
    cfg: FixedPointConfig,
    iterations: usize,
    last_change: f64,
    stalled: usize,
}

impl Tracker {
    pub(crate) fn new(what: &'static str, cfg: FixedPointConfig) -> Self {
        Self {
            what,
            cfg,
            iterations: 0,
            last_change: f64::INFINITY,
            stalled: 0,
        }
    }

    pub(crate) fn iterations(&self) -> usize {
        self.iterations
    }

    /// Records the largest change of one sweep. `Ok(true)` means converged.
    pub(crate) fn record(&mut self, change: f64) -> Result<bool> {
        self.iterations += 1;
        if !change.is_finite() {
            return Err(Error::NoConvergence {
                what: self.what,
                iterations: self.iterations,
                last_change: change,
            });
        }
        if change < self.cfg.tol {
            self.last_change = change;
            return Ok(true);
        }
        if change < ROUNDOFF_FLOOR && change >= self.last_change {
            self.stalled += 1;
        } else {
            self.stalled = 0;
        }
        self.last_change = change;
        if self.stalled >= 2 {
            return Ok(true);
        }
        if self.iterations >= self.cfg.max_iter {
            return Err(Error::NoConvergence {
                what: self.what,
                iterations: self.iterations,
                last_change: change,
            });
        }
        Ok(false)
    }
}
