use crate::error::{Error, Result};

use super::StageCache;

/// A one-step map.
pub trait Stepper {
    type State: Clone;

    fn step(&self, state: &Self::State) -> Result<(Self::State, StageCache)>;
}

/// Receives every accepted step. `k` counts steps taken, starting at 1.
pub trait Observer<S> {
    fn observe(&mut self, k: usize, state: &S, cache: &StageCache) -> Result<()>;
}

impl<S, F> Observer<S> for F
where
    F: FnMut(usize, &S, &StageCache) -> Result<()>,
{
    fn observe(&mut self, k: usize, state: &S, cache: &StageCache) -> Result<()> {
        self(k, state, cache)
    }
}

/// Fixed-point effort over a trajectory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IterationStats {
    pub total: usize,
    pub max: usize,
    pub chain_total: usize,
}

impl IterationStats {
    fn record(&mut self, cache: &StageCache) {
        self.total += cache.iterations;
        self.max = self.max.max(cache.iterations);
        self.chain_total += cache.chain_iterations;
    }

    pub fn mean(&self, steps: usize) -> f64 {
        if steps == 0 {
            0.0
        } else {
            self.total as f64 / steps as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    pub initial: S,
    pub last: S,
    pub steps: usize,
    pub iterations: IterationStats,
}

/// Apply `stepper` `steps` times from `initial`, notifying each observer
/// after every step. A failing step is reported with its 1-based index.
pub fn integrate<St: Stepper>(
    stepper: &St,
    initial: St::State,
    steps: usize,
    observers: &mut [&mut dyn Observer<St::State>],
) -> Result<Trajectory<St::State>> {
    let mut state = initial.clone();
    let mut iterations = IterationStats::default();
    for k in 1..=steps {
        let (next, cache) = stepper.step(&state).map_err(|source| Error::StepFailed {
            step: k,
            source: Box::new(source),
        })?;
        iterations.record(&cache);
        for obs in observers.iter_mut() {
            obs.observe(k, &next, &cache)?;
        }
        state = next;
    }
    Ok(Trajectory {
        initial,
        last: state,
        steps,
        iterations,
    })
}
