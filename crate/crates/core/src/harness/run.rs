use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{
    integrate, CotangentState, IterationStats, LiePoissonStepper, Observer, ReducedState,
    StageCache, VpdStepper,
};
use crate::linalg::{hat, vee, RotMat, SkewMat};
use crate::systems::{Dipole, Invariant, LeftTrivHamiltonian, ReducedHamiltonian};

use super::report::{least_squares_slope, ErrorReport, Record, StateColumns, Summary};
use super::scenario::{Scenario, SystemKind};

pub(crate) struct Driven {
    pub initial_energy: f64,
    pub last: CotangentState,
    pub iterations: IterationStats,
}

type Visit<'a> = dyn FnMut(usize, &CotangentState, &StageCache, f64) -> Result<()> + 'a;

/// Initial state of a scenario's system.
pub fn initial_state(sc: &Scenario) -> Result<CotangentState> {
    match sc.system {
        SystemKind::Dipole => Ok(Dipole::new(sc.dipole_params())?.initial_state()),
        SystemKind::RigidBody => Ok(CotangentState {
            g: RotMat::identity(3),
            p: hat(sc.momentum),
        }),
    }
}

/// Run `steps` steps of `sc`, handing every state and its energy to `visit`.
/// Reduced runs reconstruct `g_{k+1} = g_k f₀`.
pub(crate) fn drive(sc: &Scenario, steps: usize, visit: &mut Visit<'_>) -> Result<Driven> {
    sc.validate()?;
    let tableau = sc.tableau()?;
    let cfg = sc.fixed_point()?;
    let start = initial_state(sc)?;
    match (sc.system, sc.reduced) {
        (SystemKind::Dipole, false) => {
            let sys = Dipole::new(sc.dipole_params())?;
            full_run(&sys, VpdStepper { system: &sys, tableau, h: sc.h, cfg }, start, steps, visit)
        }
        (SystemKind::RigidBody, false) => {
            let sys = Invariant(sc.rigid_body()?);
            full_run(&sys, VpdStepper { system: &sys, tableau, h: sc.h, cfg }, start, steps, visit)
        }
        (SystemKind::RigidBody, true) => {
            let body = sc.rigid_body()?;
            let stepper = LiePoissonStepper { system: &body, tableau, h: sc.h, cfg };
            let initial_energy = body.energy(&start.p)?;
            let mut g = start.g.clone();
            let mut obs = |k: usize, s: &ReducedState, c: &StageCache| {
                g = g.compose(&c.end_rot);
                let full = CotangentState { g: g.clone(), p: s.mu.clone() };
                visit(k, &full, c, body.energy(&s.mu)?)
            };
            let traj = integrate(
                &stepper,
                ReducedState { mu: start.p.clone() },
                steps,
                &mut [&mut obs as &mut dyn Observer<ReducedState>],
            )?;
            Ok(Driven {
                initial_energy,
                last: CotangentState { g, p: traj.last.mu },
                iterations: traj.iterations,
            })
        }
        (SystemKind::Dipole, true) => Err(Error::InvalidArgument(
            "reduced runs need an SO(3)-invariant system (rigid-body)".into(),
        )),
    }
}

fn full_run<H: LeftTrivHamiltonian + ?Sized>(
    sys: &H,
    stepper: VpdStepper<'_, H>,
    start: CotangentState,
    steps: usize,
    visit: &mut Visit<'_>,
) -> Result<Driven> {
    let initial_energy = sys.energy(&start.g, &start.p)?;
    let mut obs = |k: usize, s: &CotangentState, c: &StageCache| {
        visit(k, s, c, sys.energy(&s.g, &s.p)?)
    };
    let traj = integrate(
        &stepper,
        start,
        steps,
        &mut [&mut obs as &mut dyn Observer<CotangentState>],
    )?;
    Ok(Driven {
        initial_energy,
        last: traj.last,
        iterations: traj.iterations,
    })
}

/// Integrate a scenario and collect per-record errors; `with_state` adds the
/// configuration and momentum columns.
pub fn simulate(sc: &Scenario, with_state: bool) -> Result<(ErrorReport, CotangentState)> {
    let clock = Instant::now();
    let mut records = Vec::new();
    let mut energies = Vec::new();
    let mut max_ortho = 0.0_f64;
    let steps = sc.steps;
    let every = sc.record_every;
    let h = sc.h;
    let driven = {
        let mut visit = |k: usize, s: &CotangentState, c: &StageCache, e: f64| -> Result<()> {
            let ortho = s.g.orthogonality_error();
            max_ortho = max_ortho.max(ortho).max(c.max_orthogonality_error());
            energies.push(e);
            if k.is_multiple_of(every) || k == steps {
                let state = if with_state { Some(state_columns(s)?) } else { None };
                records.push(Record { step: k, t: k as f64 * h, energy_err: e, ortho_err: ortho, state });
            }
            Ok(())
        };
        drive(sc, steps, &mut visit)?
    };
    for r in &mut records {
        r.energy_err = (r.energy_err - driven.initial_energy).abs();
    }
    let max_energy_err = energies
        .iter()
        .map(|e| (e - driven.initial_energy).abs())
        .fold(0.0, f64::max);
    let xs: Vec<f64> = records.iter().map(|r| r.step as f64).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.energy_err).collect();
    let summary = Summary {
        system: sc.system.name().into(),
        method: sc.method_label().into(),
        reduced: sc.reduced,
        h,
        steps,
        final_time: sc.horizon(),
        initial_energy: driven.initial_energy,
        max_energy_err,
        final_energy_err: records.last().map_or(0.0, |r| r.energy_err),
        energy_drift_slope: least_squares_slope(&xs, &ys),
        max_ortho_err: max_ortho,
        final_ortho_err: records.last().map_or(0.0, |r| r.ortho_err),
        mean_iterations: driven.iterations.mean(steps),
        max_iterations: driven.iterations.max,
        chain_iterations: driven.iterations.chain_total,
        wall_seconds: clock.elapsed().as_secs_f64(),
    };
    Ok((ErrorReport { records, summary }, driven.last))
}

/// Energy and orthogonality errors without state columns.
pub fn run_energy_drift(sc: &Scenario) -> Result<ErrorReport> {
    simulate(sc, false).map(|(report, _)| report)
}

fn state_columns(s: &CotangentState) -> Result<StateColumns> {
    let p = vee(&s.p)?;
    let g: [f64; 9] = s
        .g
        .as_slice()
        .try_into()
        .map_err(|_| Error::DimensionMismatch { expected: 3, found: s.g.dim() })?;
    Ok(StateColumns { g, p })
}

/// `‖vee(p_a) − vee(p_b)‖₂ + ‖g_a − g_b‖₂`.
pub fn trajectory_error(a: &CotangentState, b: &CotangentState) -> Result<f64> {
    if a.g.dim() != b.g.dim() || a.p.dim() != b.p.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.g.dim(),
            found: b.g.dim(),
        });
    }
    Ok((&a.p - &b.p).norm() + (&*a.g - &*b.g).spectral_norm())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub system: String,
    pub method: String,
    pub h: f64,
    pub steps: usize,
    pub repeats: usize,
    pub mean_seconds: f64,
    pub min_seconds: f64,
    pub samples: Vec<f64>,
}

/// Wall-clock time of whole integrations, repeated `repeats` times.
pub fn bench(sc: &Scenario, repeats: usize) -> Result<BenchSummary> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    let mut samples = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let clock = Instant::now();
        drive(sc, sc.steps, &mut |_, _, _, _| Ok(()))?;
        samples.push(clock.elapsed().as_secs_f64());
    }
    Ok(BenchSummary {
        system: sc.system.name().into(),
        method: sc.method_label().into(),
        h: sc.h,
        steps: sc.steps,
        repeats,
        mean_seconds: samples.iter().sum::<f64>() / repeats as f64,
        min_seconds: samples.iter().copied().fold(f64::INFINITY, f64::min),
        samples,
    })
}

pub(crate) fn state_from_parts(g: Vec<f64>, p_upper: &[f64]) -> Result<CotangentState> {
    let n = (g.len() as f64).sqrt().round() as usize;
    let g = RotMat::new(crate::linalg::Mat::from_vec(n, g)?)?;
    let p = SkewMat::from_upper(n, p_upper)?;
    Ok(CotangentState { g, p })
}
