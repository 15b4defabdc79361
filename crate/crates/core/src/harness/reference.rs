use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::CotangentState;
use crate::tableau::Method;

use super::report::least_squares_slope;
use super::run::{drive, state_from_parts, trajectory_error};
use super::scenario::{Scenario, SystemKind};

/// What a cached reference solution is keyed by.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceKey {
    pub system: SystemKind,
    pub horizon: f64,
    pub method: Method,
    pub h: f64,
}

impl Default for ReferenceKey {
    fn default() -> Self {
        Self {
            system: SystemKind::Dipole,
            horizon: 0.5,
            method: Method::Gl3,
            h: 0.001,
        }
    }
}

impl ReferenceKey {
    /// Cache file name, e.g. `dipole-T0.5-gl3-h0.001.json`.
    pub fn file_name(&self) -> String {
        format!("{}-T{}-{}-h{}.json", self.system, self.horizon, self.method, self.h)
    }
}

const FORMAT: &str = "polarvi-reference-1";

/// Everything a reference depends on besides the key.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceHeader {
    pub format: String,
    pub key: ReferenceKey,
    pub steps: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub reduced: bool,
    pub mass: f64,
    pub alpha: f64,
    pub charge: f64,
    pub beta: f64,
    pub z: [f64; 3],
    pub inertia: [f64; 3],
    pub momentum: [f64; 3],
}

impl ReferenceHeader {
    fn new(base: &Scenario, key: ReferenceKey) -> Result<Self> {
        Ok(Self {
            format: FORMAT.into(),
            key,
            steps: steps_for(key.horizon, key.h)?,
            tol: base.tol,
            max_iter: base.max_iter,
            reduced: base.reduced,
            mass: base.mass,
            alpha: base.alpha,
            charge: base.charge,
            beta: base.beta,
            z: base.z,
            inertia: base.inertia,
            momentum: base.momentum,
        })
    }

    /// The scenario that produces this reference.
    pub fn scenario(&self) -> Scenario {
        Scenario {
            system: self.key.system,
            method: self.key.method,
            reduced: self.reduced,
            h: self.key.h,
            steps: self.steps,
            tol: self.tol,
            max_iter: self.max_iter,
            mass: self.mass,
            alpha: self.alpha,
            charge: self.charge,
            beta: self.beta,
            z: self.z,
            inertia: self.inertia,
            momentum: self.momentum,
            ..Scenario::default()
        }
    }
}

/// End state of a high-accuracy run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub header: ReferenceHeader,
    /// Row-major end configuration.
    pub g: Vec<f64>,
    /// Upper-triangular entries of the end momentum.
    pub p: Vec<f64>,
}

impl Reference {
    pub fn state(&self) -> Result<CotangentState> {
        state_from_parts(self.g.clone(), &self.p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let r: Reference = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if r.header.format != FORMAT {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                message: format!("unsupported reference format `{}`", r.header.format),
            });
        }
        Ok(r)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// Number of steps of size `h` covering `horizon`; `h` must divide it.
pub fn steps_for(horizon: f64, h: f64) -> Result<usize> {
    if !(h > 0.0 && horizon >= 0.0 && h.is_finite() && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("bad horizon {horizon} or step {h}")));
    }
    let n = (horizon / h).round();
    if (n * h - horizon).abs() > 1e-9 * horizon.max(h) {
        return Err(Error::InvalidArgument(format!(
            "h = {h} does not divide the horizon {horizon}"
        )));
    }
    Ok(n as usize)
}

/// Integrate the reference run for `key` with the physics of `base`.
pub fn make_reference(base: &Scenario, key: ReferenceKey) -> Result<Reference> {
    let header = ReferenceHeader::new(base, key)?;
    let sc = header.scenario();
    let driven = drive(&sc, header.steps, &mut |_, _, _, _| Ok(()))?;
    Ok(Reference {
        header,
        g: driven.last.g.as_slice().to_vec(),
        p: driven.last.p.upper(),
    })
}

/// Read the reference at `path`, or integrate and cache it there if the file
/// is missing. A file for a different key or different physics is an error.
pub fn load_or_make_reference(
    path: &Path,
    base: &Scenario,
    key: ReferenceKey,
) -> Result<(Reference, bool)> {
    if path.exists() {
        let r = Reference::load(path)?;
        let wanted = ReferenceHeader::new(base, key)?;
        if r.header != wanted {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                message: "reference header does not match the requested study".into(),
            });
        }
        return Ok((r, false));
    }
    let r = make_reference(base, key)?;
    r.save(path)?;
    Ok((r, true))
}

/// Default cache location for `key` below `dir`.
pub fn reference_path(dir: &Path, key: &ReferenceKey) -> PathBuf {
    dir.join(key.file_name())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderRow {
    pub h: f64,
    pub steps: usize,
    pub error: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderStudy {
    pub method: String,
    pub horizon: f64,
    pub rows: Vec<OrderRow>,
    /// Inclusive `[min, max]` range of step sizes entering the slope.
    pub window: Option<(f64, f64)>,
    /// Least-squares slope of `log error` against `log h`.
    pub slope: Option<f64>,
}

impl OrderStudy {
    /// `h,steps,error` rows; failed points have an empty error cell.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["h", "steps", "error"])?;
        for r in &self.rows {
            let err = r.error.map_or_else(String::new, |e| format!("{e:.16e}"));
            w.write_record([format!("{:.16e}", r.h), r.steps.to_string(), err])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Integrate `base` to the reference horizon with each step size in `hs` and
/// measure the end-point error. Grid points run concurrently; failed points
/// are recorded and left out of the slope.
pub fn run_order_study(
    base: &Scenario,
    reference: &Reference,
    hs: &[f64],
    window: Option<(f64, f64)>,
) -> Result<OrderStudy> {
    let horizon = reference.header.key.horizon;
    let exact = reference.state()?;
    let mut plans = Vec::with_capacity(hs.len());
    for &h in hs {
        let sc = Scenario {
            h,
            steps: steps_for(horizon, h)?,
            ..base.clone()
        };
        sc.validate()?;
        plans.push(sc);
    }
    let rows: Vec<OrderRow> = std::thread::scope(|scope| {
        let handles: Vec<_> = plans
            .iter()
            .map(|sc| scope.spawn(|| grid_point(sc, &exact)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("grid worker panicked"))
            .collect()
    });
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| window.is_none_or(|(lo, hi)| r.h >= lo * (1.0 - 1e-12) && r.h <= hi * (1.0 + 1e-12)))
        .filter_map(|r| r.error.filter(|e| *e > 0.0).map(|e| (r.h.ln(), e.ln())))
        .unzip();
    let slope = (xs.len() >= 2).then(|| least_squares_slope(&xs, &ys));
    Ok(OrderStudy {
        method: base.method_label().into(),
        horizon,
        rows,
        window,
        slope,
    })
}

fn grid_point(sc: &Scenario, exact: &CotangentState) -> OrderRow {
    let outcome = drive(sc, sc.steps, &mut |_, _, _, _| Ok(()))
        .and_then(|d| trajectory_error(&d.last, exact));
    match outcome {
        Ok(e) => OrderRow { h: sc.h, steps: sc.steps, error: Some(e), failure: None },
        Err(e) => OrderRow { h: sc.h, steps: sc.steps, error: None, failure: Some(e.to_string()) },
    }
}
