use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Configuration and momentum columns of a record, for `n = 3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateColumns {
    /// Row-major `g`.
    pub g: [f64; 9],
    /// `vee(p)`.
    pub p: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Record {
    pub step: usize,
    pub t: f64,
    /// `|H_k − H₀|`.
    pub energy_err: f64,
    /// `‖g_k g_kᵀ − I‖₂`.
    pub ortho_err: f64,
    pub state: Option<StateColumns>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub system: String,
    pub method: String,
    pub reduced: bool,
    pub h: f64,
    pub steps: usize,
    pub final_time: f64,
    pub initial_energy: f64,
    pub max_energy_err: f64,
    pub final_energy_err: f64,
    /// Least-squares slope of the energy error per step over the records.
    pub energy_drift_slope: f64,
    /// Largest orthogonality defect of any configuration or internal stage.
    pub max_ortho_err: f64,
    pub final_ortho_err: f64,
    pub mean_iterations: f64,
    pub max_iterations: usize,
    pub chain_iterations: usize,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorReport {
    pub records: Vec<Record>,
    pub summary: Summary,
}

const BASE_HEADER: [&str; 4] = ["step", "t", "energy_err", "ortho_err"];
const STATE_HEADER: [&str; 12] = [
    "g00", "g01", "g02", "g10", "g11", "g12", "g20", "g21", "g22", "p0", "p1", "p2",
];

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write records as CSV. State columns are written when the first record
/// carries them.
pub fn write_csv<W: Write>(out: W, records: &[Record]) -> Result<()> {
    let with_state = records.first().is_some_and(|r| r.state.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = BASE_HEADER.to_vec();
    if with_state {
        header.extend(STATE_HEADER);
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.step.to_string(), fmt(r.t), fmt(r.energy_err), fmt(r.ortho_err)];
        if with_state {
            let s = r.state.ok_or_else(|| {
                Error::InvalidArgument(format!("record {} has no state columns", r.step))
            })?;
            row.extend(s.g.iter().chain(&s.p).map(|&x| fmt(x)));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<Record>> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    let with_state = match header.len() {
        4 => false,
        16 => true,
        n => return Err(Error::InvalidArgument(format!("unexpected CSV width {n}"))),
    };
    let expected = BASE_HEADER.iter().chain(if with_state { &STATE_HEADER[..] } else { &[] });
    if !header.iter().map(String::as_str).eq(expected.copied()) {
        return Err(Error::InvalidArgument(format!("unexpected CSV header {header:?}")));
    }
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| Error::InvalidArgument(format!("`{s}` is not a number")))
    };
    let mut records = Vec::new();
    for row in rd.records() {
        let row = row?;
        let step = row[0]
            .parse::<usize>()
            .map_err(|_| Error::InvalidArgument(format!("`{}` is not a step index", &row[0])))?;
        let state = if with_state {
            let mut g = [0.0; 9];
            let mut p = [0.0; 3];
            for (k, x) in g.iter_mut().enumerate() {
                *x = num(&row[4 + k])?;
            }
            for (k, x) in p.iter_mut().enumerate() {
                *x = num(&row[13 + k])?;
            }
            Some(StateColumns { g, p })
        } else {
            None
        };
        records.push(Record {
            step,
            t: num(&row[1])?,
            energy_err: num(&row[2])?,
            ortho_err: num(&row[3])?,
            state,
        });
    }
    Ok(records)
}

/// Least-squares slope of `ys` against `xs`; zero for fewer than two points.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return 0.0;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for k in 0..n {
        sxy += (xs[k] - mx) * (ys[k] - my);
        sxx += (xs[k] - mx) * (xs[k] - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
