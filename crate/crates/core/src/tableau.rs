//! Butcher tableaux, their symplectic partners, and a linear-space
//! partitioned Runge–Kutta step used to validate them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed_point::{FixedPointConfig, Tracker};

const CONSISTENCY_TOL: f64 = 1e-15;

/// Coefficients `(a, b, c)` of an `s`-stage Runge–Kutta method.
#[derive(Clone, Debug, PartialEq)]
pub struct ButcherTableau {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

/// The built-in schemes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Implicit midpoint, order 2.
    Gl1,
    /// Kutta's explicit third-order method.
    Rk3,
    /// Two-stage Gauss–Legendre, order 4.
    Gl2,
    /// Three-stage Gauss–Legendre, order 6.
    Gl3,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Gl1, Method::Rk3, Method::Gl2, Method::Gl3];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gl1 => "gl1",
            Method::Rk3 => "rk3",
            Method::Gl2 => "gl2",
            Method::Gl3 => "gl3",
        }
    }

    /// Classical order of the underlying Runge–Kutta scheme.
    pub fn order(self) -> u32 {
        match self {
            Method::Gl1 => 2,
            Method::Rk3 => 3,
            Method::Gl2 => 4,
            Method::Gl3 => 6,
        }
    }

    pub fn tableau(self) -> ButcherTableau {
        builtin_tableau(self)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gl1" => Ok(Method::Gl1),
            "rk3" => Ok(Method::Rk3),
            "gl2" => Ok(Method::Gl2),
            "gl3" => Ok(Method::Gl3),
            other => Err(Error::UnknownTableau(other.to_string())),
        }
    }
}

/// Look up a built-in tableau by name.
pub fn builtin(name: &str) -> Result<ButcherTableau> {
    name.parse::<Method>().map(builtin_tableau)
}

fn builtin_tableau(method: Method) -> ButcherTableau {
    let t = match method {
        Method::Gl1 => ButcherTableau {
            a: vec![vec![0.5]],
            b: vec![1.0],
            c: vec![0.5],
        },
        Method::Rk3 => ButcherTableau {
            a: vec![
                vec![0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0],
                vec![-1.0, 2.0, 0.0],
            ],
            b: vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            c: vec![0.0, 0.5, 1.0],
        },
        Method::Gl2 => {
            let r = 3.0_f64.sqrt() / 6.0;
            ButcherTableau {
                a: vec![vec![0.25, 0.25 - r], vec![0.25 + r, 0.25]],
                b: vec![0.5, 0.5],
                c: vec![0.5 - r, 0.5 + r],
            }
        }
        Method::Gl3 => {
            let r = 15.0_f64.sqrt();
            ButcherTableau {
                a: vec![
                    vec![5.0 / 36.0, 2.0 / 9.0 - r / 15.0, 5.0 / 36.0 - r / 30.0],
                    vec![5.0 / 36.0 + r / 24.0, 2.0 / 9.0, 5.0 / 36.0 - r / 24.0],
                    vec![5.0 / 36.0 + r / 30.0, 2.0 / 9.0 + r / 15.0, 5.0 / 36.0],
                ],
                b: vec![5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0],
                c: vec![0.5 - r / 10.0, 0.5, 0.5 + r / 10.0],
            }
        }
    };
    debug_assert!(t.validate().is_ok());
    t
}

impl ButcherTableau {
    /// Validated construction; `Σ b_i = 1` and `c_i = Σ_j a_ij` must hold to 1e-15.
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let t = Self { a, b, c };
        t.validate()?;
        Ok(t)
    }

    /// Like [`ButcherTableau::new`] with `c` taken as the row sums of `a`.
    pub fn from_ab(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let c = a.iter().map(|row| row.iter().sum()).collect();
        Self::new(a, b, c)
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.b.len();
        if s == 0 {
            return Err(Error::InvalidTableau("no stages".into()));
        }
        if self.a.len() != s || self.c.len() != s || self.a.iter().any(|r| r.len() != s) {
            return Err(Error::InvalidTableau(format!("shape must be {s}×{s}")));
        }
        let all = self.a.iter().flatten().chain(&self.b).chain(&self.c);
        if all.clone().any(|x| !x.is_finite()) {
            return Err(Error::InvalidTableau("non-finite coefficient".into()));
        }
        let sum_b: f64 = self.b.iter().sum();
        if (sum_b - 1.0).abs() > CONSISTENCY_TOL {
            return Err(Error::InvalidTableau(format!("weights sum to {sum_b}, not 1")));
        }
        for (i, (row, ci)) in self.a.iter().zip(&self.c).enumerate() {
            let row_sum: f64 = row.iter().sum();
            if (row_sum - ci).abs() > CONSISTENCY_TOL {
                return Err(Error::InvalidTableau(format!(
                    "c[{i}] = {ci} but row {i} of a sums to {row_sum}"
                )));
            }
        }
        Ok(())
    }

    /// `Σ_i b_i c_i^k`, the quadrature moment probed by the bushy-tree order
    /// conditions.
    pub fn moment(&self, k: i32) -> f64 {
        self.b.iter().zip(&self.c).map(|(b, c)| b * c.powi(k)).sum()
    }

    /// Partner coefficients `ã_ij = b_j (1 − a_ji / b_i)` for the momentum
    /// stages of the symplectic partitioned scheme.
    pub fn sprk_partner(&self) -> Result<ButcherTableau> {
        if let Some(i) = self.b.iter().position(|&b| b == 0.0) {
            return Err(Error::ZeroWeight(i));
        }
        let s = self.stages();
        let a: Vec<Vec<f64>> = (0..s)
            .map(|i| {
                (0..s)
                    .map(|j| self.b[j] * (1.0 - self.a[j][i] / self.b[i]))
                    .collect()
            })
            .collect();
        let c = a.iter().map(|row| row.iter().sum()).collect();
        Ok(ButcherTableau {
            a,
            b: self.b.clone(),
            c,
        })
    }

    /// Coefficients as decimal strings with 17 significant digits.
    pub fn to_strings(&self) -> TableauStrings {
        let fmt = |x: &f64| format!("{x:.16e}");
        TableauStrings {
            a: self.a.iter().map(|r| r.iter().map(fmt).collect()).collect(),
            b: self.b.iter().map(fmt).collect(),
            c: Some(self.c.iter().map(fmt).collect()),
        }
    }
}

/// Serialized form of a tableau: arrays of decimal strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableauStrings {
    pub a: Vec<Vec<String>>,
    pub b: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<String>>,
}

impl TryFrom<&TableauStrings> for ButcherTableau {
    type Error = Error;
    fn try_from(t: &TableauStrings) -> Result<Self> {
        let parse = |s: &String| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidTableau(format!("`{s}` is not a number")))
        };
        let a = t
            .a
            .iter()
            .map(|row| row.iter().map(parse).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let b = t.b.iter().map(parse).collect::<Result<Vec<_>>>()?;
        match &t.c {
            Some(c) => ButcherTableau::new(a, b, c.iter().map(parse).collect::<Result<_>>()?),
            None => ButcherTableau::from_ab(a, b),
        }
    }
}

/// A mechanical system on a linear space, given through its Legendre data.
pub trait LinearSystem {
    /// Velocity `q̇` whose momentum `∂L/∂q̇(q, q̇)` equals `p`.
    fn velocity(&self, q: &[f64], p: &[f64]) -> Vec<f64>;
    /// Force `∂L/∂q(q, q̇)`.
    fn force(&self, q: &[f64], qdot: &[f64]) -> Vec<f64>;
}

/// One step of the symplectic partitioned Runge–Kutta method built from `t`
/// and its partner, solved by fixed-point iteration on the stage velocities
/// and forces.
pub fn sprk_step(
    t: &ButcherTableau,
    sys: &impl LinearSystem,
    q0: &[f64],
    p0: &[f64],
    h: f64,
    cfg: &FixedPointConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if q0.len() != p0.len() {
        return Err(Error::DimensionMismatch {
            expected: q0.len(),
            found: p0.len(),
        });
    }
    let partner = t.sprk_partner()?;
    let s = t.stages();
    let d = q0.len();
    let stage = |base: &[f64], coeffs: &[f64], rates: &[Vec<f64>]| -> Vec<f64> {
        (0..d)
            .map(|k| base[k] + h * coeffs.iter().zip(rates).map(|(c, r)| c * r[k]).sum::<f64>())
            .collect()
    };

    let mut qdots = vec![sys.velocity(q0, p0); s];
    let mut pdots = vec![sys.force(q0, &qdots[0]); s];
    let mut tracker = Tracker::new("partitioned Runge–Kutta stages", *cfg);
    loop {
        let mut change = 0.0_f64;
        for i in 0..s {
            let q = stage(q0, &t.a[i], &qdots);
            let p = stage(p0, &partner.a[i], &pdots);
            let qdot = sys.velocity(&q, &p);
            let pdot = sys.force(&q, &qdot);
            change = change.max(max_diff(&qdot, &qdots[i])).max(max_diff(&pdot, &pdots[i]));
            qdots[i] = qdot;
            pdots[i] = pdot;
        }
        if tracker.record(change)? {
            break;
        }
    }
    Ok((stage(q0, &t.b, &qdots), stage(p0, &t.b, &pdots)))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
