use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed_point::FixedPointConfig;
use crate::linalg::{Mat, SpdMat};
use crate::systems::{DipoleParams, RigidBody};
use crate::tableau::{ButcherTableau, Method, TableauStrings};

/// Default length of long runs.
pub const DEFAULT_STEPS: usize = 10_000;
/// Length of the long runs behind the published drift figures.
pub const LONG_STEPS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Dipole,
    RigidBody,
}

impl SystemKind {
    pub fn name(self) -> &'static str {
        match self {
            SystemKind::Dipole => "dipole",
            SystemKind::RigidBody => "rigid-body",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dipole" => Ok(SystemKind::Dipole),
            "rigid-body" | "rigid_body" | "rigidbody" => Ok(SystemKind::RigidBody),
            other => Err(Error::InvalidArgument(format!(
                "unknown system `{other}` (expected dipole or rigid-body)"
            ))),
        }
    }
}

/// One run configuration. The file form is flat TOML whose keys are the CLI
/// flag names, e.g. `max-iter = 50`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Scenario {
    pub system: SystemKind,
    pub method: Method,
    pub reduced: bool,
    pub h: f64,
    pub steps: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub record_every: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<PathBuf>,

    /// Custom tableau; overrides `method` when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tableau_a: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tableau_b: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tableau_c: Option<Vec<String>>,

    pub mass: f64,
    pub alpha: f64,
    pub charge: f64,
    pub beta: f64,
    pub z: [f64; 3],

    /// Principal moments of the free rigid body.
    pub inertia: [f64; 3],
    /// Initial body momentum of the free rigid body; it starts at `g = I`.
    pub momentum: [f64; 3],
}

impl Default for Scenario {
    fn default() -> Self {
        let d = DipoleParams::default();
        let fp = FixedPointConfig::default();
        Self {
            system: SystemKind::Dipole,
            method: Method::Gl2,
            reduced: false,
            h: 0.01,
            steps: DEFAULT_STEPS,
            tol: fp.tol,
            max_iter: fp.max_iter,
            record_every: 1,
            out: None,
            reference: None,
            tableau_a: None,
            tableau_b: None,
            tableau_c: None,
            mass: d.mass,
            alpha: d.alpha,
            charge: d.charge,
            beta: d.beta,
            z: d.z,
            inertia: [1.0, 2.0, 3.0],
            momentum: [0.4, 1.0, -0.6],
        }
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let sc = Self::from_toml_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario fields are plain data")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidArgument(format!("h must be positive, got {}", self.h)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidArgument("record-every must be at least 1".into()));
        }
        self.fixed_point()?;
        if self.reduced && self.system != SystemKind::RigidBody {
            return Err(Error::InvalidArgument(
                "reduced runs need an SO(3)-invariant system (rigid-body)".into(),
            ));
        }
        if self.tableau_a.is_some() != self.tableau_b.is_some() {
            return Err(Error::InvalidTableau("tableau-a and tableau-b go together".into()));
        }
        self.tableau()?;
        Ok(())
    }

    pub fn fixed_point(&self) -> Result<FixedPointConfig> {
        FixedPointConfig::new(self.tol, self.max_iter)
    }

    pub fn has_custom_tableau(&self) -> bool {
        self.tableau_a.is_some()
    }

    pub fn tableau(&self) -> Result<ButcherTableau> {
        match (&self.tableau_a, &self.tableau_b) {
            (Some(a), Some(b)) => ButcherTableau::try_from(&TableauStrings {
                a: a.clone(),
                b: b.clone(),
                c: self.tableau_c.clone(),
            }),
            _ => Ok(self.method.tableau()),
        }
    }

    /// `custom` for file-supplied tableaux, otherwise the method name.
    pub fn method_label(&self) -> &'static str {
        if self.has_custom_tableau() {
            "custom"
        } else {
            self.method.name()
        }
    }

    pub fn dipole_params(&self) -> DipoleParams {
        DipoleParams {
            mass: self.mass,
            alpha: self.alpha,
            charge: self.charge,
            beta: self.beta,
            z: self.z,
        }
    }

    pub fn rigid_body(&self) -> Result<RigidBody> {
        RigidBody::new(SpdMat::new(Mat::diag(&self.inertia))?)
    }

    /// `h · steps`.
    pub fn horizon(&self) -> f64 {
        self.h * self.steps as f64
    }
}
