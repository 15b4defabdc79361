//! Variational polar-decomposition steps on `T*SO(n)` and their reduced
//! Lie–Poisson counterpart, plus a trajectory driver.

mod lie_poisson;
mod trajectory;
mod vpd;

pub use crate::fixed_point::FixedPointConfig;
pub use lie_poisson::{lie_poisson_step, LiePoissonStepper};
pub use trajectory::{integrate, IterationStats, Observer, Stepper, Trajectory};
pub use vpd::{vpd_residuals, vpd_step, VpdResiduals, VpdStepper};

use crate::error::{Error, Result};
use crate::linalg::{hat, RotMat, SkewMat, SpdMat};

/// A point `(g, p)` of `SO(n) × sk(n)`, with `p` the left-trivialized momentum.
#[derive(Clone, Debug, PartialEq)]
pub struct CotangentState {
    pub g: RotMat,
    pub p: SkewMat,
}

/// A reduced momentum `μ ∈ sk(n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedState {
    pub mu: SkewMat,
}

/// Internal stage values of one converged step.
///
/// For a full step `stage_rots` holds `U_i` and `end_rot` holds `g₁`. For a
/// reduced step they hold `Θ_iᵀ` and `f₀ = g₀ᵀg₁`.
#[derive(Clone, Debug)]
pub struct StageCache {
    pub mus: Vec<SkewMat>,
    pub omegas: Vec<SkewMat>,
    pub stage_rots: Vec<RotMat>,
    pub p_factors: Vec<SpdMat>,
    pub lambda: SkewMat,
    pub end_rot: RotMat,
    /// Outer fixed-point sweeps.
    pub iterations: usize,
    /// Inner adjoint-chain sweeps summed over all outer sweeps.
    pub chain_iterations: usize,
}

impl StageCache {
    /// Largest `‖RᵀR − I‖₂` over the stage rotations and the end rotation.
    pub fn max_orthogonality_error(&self) -> f64 {
        self.stage_rots
            .iter()
            .map(|r| r.orthogonality_error())
            .fold(self.end_rot.orthogonality_error(), f64::max)
    }
}

/// Left-trivialized momentum `hat(gᵀp)` from a right-trivialized `p ∈ ℝ³`.
pub fn legendre_convert(g: &RotMat, p_right: [f64; 3]) -> Result<SkewMat> {
    if g.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: g.dim(),
        });
    }
    let body = g.transpose().mul_vec(&p_right);
    Ok(hat([body[0], body[1], body[2]]))
}

pub(crate) fn check_step_inputs(
    tableau: &crate::tableau::ButcherTableau,
    h: f64,
    n: usize,
    momentum: &SkewMat,
    cfg: &FixedPointConfig,
) -> Result<()> {
    cfg.validate()?;
    tableau.validate()?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
    }
    if momentum.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: momentum.dim(),
        });
    }
    if let Some(k) = tableau.b.iter().position(|&b| b == 0.0) {
        return Err(Error::ZeroWeight(k));
    }
    Ok(())
}
