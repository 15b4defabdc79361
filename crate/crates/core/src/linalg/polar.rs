//! Polar decomposition `A = U·P` by the Newton iteration
//! `U ← ½(U + U⁻ᵀ)`, and the projection `ℙ(A) = U` onto `SO(n)`.

use super::eigen::symmetric_eigen;
use super::mat::{Lu, Mat, RotMat, SpdMat};
use crate::error::{Error, Result};

/// Stop once successive iterates differ by less than this in the 2-norm.
pub const NEWTON_TOL: f64 = 1e-15;
pub const NEWTON_MAX_ITER: usize = 50;

/// Below this change, a non-decreasing step means the iteration has hit the
/// round-off floor.
const ROUNDOFF_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct PolarFactors {
    pub u: RotMat,
    pub p: SpdMat,
    /// Newton steps taken.
    pub iterations: usize,
}

/// Factor `a = u·p` with `u ∈ SO(n)` and `p` symmetric positive definite.
pub fn polar_decompose(a: &Mat) -> Result<PolarFactors> {
    let n = a.dim();
    let det = Lu::factor(n, a.as_slice().to_vec())?.determinant();
    if det < 0.0 {
        return Err(Error::NegativeDeterminant);
    }

    let mut u = a.clone();
    let mut last_change = f64::INFINITY;
    let mut iterations = 0;
    loop {
        if iterations == NEWTON_MAX_ITER {
            return Err(Error::NoConvergence {
                what: "polar Newton iteration",
                iterations,
                last_change,
            });
        }
        iterations += 1;
        let inv_t = u.inverse()?.transpose();
        let next = (&u + &inv_t).scale(0.5);
        let change = (&next - &u).spectral_norm();
        u = next;
        if change < NEWTON_TOL || (change < ROUNDOFF_FLOOR && change >= last_change) {
            break;
        }
        last_change = change;
    }

    let p = u.t_mul(a).symmetrize();
    Ok(PolarFactors {
        u: RotMat::new_unchecked(u),
        p: SpdMat::new_unchecked(p),
        iterations,
    })
}

/// `ℙ(a)`, the orthogonal polar factor.
pub fn polar_project(a: &Mat) -> Result<RotMat> {
    polar_decompose(a).map(|f| f.u)
}

/// `ℙ(I + s) = I` holds exactly when `s` is symmetric with every eigenvalue
/// above −1.
pub fn lemma1_predicate(s: &Mat) -> bool {
    let n = s.dim();
    let scale = s.max_abs().max(1.0);
    for i in 0..n {
        for j in i + 1..n {
            if (s[(i, j)] - s[(j, i)]).abs() > 1e-12 * scale {
                return false;
            }
        }
    }
    let (values, _) = symmetric_eigen(s);
    values.iter().all(|&l| l > -1.0)
}
