//! Lyapunov and Sylvester solves with skew unknowns.
//!
//! Two structured cases appear in the integrators:
//!
//! * `P·X + X·P + C = 0` with `P` symmetric positive definite. This is the
//!   tangent map of the polar projection and its adjoint. It decouples in the
//!   eigenbasis of `P`: `X̃_ij = −C̃_ij / (λ_i + λ_j)`.
//! * `M·Λ + Λ·Mᵀ = R` with `M` a rotation close to the identity, the
//!   multiplier equation of the variational step. It is assembled as a dense
//!   `n² × n²` system.

use super::eigen::symmetric_eigen;
use super::mat::{Lu, Mat, RotMat, SkewMat, SpdMat};
use crate::error::{Error, Result};

/// Largest dimension accepted by [`sylvester_rot`].
pub const SYLVESTER_MAX_DIM: usize = 16;

/// A symmetric positive-definite coefficient in its eigenbasis, ready for
/// repeated Lyapunov solves.
#[derive(Clone, Debug)]
pub struct SpdEigen {
    values: Vec<f64>,
    vectors: Mat,
}

impl SpdEigen {
    pub fn new(p: &SpdMat) -> Result<Self> {
        let (values, vectors) = symmetric_eigen(p);
        let max = values.iter().copied().fold(0.0_f64, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if !(2.0 * min > f64::EPSILON * max) {
            return Err(Error::NearSingular(2.0 * min));
        }
        Ok(Self { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// Solve `P·X + X·P + C = 0`.
    pub fn solve(&self, c: &SkewMat) -> SkewMat {
        let v = &self.vectors;
        let rotated = &v.t_mul(c) * v;
        let scaled = Mat::from_fn(self.dim(), |i, j| {
            -rotated[(i, j)] / (self.values[i] + self.values[j])
        });
        SkewMat::project(&(v * &scaled.mul_t(v)))
    }
}

/// `X = Lyap(P, C)`: the skew solution of `P·X + X·P + C = 0`.
pub fn lyap_spd(p: &SpdMat, c: &SkewMat) -> Result<SkewMat> {
    if p.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: c.dim(),
        });
    }
    Ok(SpdEigen::new(p)?.solve(c))
}

/// Skew `Λ` with `asym(M·Λ) = M·Λ + Λ·Mᵀ = R`.
pub fn sylvester_rot(m: &RotMat, r: &SkewMat) -> Result<SkewMat> {
    let n = m.dim();
    if r.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: r.dim(),
        });
    }
    if n > SYLVESTER_MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "sylvester_rot supports n ≤ {SYLVESTER_MAX_DIM}, got {n}"
        )));
    }
    let distance = (&**m - &Mat::identity(n)).spectral_norm();
    if !(distance < 1.0) {
        return Err(Error::IllConditioned(distance));
    }

    // Row-major vec: X_ij ↦ i·n + j.
    let nn = n * n;
    let mut k = vec![0.0; nn * nn];
    for i in 0..n {
        for j in 0..n {
            let row = (i * n + j) * nn;
            for l in 0..n {
                k[row + l * n + j] += m[(i, l)];
                k[row + i * n + l] += m[(j, l)];
            }
        }
    }
    let lu = Lu::factor(nn, k).map_err(|_| Error::IllConditioned(distance))?;
    let mut x = r.as_slice().to_vec();
    lu.solve_in_place(&mut x);
    Ok(SkewMat::project(&Mat::from_vec(n, x)?))
}
