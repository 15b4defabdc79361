//! The skew-part operator, the `sk(n)` inner product, and the hat map on ℝ³.

use super::mat::{Mat, SkewMat};
use crate::error::{Error, Result};

/// `asym(A) = A − Aᵀ`.
pub fn asym(a: &Mat) -> SkewMat {
    SkewMat::project(a).scale(2.0)
}

/// `⟨x, y⟩ = Σ_{i<j} x_ij y_ij = ½ tr(x yᵀ)`.
pub fn skew_inner(x: &SkewMat, y: &SkewMat) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(x.inner(y))
}

/// `hat(v) w = v × w`.
pub fn hat(v: [f64; 3]) -> SkewMat {
    SkewMat::from_upper(3, &[-v[2], v[1], -v[0]]).expect("three upper entries")
}

pub fn vee(x: &SkewMat) -> Result<[f64; 3]> {
    if x.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: x.dim(),
        });
    }
    Ok([x[(2, 1)], x[(0, 2)], x[(1, 0)]])
}
