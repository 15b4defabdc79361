//! Dense `n × n` kernels: structured matrix types, the skew-part operator and
//! inner products, the hat map, polar decomposition, and the Lyapunov and
//! Sylvester solvers used by the tangent maps.

mod eigen;
mod lyap;
mod mat;
mod ops;
mod polar;

pub use eigen::symmetric_eigen;
pub use lyap::{lyap_spd, sylvester_rot, SpdEigen, SYLVESTER_MAX_DIM};
pub use mat::{orthogonality_error, Mat, RotMat, SkewMat, SpdMat, ORTHOGONALITY_TOL, SYMMETRY_TOL};
pub use ops::{asym, hat, skew_inner, vee};
pub use polar::{
    lemma1_predicate, polar_decompose, polar_project, PolarFactors, NEWTON_MAX_ITER, NEWTON_TOL,
};
