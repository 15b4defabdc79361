// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
mod fixed_point;
pub mod harness;
pub mod integrator;
pub mod linalg;
pub mod systems;
pub mod tableau;
pub mod tangent;

pub use error::{Error, Result};
pub use fixed_point::FixedPointConfig;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/polar.md")]
    mod polar {}
    #[doc = include_str!("../../../book/src/tangent.md")]
    mod tangent {}
    #[doc = include_str!("../../../book/src/tableaux.md")]
    mod tableaux {}
    #[doc = include_str!("../../../book/src/vpd.md")]
    mod vpd {}
    #[doc = include_str!("../../../book/src/lie_poisson.md")]
    mod lie_poisson {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
