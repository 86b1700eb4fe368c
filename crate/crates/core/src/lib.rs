//! Poisson-Lie groups, their doubles, dressing actions, the symplectic
//! groupoids integrating them, and coisotropic reduction of those groupoids,
//! evaluated numerically on matrix models.
//!
//! Every identity is exposed as a defect functional returning a nonnegative
//! residual; [`verify`] bundles them into seeded, reproducible reports.

// index loops mirror the tensor formulas; `!(x > 0.0)` also rejects NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod dressing;
pub mod error;
pub mod fd;
pub mod groupoid;
pub mod groups;
pub mod models;
pub mod reduction;
pub mod sampling;
pub mod tensors;
pub mod verify;

pub use algebra::{DoubleVector, LieAlgebraData, LieBialgebraData, SubspaceData};
pub use error::{Error, Result};
pub use groupoid::{Element, GroupoidElement};
pub use groups::{
    DoublePoint, DualGroupPoint, FactorOrder, Factorization, FrameTag, FrameVector, GroupPoint, Mat2, PoissonDouble,
    C64,
};
pub use models::{build_su11, build_trivial, Model, Su11Model, TrivialModel};
pub use reduction::{CoisotropicSubgroupData, Reduced, ReducedElement, ReductionModel};
pub use tensors::BivectorMatrix;
