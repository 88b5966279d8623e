//! Verification kernel for f-biharmonic hypersurfaces in conformally flat spaces.
//!
//! Everything here is pure computation: truncated multivariate Taylor jets,
//! a small expression language evaluated over reals or jets, the curvature of
//! conformally flat metrics `h = σ⁻² h₀`, the extrinsic geometry of immersed
//! hypersurface charts, the f-biharmonic and biharmonic residual systems, and
//! a catalogue of explicit constructions together with their reduced ODE/PDE
//! residuals and an exact rational ansatz reducer.
//!
//! The crate is `no_std` and only needs `alloc`. IO, the CLI and parallel
//! sampling live in the companion `fbh` crate.

// NaN-aware `!(a <= b)` checks and index loops over tensor slots are intended
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::should_implement_trait)]
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ambient;
pub mod error;
pub mod expr;
pub mod families;
pub mod fbiharmonic;
pub mod fd;
pub mod hypersurface;
pub mod jet;
pub mod linalg;
pub mod sampling;
pub mod scalar;

pub use ambient::{ConformalSpace, CurvatureData};
pub use error::{Error, MathError};
pub use expr::{Bindings, Expr, Params, Var};
pub use fbiharmonic::{ResidualReport, Verdict, VerdictKind};
pub use hypersurface::{ImmersionChart, Orientation, PointGeometry};
pub use jet::{Jet, JetSpace, MultiIndex};
pub use scalar::Scalar;

/// Exact rational exponent attached to `^` in expressions.
pub type Rational = num_rational::Ratio<i64>;

pub type Result<T, E = Error> = core::result::Result<T, E>;
