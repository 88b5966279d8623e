//! Explicit constructions, reduced equations and the exact exponent reducer.

pub mod ansatz;
pub mod catalog;
pub mod ode;
pub mod pro1;

pub use ansatz::{ansatz_reduce, ansatz_reduce_int, nontrivial_root, AnsatzEquation, AnsatzReduction};
pub use catalog::{catalog, catalog_with, FamilySpec, Perturbation, FAMILY_NAMES};
pub use ode::{ode_residual, OdeResidual, ReducedEquation};
pub use pro1::{ambient_forms, pro1_residual, Pro1Residual};
