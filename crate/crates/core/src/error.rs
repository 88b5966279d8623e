use alloc::string::String;

use crate::expr::Var;

/// Failures of a single scalar operation (real or jet).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MathError {
    #[error("division by a value too close to zero ({value:e})")]
    SingularDivision { value: f64 },
    #[error("{func} is undefined at {value}")]
    Domain { func: &'static str, value: f64 },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Math(#[from] MathError),
    #[error("{source} in subexpression `{expr}`")]
    Eval { expr: String, source: MathError },
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown function `{name}` at position {pos}")]
    UnknownFunction { pos: usize, name: String },
    #[error("malformed rational exponent at position {pos}")]
    MalformedExponent { pos: usize },
    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),
    #[error("variable `{0}` is not bound")]
    UnboundVariable(Var),
    #[error("variable index {index} out of range for {n_vars} variables")]
    VarOutOfRange { index: usize, n_vars: usize },
    #[error("unsupported jet shape: {n_vars} variables at order {order}")]
    JetShape { n_vars: usize, order: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("conformal factor is not positive at this point (σ = {value:e})")]
    NonPositiveSigma { value: f64 },
    #[error("weight function must be positive (f = {value:e})")]
    NonPositiveWeight { value: f64 },
    #[error("chart differential is rank deficient (Gram determinant {gram:e})")]
    RankDeficient { gram: f64 },
    #[error("vectors do not span a 2-plane (Gram determinant {gram:e})")]
    DegeneratePlane { gram: f64 },
    #[error("point is not umbilic (max |λ - H| = {spread:e})")]
    NotUmbilic { spread: f64 },
    #[error("mean curvature vanishes at this point")]
    ZeroMeanCurvature,
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("no admissible sample point found in {attempts} attempts")]
    NoAdmissiblePoints { attempts: usize },
}
