//! Finite-difference oracle for jet derivatives. Test and self-test use only.

use alloc::vec::Vec;

use crate::error::Error;
use crate::expr::{Expr, Params};
use crate::jet::MultiIndex;

/// Default base step for derivatives of order 1, 2 and 3.
pub const DEFAULT_STEPS: [f64; 3] = [1e-5, 1e-4, 1e-3];

pub fn default_step(order: usize) -> f64 {
    DEFAULT_STEPS[order.clamp(1, 3) - 1]
}

/// `∂^α e` at an ambient point by nested central differences.
///
/// The step along each coordinate is `step · max(1, |pᵢ|)`; `None` picks the
/// default for `|α|`.
pub fn fd_oracle(
    e: &Expr,
    point: &[f64],
    alpha: &MultiIndex,
    step: Option<f64>,
    params: &Params,
) -> Result<f64, Error> {
    if alpha.n_vars() != point.len() {
        return Err(Error::Dimension { expected: point.len(), found: alpha.n_vars() });
    }
    let base = step.unwrap_or_else(|| default_step(alpha.degree()));
    let mut dirs = Vec::new();
    for (v, &k) in alpha.exponents().iter().enumerate() {
        for _ in 0..k {
            dirs.push(v);
        }
    }
    let mut p = point.to_vec();
    nested(e, &mut p, &dirs, base, params)
}

fn nested(e: &Expr, p: &mut [f64], dirs: &[usize], base: f64, params: &Params) -> Result<f64, Error> {
    let Some((&v, rest)) = dirs.split_first() else {
        return e.eval_ambient(p, params);
    };
    let h = base * p[v].abs().max(1.0);
    let x = p[v];
    p[v] = x + h;
    let plus = nested(e, p, rest, base, params);
    p[v] = x - h;
    let minus = nested(e, p, rest, base, params);
    p[v] = x;
    Ok((plus? - minus?) / (2.0 * h))
}

/// `|a − b| ≤ rtol · max(|b|, 1)`.
pub fn close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * b.abs().max(1.0)
}
