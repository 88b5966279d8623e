//! Reduced ODE/PDE residuals for the conformal factor β.

use alloc::vec::Vec;

use crate::error::Error;
use crate::expr::{Bindings, Expr, Params, Var};
use crate::jet::{Jet, JetSpace, MultiIndex};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReducedEquation {
    /// Hyperplane with `β = β(z)`; `k2 = k_m² = 1/(1+Σaᵢ²)`.
    Pq1 { m: usize, k2: f64 },
    /// `ββ'' − 2β'²`.
    Pq01,
    /// Horizontal plane `z = const`, `β(x₁..x_m, z)`.
    Pc1 { m: usize },
    /// `Pc1` at `m = 2`.
    Ppc1,
    /// `pp'' − 2p'²` along ambient coordinate `var`.
    Pop2 { var: usize },
}

impl ReducedEquation {
    pub fn name(&self) -> &'static str {
        match self {
            ReducedEquation::Pq1 { .. } => "PQ1",
            ReducedEquation::Pq01 => "pq01",
            ReducedEquation::Pc1 { .. } => "pc1",
            ReducedEquation::Ppc1 => "ppc1",
            ReducedEquation::Pop2 { .. } => "pOP2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeResidual {
    pub raw: f64,
    /// Sum of absolute values of the additive terms.
    pub normalizer: f64,
    pub normalized: f64,
}

impl OdeResidual {
    fn from_terms(terms: &[f64]) -> Self {
        let raw: f64 = terms.iter().sum();
        let normalizer = terms.iter().map(|t| t.abs()).sum::<f64>();
        let normalized = if normalizer > 0.0 { raw.abs() / normalizer } else { 0.0 };
        OdeResidual { raw, normalizer, normalized }
    }
}

/// Evaluates the left-hand side of `eq` for the given β at `point`.
///
/// `Pq1` and `Pq01` take `point = [z]`; the others take a full ambient point
/// `(x₁, …, x_m, z)`.
pub fn ode_residual(eq: &ReducedEquation, beta: &Expr, point: &[f64], params: &Params) -> Result<OdeResidual, Error> {
    match *eq {
        ReducedEquation::Pq1 { m, k2 } => {
            let b = univariate(beta, point, params)?;
            Ok(OdeResidual::from_terms(&pq1_terms(m as f64, k2, &b)))
        }
        ReducedEquation::Pq01 => {
            let b = univariate(beta, point, params)?;
            Ok(OdeResidual::from_terms(&[b[0] * b[2], -2.0 * b[1] * b[1]]))
        }
        ReducedEquation::Pc1 { m } => {
            if point.len() != m + 1 {
                return Err(Error::Dimension { expected: m + 1, found: point.len() });
            }
            Ok(OdeResidual::from_terms(&pc1_terms(&ambient_jet(beta, point, params)?)?))
        }
        ReducedEquation::Ppc1 => {
            if point.len() != 3 {
                return Err(Error::Dimension { expected: 3, found: point.len() });
            }
            Ok(OdeResidual::from_terms(&pc1_terms(&ambient_jet(beta, point, params)?)?))
        }
        ReducedEquation::Pop2 { var } => {
            if var >= point.len() {
                return Err(Error::VarOutOfRange { index: var, n_vars: point.len() });
            }
            let j = ambient_jet(beta, point, params)?;
            let d = |k: u8| {
                let mut e = alloc::vec![0u8; point.len()];
                e[var] = k;
                j.partial(&MultiIndex::new(e))
            };
            Ok(OdeResidual::from_terms(&[d(0) * d(2), -2.0 * d(1) * d(1)]))
        }
    }
}

/// `[β, β', β'', β''']` at `z = point[0]`.
fn univariate(beta: &Expr, point: &[f64], params: &Params) -> Result<[f64; 4], Error> {
    if point.len() != 1 {
        return Err(Error::Dimension { expected: 1, found: point.len() });
    }
    let space = JetSpace::new(1, 3)?;
    let z = space.seed(point, 0)?;
    let j = beta.eval(&Bindings::new(space.constant(0.0), params).with(Var::Z, z))?;
    Ok(core::array::from_fn(|k| j.partial(&MultiIndex::new(alloc::vec![k as u8]))))
}

fn ambient_jet(beta: &Expr, point: &[f64], params: &Params) -> Result<Jet, Error> {
    let space = JetSpace::new(point.len(), 3)?;
    beta.eval(&Bindings::ambient(&space.seeds(point)?, params)?)
}

pub(crate) fn pq1_terms(m: f64, k2: f64, b: &[f64; 4]) -> [f64; 4] {
    let [b0, b1, b2, b3] = *b;
    let q = 1.0 - k2;
    [
        m * (1.0 + k2) * (b1 * b1) * (b1 * b1),
        (((m * m - 2.0 * m + 2.0) * q - 2.0 * m) / 2.0) * b0 * b1 * b1 * b2,
        -((m - 2.0) * q / 2.0) * b0 * b0 * b1 * b3,
        -((m - 2.0) * (m - 4.0) * q / 4.0) * b0 * b0 * b2 * b2,
    ]
}

fn pc1_terms(j: &Jet) -> Result<Vec<f64>, Error> {
    let n = j.n_vars();
    let m = n - 1;
    let mf = m as f64;
    let zi = m;
    let d = |vars: &[usize]| j.partial(&MultiIndex::from_vars(n, vars));
    let b = j.value();
    let bz = j.first(zi);
    let mut terms = Vec::new();
    for i in 0..m {
        terms.push(b * d(&[i, i]));
        terms.push(-mf * sq(j.first(i)));
    }
    terms.push(mf * b * d(&[zi, zi]));
    terms.push(-2.0 * mf * bz * bz);
    if m != 2 {
        if bz == 0.0 {
            return Err(crate::error::MathError::SingularDivision { value: bz }.into());
        }
        for i in 0..m {
            let biz = d(&[i, zi]);
            terms.push((mf - 2.0) * b * b * d(&[i, i, zi]) / (2.0 * bz));
            terms.push(-(mf - 2.0) * (mf - 2.0) * b * j.first(i) * biz / (2.0 * bz));
            terms.push((mf - 2.0) * (mf - 4.0) * b * b * biz * biz / (4.0 * bz * bz));
        }
    }
    Ok(terms)
}

fn sq(v: f64) -> f64 {
    v * v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn params(kv: &[(&str, f64)]) -> Params {
        kv.iter().map(|(k, v)| (alloc::string::ToString::to_string(k), *v)).collect()
    }

    #[test]
    fn pq01_solution() {
        let p = params(&[("c1", 1.3), ("c2", 0.4)]);
        let b = parse("1/(c1*z+c2)").unwrap();
        for z in [0.1, 1.0, 3.7] {
            assert!(ode_residual(&ReducedEquation::Pq01, &b, &[z], &p).unwrap().normalized < 1e-12);
        }
    }

    #[test]
    fn ppc1_product_solution() {
        let p = params(&[("c1", 1.3), ("c2", 0.4), ("c3", 2.0), ("c4", 0.7)]);
        let b = parse("1/((c1*x1+c2)*(c3*z+c4))").unwrap();
        let r = ode_residual(&ReducedEquation::Ppc1, &b, &[0.3, -0.2, 1.1], &p).unwrap();
        assert!(r.normalized < 1e-12, "{r:?}");
        let r = ode_residual(&ReducedEquation::Pop2 { var: 0 }, &b, &[0.3, -0.2, 1.1], &p).unwrap();
        assert!(r.normalized < 1e-12, "{r:?}");
    }

    #[test]
    fn pq1_picks_the_right_k() {
        // z⁻¹ solves PQ1 for every k, z^{3/13} only for k² = 1/4 at m = 3
        let p = Params::new();
        let inv = parse("z^(-1)").unwrap();
        assert!(ode_residual(&ReducedEquation::Pq1 { m: 3, k2: 0.2 }, &inv, &[1.3], &p).unwrap().normalized < 1e-14);
        let b = parse("z^(3/13)").unwrap();
        let good = ode_residual(&ReducedEquation::Pq1 { m: 3, k2: 0.25 }, &b, &[1.3], &p).unwrap();
        let bad = ode_residual(&ReducedEquation::Pq1 { m: 3, k2: 0.2 }, &b, &[1.3], &p).unwrap();
        assert!(good.normalized < 1e-14, "{good:?}");
        assert!(bad.normalized > 1e-3, "{bad:?}");
    }

    #[test]
    fn pc1_power_solution() {
        // t = (m²−2m)/(m²+4) at m = 3
        let b = parse("(x1+x2+x3+z+1)^(3/13)").unwrap();
        let r = ode_residual(&ReducedEquation::Pc1 { m: 3 }, &b, &[0.2, 0.5, 0.1, 1.0], &Params::new()).unwrap();
        assert!(r.normalized < 1e-13, "{r:?}");
        let b = parse("(x1+x2+x3+z+1)^(1/4)").unwrap();
        let r = ode_residual(&ReducedEquation::Pc1 { m: 3 }, &b, &[0.2, 0.5, 0.1, 1.0], &Params::new()).unwrap();
        assert!(r.normalized > 1e-3);
    }
}
