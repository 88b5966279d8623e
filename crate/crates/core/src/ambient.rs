//! Curvature of conformally flat metrics `h = σ⁻² h₀` on open subsets of Rⁿ.
//!
//! With `ψ = −ln σ` the Levi-Civita connection is
//! `Γᵏᵢⱼ = δᵏᵢ ψⱼ + δᵏⱼ ψᵢ − δᵢⱼ ψₖ`. Riemann and Ricci are assembled from Γ and
//! its first derivatives, both read off a jet of σ.
//!
//! Index conventions: `R(∂ᵢ,∂ⱼ)∂ₖ = Rˡₖᵢⱼ ∂ₗ` and the lowered tensor is
//! `R_abcd = h(R(∂a,∂b)∂d, ∂c)`, so `K(X,Y) = R(X,Y,X,Y)` for h-orthonormal
//! X, Y and `Ric_jk = Σᵢ Rⁱₖᵢⱼ` is positive on round spheres.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::expr::{Bindings, Expr, Params, Var};
use crate::jet::{Jet, JetSpace};
use crate::linalg::dot_f64;
use crate::scalar::{Elementary, Scalar};

/// Smallest σ accepted at a sample point.
pub const SIGMA_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct ConformalSpace {
    n: usize,
    sigma: Expr,
    guards: Vec<Expr>,
    params: Params,
    jets: JetSpace,
}

/// Deliberate defects for mutation testing of the self-test suites.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    FlipChristoffelSign,
}

fn check_expr(e: &Expr, n: usize, params: &Params) -> Result<(), Error> {
    for v in e.variables() {
        let ok = match v {
            Var::X(i) => (i as usize) < n,
            Var::Z => true,
        };
        if !ok {
            return Err(Error::UnboundVariable(v));
        }
    }
    for p in e.parameters() {
        if !params.contains_key(&p) {
            return Err(Error::UnboundParameter(p));
        }
    }
    Ok(())
}

impl ConformalSpace {
    /// `σ` and the guards are expressions in `x1..x(n-1), z`.
    pub fn new(n: usize, sigma: Expr, guards: Vec<Expr>, params: Params) -> Result<Self, Error> {
        if !(2..=crate::expr::MAX_X as usize + 1).contains(&n) {
            return Err(Error::Dimension { expected: 3, found: n });
        }
        check_expr(&sigma, n, &params)?;
        for g in &guards {
            check_expr(g, n, &params)?;
        }
        Ok(ConformalSpace { n, sigma, guards, params, jets: JetSpace::new(n, 3)? })
    }

    /// Flat Rⁿ.
    pub fn euclidean(n: usize) -> Result<Self, Error> {
        ConformalSpace::new(n, Expr::Const(1.0), Vec::new(), Params::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> &Expr {
        &self.sigma
    }

    pub fn guards(&self) -> &[Expr] {
        &self.guards
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    fn check_point(&self, p: &[f64]) -> Result<(), Error> {
        if p.len() != self.n {
            return Err(Error::Dimension { expected: self.n, found: p.len() });
        }
        Ok(())
    }

    /// Guards positive and `σ ≥ SIGMA_FLOOR`.
    pub fn admissible(&self, p: &[f64]) -> Result<(), Error> {
        self.check_point(p)?;
        for g in &self.guards {
            let v = g.eval_ambient(p, &self.params)?;
            if !(v > 0.0) {
                return Err(Error::Constraint(alloc::format!("guard `{g}` = {v:e} is not positive")));
            }
        }
        let s = self.sigma.eval_ambient(p, &self.params)?;
        if !(s >= SIGMA_FLOOR) {
            return Err(Error::NonPositiveSigma { value: s });
        }
        Ok(())
    }

    /// Order-3 jet of σ at `p` in the ambient coordinates.
    pub fn sigma_jet(&self, p: &[f64]) -> Result<Jet, Error> {
        self.check_point(p)?;
        let seeds = self.jets.seeds(p)?;
        let s = self.sigma.eval(&Bindings::ambient(&seeds, &self.params)?)?;
        if !(s.value() > 0.0) {
            return Err(Error::NonPositiveSigma { value: s.value() });
        }
        Ok(s)
    }

    /// Evaluates an ambient-variable expression on arbitrary scalars.
    pub fn eval<S: Scalar>(&self, e: &Expr, coords: &[S]) -> Result<S, Error> {
        e.eval(&Bindings::ambient(coords, &self.params)?)
    }

    pub fn curvature_at(&self, p: &[f64]) -> Result<CurvatureData, Error> {
        self.curvature_at_with(p, Mutation::None)
    }

    #[doc(hidden)]
    pub fn curvature_at_with(&self, p: &[f64], mutation: Mutation) -> Result<CurvatureData, Error> {
        let s = self.sigma_jet(p)?;
        CurvatureData::from_sigma_jet(p, &s, mutation)
    }

    /// `K(X,Y)` from the full tensor; X, Y are coordinate vectors spanning the plane.
    pub fn sectional(&self, p: &[f64], x: &[f64], y: &[f64]) -> Result<f64, Error> {
        self.curvature_at(p)?.sectional(x, y)
    }

    /// `K(X,Y) = Σ (XᵢXⱼ + YᵢYⱼ) σ σᵢⱼ − Σ σᵢ²` with X, Y in the frame `eᵢ = σ∂ᵢ`.
    pub fn sectional_closed_form(&self, p: &[f64], x: &[f64], y: &[f64]) -> Result<f64, Error> {
        let s = self.sigma_jet(p)?;
        let sigma = s.value();
        let (u, v) = orthonormal_pair(sigma, x, y)?;
        let (fu, fv): (Vec<f64>, Vec<f64>) =
            (u.iter().map(|c| c / sigma).collect(), v.iter().map(|c| c / sigma).collect());
        let hess = s.hessian();
        let grad = s.gradient();
        let mut k = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                k += (fu[i] * fu[j] + fv[i] * fv[j]) * sigma * hess[i][j];
            }
        }
        Ok(k - dot_f64(&grad, &grad))
    }

    /// `Ric(ξ,ξ)` for `ξ = σ ξ₀` via
    /// `σΔ₀σ − m|∇₀σ|² + (m−1) σ Hess₀σ(ξ₀,ξ₀)`, with `m = n − 1`.
    pub fn ricci_normal_umbilical(&self, xi0: &[f64], p: &[f64]) -> Result<f64, Error> {
        self.check_point(xi0)?;
        let nrm = libm::sqrt(dot_f64(xi0, xi0));
        if (nrm - 1.0).abs() > 1e-12 {
            return Err(Error::Constraint(alloc::format!("ξ₀ must be Euclidean-unit, |ξ₀| = {nrm}")));
        }
        let s = self.sigma_jet(p)?;
        let sigma = s.value();
        let grad = s.gradient();
        let hess = s.hessian();
        let m = (self.n - 1) as f64;
        let lap: f64 = (0..self.n).map(|i| hess[i][i]).sum();
        let hxx = crate::linalg::bilinear(&hess, xi0, xi0);
        Ok(sigma * lap - m * dot_f64(&grad, &grad) + (m - 1.0) * sigma * hxx)
    }
}

/// Gram–Schmidt with respect to `h = σ⁻² h₀`.
fn orthonormal_pair(sigma: f64, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>), Error> {
    let ex = libm::sqrt(dot_f64(x, x));
    let ey = libm::sqrt(dot_f64(y, y));
    if ex == 0.0 || ey == 0.0 {
        return Err(Error::DegeneratePlane { gram: 0.0 });
    }
    let cos = dot_f64(x, y) / (ex * ey);
    let gram = 1.0 - cos * cos;
    if gram < 1e-12 {
        return Err(Error::DegeneratePlane { gram });
    }
    let u: Vec<f64> = x.iter().map(|c| c / ex).collect();
    let w: Vec<f64> = y.iter().zip(&u).map(|(c, uc)| c / ey - cos * uc).collect();
    let nw = libm::sqrt(dot_f64(&w, &w));
    let u = u.iter().map(|c| c * sigma).collect();
    let w = w.iter().map(|c| c * sigma / nw).collect();
    Ok((u, w))
}

/// `Γᵏ(u, v) = uᵏ(ψ·v) + vᵏ(ψ·u) − (u·v)ψₖ` for the conformal connection.
pub fn christoffel_contract<S: Scalar>(psi: &[S], u: &[S], v: &[S]) -> Vec<S> {
    let pv = crate::linalg::dot(psi, v);
    let pu = crate::linalg::dot(psi, u);
    let uv = crate::linalg::dot(u, v);
    (0..psi.len()).map(|k| u[k].mul(&pv).add(&v[k].mul(&pu)).sub(&uv.mul(&psi[k]))).collect()
}

/// Jet of `ψ = −ln σ`.
pub(crate) fn log_factor(s: &Jet) -> Result<Jet, Error> {
    Ok(s.apply(Elementary::Ln)?.neg())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureData {
    pub point: Vec<f64>,
    pub sigma: f64,
    n: usize,
    christoffel: Vec<f64>,
    riemann: Vec<f64>,
    ricci: Vec<f64>,
}

impl CurvatureData {
    pub(crate) fn from_sigma_jet(p: &[f64], s: &Jet, mutation: Mutation) -> Result<CurvatureData, Error> {
        let n = p.len();
        let psi = log_factor(&s.truncate(2))?;
        let dpsi = psi.gradient();
        let hpsi = psi.hessian();
        let sign = if mutation == Mutation::FlipChristoffelSign { -1.0 } else { 1.0 };
        let d = |a: usize, b: usize| (a == b) as u8 as f64;
        let mut gamma = vec![0.0; n * n * n];
        // dgamma[l][k][i][j] = ∂ₗ Γᵏᵢⱼ
        let mut dgamma = vec![0.0; n * n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    gamma[(k * n + i) * n + j] = sign * (d(k, i) * dpsi[j] + d(k, j) * dpsi[i] - d(i, j) * dpsi[k]);
                    for l in 0..n {
                        dgamma[((l * n + k) * n + i) * n + j] =
                            sign * (d(k, i) * hpsi[j][l] + d(k, j) * hpsi[i][l] - d(i, j) * hpsi[k][l]);
                    }
                }
            }
        }
        let g = |k: usize, i: usize, j: usize| gamma[(k * n + i) * n + j];
        let dg = |l: usize, k: usize, i: usize, j: usize| dgamma[((l * n + k) * n + i) * n + j];
        // up[l][k][i][j] = Rˡₖᵢⱼ
        let mut up = vec![0.0; n * n * n * n];
        for l in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut r = dg(i, l, j, k) - dg(j, l, i, k);
                        for q in 0..n {
                            r += g(l, i, q) * g(q, j, k) - g(l, j, q) * g(q, i, k);
                        }
                        up[((l * n + k) * n + i) * n + j] = r;
                    }
                }
            }
        }
        let sigma = s.value();
        let w = 1.0 / (sigma * sigma);
        let mut riemann = vec![0.0; n * n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for dd in 0..n {
                        riemann[((a * n + b) * n + c) * n + dd] = w * up[((c * n + dd) * n + a) * n + b];
                    }
                }
            }
        }
        let mut ricci = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                ricci[j * n + k] = (0..n).map(|i| up[((i * n + k) * n + i) * n + j]).sum();
            }
        }
        Ok(CurvatureData { point: p.to_vec(), sigma, n, christoffel: gamma, riemann, ricci })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `Γᵏᵢⱼ`.
    pub fn christoffel(&self, k: usize, i: usize, j: usize) -> f64 {
        self.christoffel[(k * self.n + i) * self.n + j]
    }

    /// `R_abcd = h(R(∂a,∂b)∂d, ∂c)`.
    pub fn riemann(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.riemann[((a * self.n + b) * self.n + c) * self.n + d]
    }

    pub fn ricci(&self, j: usize, k: usize) -> f64 {
        self.ricci[j * self.n + k]
    }

    pub fn max_abs_riemann(&self) -> f64 {
        self.riemann.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// `h(u, v)` at the point.
    pub fn metric(&self, u: &[f64], v: &[f64]) -> f64 {
        dot_f64(u, v) / (self.sigma * self.sigma)
    }

    pub fn ricci_form(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for j in 0..n {
            for k in 0..n {
                acc += u[j] * self.ricci[j * n + k] * v[k];
            }
        }
        acc
    }

    /// `R(X,Y,Z,W)` for coordinate vectors.
    pub fn riemann_form(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for a in 0..n {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..n {
                if y[b] == 0.0 {
                    continue;
                }
                for c in 0..n {
                    if z[c] == 0.0 {
                        continue;
                    }
                    for d in 0..n {
                        acc += x[a] * y[b] * z[c] * w[d] * self.riemann(a, b, c, d);
                    }
                }
            }
        }
        acc
    }

    pub fn sectional(&self, x: &[f64], y: &[f64]) -> Result<f64, Error> {
        let (u, v) = orthonormal_pair(self.sigma, x, y)?;
        Ok(self.riemann_form(&u, &v, &u, &v))
    }

    /// Largest violation of the algebraic symmetries and first Bianchi
    /// identity, relative to `max |R|` (absolute when R vanishes).
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let r = |a, b, c, d| self.riemann(a, b, c, d);
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let v = r(a, b, c, d);
                        worst = worst
                            .max((v + r(b, a, c, d)).abs())
                            .max((v + r(a, b, d, c)).abs())
                            .max((v - r(c, d, a, b)).abs())
                            .max((v + r(a, c, d, b) + r(a, d, b, c)).abs());
                    }
                }
            }
        }
        for j in 0..n {
            for k in 0..n {
                worst = worst.max((self.ricci(j, k) - self.ricci(k, j)).abs());
                for i in 0..n {
                    worst = worst.max((self.christoffel(k, i, j) - self.christoffel(k, j, i)).abs());
                }
            }
        }
        let scale = self.max_abs_riemann();
        if scale > 1.0 {
            worst / scale
        } else {
            worst
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn space(sigma: &str, n: usize) -> ConformalSpace {
        ConformalSpace::new(n, parse(sigma).unwrap(), vec![], Params::new()).unwrap()
    }

    fn unit(n: usize, i: usize) -> Vec<f64> {
        (0..n).map(|k| (k == i) as u8 as f64).collect()
    }

    #[test]
    fn flat_is_flat() {
        let c = space("1", 3).curvature_at(&[0.3, -1.0, 2.0]).unwrap();
        assert_eq!(c.max_abs_riemann(), 0.0);
    }

    #[test]
    fn hyperbolic_half_space() {
        let s = space("z", 3);
        let p = [1.0, 1.0, 2.0];
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let k = s.sectional(&p, &unit(3, i), &unit(3, j)).unwrap();
            assert!((k + 1.0).abs() < 1e-12, "{k}");
        }
        let c = s.curvature_at(&p).unwrap();
        let xi = [0.0, 0.0, 2.0];
        assert!((c.ricci_form(&xi, &xi) + 2.0).abs() < 1e-12);
        assert!((s.ricci_normal_umbilical(&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]).unwrap() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn round_sphere() {
        let s = space("(1+x1^2+x2^2+x3^2+z^2)/2", 4);
        let p = [0.3, -0.7, 1.1, 0.2];
        let c = s.curvature_at(&p).unwrap();
        let x = [1.0, 0.2, -0.3, 0.5];
        let y = [0.1, 1.0, 0.7, -0.2];
        assert!((c.sectional(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        assert!(c.symmetry_defect() < 1e-12);
        // round Sⁿ: Ric = (n−1) h
        assert!((c.ricci_form(&x, &y) - 3.0 * c.metric(&x, &y)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_plane() {
        let s = space("z", 3);
        assert!(matches!(
            s.sectional(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0], &[2.0, 0.0, 0.0]),
            Err(Error::DegeneratePlane { .. })
        ));
    }

    #[test]
    fn rejects_nonpositive_sigma() {
        let s = space("z", 3);
        assert!(matches!(s.curvature_at(&[0.0, 0.0, -1.0]), Err(Error::NonPositiveSigma { .. })));
        assert!(s.admissible(&[0.0, 0.0, 1e-9]).is_err());
    }

    #[test]
    fn mutation_breaks_hyperbolic_calibration() {
        let s = space("z", 3);
        let c = s.curvature_at_with(&[0.0, 0.0, 1.0], Mutation::FlipChristoffelSign).unwrap();
        let k = c.sectional(&unit(3, 0), &unit(3, 2)).unwrap();
        assert!((k + 1.0).abs() > 0.5);
    }
}
