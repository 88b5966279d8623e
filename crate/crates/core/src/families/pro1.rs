//! The hyperplane criterion in ambient Euclidean terms: the Ricci curvature
//! `Ric(ξ,ξ)` written through β and its derivatives on the left, and
//! `mH² − |H|^{(2−m)/2} Δ_g |H|^{(m−2)/2}` rewritten with ambient operators on
//! the right. Everything is computed from the order-3 jet of β at `φ(x)`,
//! independently of the hypersurface pipeline.

use alloc::vec::Vec;

use crate::ambient::ConformalSpace;
use crate::error::Error;
use crate::hypersurface::{ChartKind, ImmersionChart};
use crate::jet::Jet;
use crate::linalg::dot_f64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pro1Residual {
    pub lhs: f64,
    pub rhs: f64,
    pub raw: f64,
    pub normalizer: f64,
    pub normalized: f64,
}

/// Ambient-operator expressions for `Δ_g|H|` and `|grad_g|H||²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientForms {
    pub h: f64,
    pub laplacian_abs_h: f64,
    pub grad_abs_h_sq: f64,
}

struct Setup {
    m: usize,
    a: Vec<f64>,
    xi0: Vec<f64>,
    beta: Jet,
    h: Jet,
}

fn setup(space: &ConformalSpace, chart: &ImmersionChart, x: &[f64]) -> Result<Setup, Error> {
    let ChartKind::Hyperplane { a, .. } = chart.kind() else {
        return Err(Error::Constraint("pro1 needs a hyperplane chart".into()));
    };
    let m = chart.m();
    let p = chart.point(x)?;
    let beta = space.sigma_jet(&p)?;
    let norm = libm::sqrt(1.0 + dot_f64(a, a));
    let mut xi0: Vec<f64> = a.iter().map(|ai| -ai / norm).collect();
    xi0.push(1.0 / norm);
    let mut h = beta.derivative(0)?.scale(xi0[0]);
    for k in 1..=m {
        h = h.add(&beta.derivative(k)?.scale(xi0[k]));
    }
    Ok(Setup { m, a: a.clone(), xi0, beta, h })
}

fn directional(j: &Jet, v: &[f64]) -> f64 {
    dot_f64(&j.gradient(), v)
}

fn abs_jet(s: &Setup) -> Result<Jet, Error> {
    let hv = s.h.value();
    if hv == 0.0 || hv.abs() < 1e-14 * (1.0 + libm::fabs(s.beta.value())) {
        return Err(Error::ZeroMeanCurvature);
    }
    Ok(if hv < 0.0 { s.h.neg() } else { s.h.clone() })
}

pub fn pro1_residual(space: &ConformalSpace, chart: &ImmersionChart, x: &[f64]) -> Result<Pro1Residual, Error> {
    let s = setup(space, chart, x)?;
    let m = s.m;
    let mf = m as f64;
    let zi = m;
    let b = s.beta.value();
    let d2 = |i: usize, j: usize| s.beta.second(i, j);
    let a2 = dot_f64(&s.a, &s.a);

    let mut lhs_terms = Vec::new();
    for i in 0..m {
        lhs_terms.push(b * d2(i, i));
        lhs_terms.push(-mf * sq(s.beta.first(i)));
    }
    lhs_terms.push(b * d2(zi, zi));
    lhs_terms.push(-mf * sq(s.beta.first(zi)));
    let w = (mf - 1.0) / (1.0 + a2);
    let mut aa = 0.0;
    let mut az = 0.0;
    for i in 0..m {
        for j in 0..m {
            aa += s.a[i] * s.a[j] * b * d2(i, j);
        }
        az += s.a[i] * b * d2(i, zi);
    }
    lhs_terms.extend([w * aa, -2.0 * w * az, w * b * d2(zi, zi)]);

    let hv = s.h.value();
    let mut rhs_terms = alloc::vec![mf * hv * hv];
    if m != 2 {
        let abs_h = abs_jet(&s)?;
        let c = -(mf - 2.0) / (2.0 * abs_h.value());
        let hess = abs_h.hessian();
        let lap0: f64 = (0..=m).map(|i| hess[i][i]).sum();
        let xi_abs = directional(&abs_h, &s.xi0);
        let grad_beta_abs = dot_f64(&s.beta.gradient(), &abs_h.gradient());
        let xixi = crate::linalg::bilinear(&hess, &s.xi0, &s.xi0);
        rhs_terms.extend([
            c * b * b * lap0,
            c * (mf - 2.0) * b * hv * xi_abs,
            -c * (mf - 2.0) * b * grad_beta_abs,
            -c * b * b * xixi,
        ]);
        if m != 4 {
            let c2 = -(mf - 2.0) * (mf - 4.0) / (4.0 * hv * hv);
            let gh = s.h.gradient();
            let xi_h = directional(&s.h, &s.xi0);
            rhs_terms.extend([c2 * b * b * dot_f64(&gh, &gh), -c2 * b * b * xi_h * xi_h]);
        }
    }
    let lhs: f64 = lhs_terms.iter().sum();
    let rhs: f64 = rhs_terms.iter().sum();
    let normalizer: f64 = lhs_terms.iter().chain(&rhs_terms).map(|t| t.abs()).sum();
    let raw = lhs - rhs;
    let normalized = if normalizer > 0.0 { raw.abs() / normalizer } else { 0.0 };
    Ok(Pro1Residual { lhs, rhs, raw, normalizer, normalized })
}

/// `Δ_g|H| = β²Δ₀|H| + (m−2)β[Hξ₀(|H|) − ∇₀β·∇₀|H|] − β²ξ₀ξ₀(|H|)` and
/// `|grad_g|H||² = β²(|∇₀H|² − ξ₀(H)²)`.
pub fn ambient_forms(space: &ConformalSpace, chart: &ImmersionChart, x: &[f64]) -> Result<AmbientForms, Error> {
    let s = setup(space, chart, x)?;
    let mf = s.m as f64;
    let b = s.beta.value();
    let abs_h = abs_jet(&s)?;
    let hess = abs_h.hessian();
    let lap0: f64 = (0..=s.m).map(|i| hess[i][i]).sum();
    let lap = b * b * lap0
        + (mf - 2.0) * b * (s.h.value() * directional(&abs_h, &s.xi0) - dot_f64(&s.beta.gradient(), &abs_h.gradient()))
        - b * b * crate::linalg::bilinear(&hess, &s.xi0, &s.xi0);
    let gh = s.h.gradient();
    let xi_h = directional(&s.h, &s.xi0);
    Ok(AmbientForms { h: s.h.value(), laplacian_abs_h: lap, grad_abs_h_sq: b * b * (dot_f64(&gh, &gh) - xi_h * xi_h) })
}

fn sq(v: f64) -> f64 {
    v * v
}
