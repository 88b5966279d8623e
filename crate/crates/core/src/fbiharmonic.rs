//! f-biharmonic and biharmonic residuals of a hypersurface, verdicts, and the
//! umbilical identities.
//!
//! With `u = fH`, the hypersurface is f-biharmonic iff
//!
//! ```text
//! Δu − u(|A|² − Ric(ξ,ξ)) = 0
//! A(grad u) + u((m/2) grad H − (Ric ξ)ᵀ) = 0
//! ```
//!
//! and biharmonic iff the same holds with `f ≡ 1` (the second line is then
//! reported doubled, `2A grad H + mH grad H − 2H (Ric ξ)ᵀ`). `Δ` is the
//! geometer's Laplacian, `trace ∇²`.
//!
//! Each line is normalized by the sum of the absolute values of its additive
//! terms, floored at `REF_FLOOR` times the natural scale `|f|κ³` of the point,
//! `κ² = |A|² + |Ric(ξ,ξ)| + |(Ric ξ)ᵀ|`. The floor is homogeneous in `f`, so
//! normalized residuals do not change when `f` is scaled.

use alloc::vec::Vec;

use crate::ambient::ConformalSpace;
use crate::error::Error;
use crate::expr::{Expr, Params};
use crate::hypersurface::{ImmersionChart, SurfacePoint};
use crate::jet::Jet;
use crate::sampling::Sampler;

/// Normalizers never drop below this fraction of the point's natural scale.
pub const REF_FLOOR: f64 = 1e-3;
/// Absolute floor, reached only where the geometry is flat and totally geodesic.
pub const ABS_FLOOR: f64 = 1e-300;
/// `f` counts as nonconstant once `|grad f|/f` exceeds this somewhere.
pub const NONCONSTANT_TOL: f64 = 1e-8;
/// Default verification tolerance.
pub const TOL_VERIFY: f64 = 1e-8;
/// Default falsification margin.
pub const TOL_FALSIFY: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub x: Vec<f64>,
    pub h: f64,
    pub norm_a2: f64,
    pub ric_nn: f64,
    pub r1_f: f64,
    /// Chart components.
    pub r2_f: Vec<f64>,
    pub r2_f_norm: f64,
    pub r1_bi: f64,
    pub r2_bi: Vec<f64>,
    pub r2_bi_norm: f64,
    pub n1: f64,
    pub n2: f64,
    pub n1_bi: f64,
    pub n2_bi: f64,
    pub f_value: f64,
    /// `|grad f|_g`.
    pub grad_f_norm: f64,
}

impl ResidualReport {
    pub fn normalized_f(&self) -> (f64, f64) {
        (self.r1_f.abs() / self.n1, self.r2_f_norm / self.n2)
    }

    pub fn normalized_bi(&self) -> (f64, f64) {
        (self.r1_bi.abs() / self.n1_bi, self.r2_bi_norm / self.n2_bi)
    }

    pub fn max_normalized_f(&self) -> f64 {
        let (a, b) = self.normalized_f();
        a.max(b)
    }

    pub fn max_normalized_bi(&self) -> f64 {
        let (a, b) = self.normalized_bi();
        a.max(b)
    }

    /// `|grad f|_g / f`.
    pub fn relative_grad_f(&self) -> f64 {
        self.grad_f_norm / self.f_value
    }
}

pub(crate) fn merged_params(space: &ConformalSpace, chart: &ImmersionChart) -> Params {
    let mut p = space.params().clone();
    p.extend(chart.params().iter().map(|(k, v)| (k.clone(), *v)));
    p
}

fn floor(sum: f64, reference: f64) -> f64 {
    sum.max(REF_FLOOR * reference).max(ABS_FLOOR)
}

/// Residuals at the chart point `x`. Parameters of `f` are looked up in the
/// space's and the chart's bindings.
pub fn residual_at(
    space: &ConformalSpace,
    chart: &ImmersionChart,
    f: &Expr,
    x: &[f64],
) -> Result<ResidualReport, Error> {
    let sp = SurfacePoint::new(space, chart, x)?;
    residual_on(&sp, f, &merged_params(space, chart))
}

pub fn residual_on(sp: &SurfacePoint, f: &Expr, params: &Params) -> Result<ResidualReport, Error> {
    let m = sp.m();
    let fj = sp.scalar_with(f, params)?;
    let f_value = fj.value();
    if !(f_value > 0.0) {
        return Err(Error::NonPositiveWeight { value: f_value });
    }
    let h = sp.mean_curvature();
    let norm_a2 = sp.norm_a2();
    let (ric_nn, ric_t) = sp.ricci_projections();
    let ric_t_norm = sp.norm(&ric_t);
    let kappa3 = libm::pow(norm_a2 + ric_nn.abs() + ric_t_norm, 1.5);
    let half_m = m as f64 / 2.0;

    let u = fj.mul(h);
    let uv = u.value();
    let lap_u = sp.laplacian(&u);
    let r1_f = lap_u - uv * (norm_a2 - ric_nn);
    let n1 = floor(lap_u.abs() + uv.abs() * norm_a2 + uv.abs() * ric_nn.abs(), f_value * kappa3);

    let grad_h = sp.gradient(h);
    let a_grad_u = sp.apply_shape(&sp.gradient(&u));
    let r2_f: Vec<f64> = (0..m).map(|i| a_grad_u[i] + uv * (half_m * grad_h[i] - ric_t[i])).collect();
    let n2 = floor(sp.norm(&a_grad_u) + uv.abs() * half_m * sp.norm(&grad_h) + uv.abs() * ric_t_norm, f_value * kappa3);

    let hv = h.value();
    let lap_h = sp.laplacian(h);
    let r1_bi = lap_h - hv * norm_a2 + hv * ric_nn;
    let n1_bi = floor(lap_h.abs() + hv.abs() * norm_a2 + hv.abs() * ric_nn.abs(), kappa3);
    let a_grad_h = sp.apply_shape(&grad_h);
    let mf = m as f64;
    let r2_bi: Vec<f64> = (0..m).map(|i| 2.0 * a_grad_h[i] + mf * hv * grad_h[i] - 2.0 * hv * ric_t[i]).collect();
    let n2_bi =
        floor(2.0 * sp.norm(&a_grad_h) + mf * hv.abs() * sp.norm(&grad_h) + 2.0 * hv.abs() * ric_t_norm, 2.0 * kappa3);

    Ok(ResidualReport {
        x: sp.x().to_vec(),
        h: hv,
        norm_a2,
        ric_nn,
        r2_f_norm: sp.norm(&r2_f),
        r1_f,
        r2_f,
        r2_bi_norm: sp.norm(&r2_bi),
        r1_bi,
        r2_bi,
        n1,
        n2,
        n1_bi,
        n2_bi,
        f_value,
        grad_f_norm: sp.norm(&sp.gradient(&fj)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VerdictKind {
    TotallyGeodesic,
    MinimalNotGeodesic,
    BiharmonicProper,
    FBiharmonicProper,
    NotFBiharmonic,
}

impl VerdictKind {
    pub const ALL: [VerdictKind; 5] = [
        VerdictKind::TotallyGeodesic,
        VerdictKind::MinimalNotGeodesic,
        VerdictKind::BiharmonicProper,
        VerdictKind::FBiharmonicProper,
        VerdictKind::NotFBiharmonic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VerdictKind::TotallyGeodesic => "totally_geodesic",
            VerdictKind::MinimalNotGeodesic => "minimal_not_geodesic",
            VerdictKind::BiharmonicProper => "biharmonic_proper",
            VerdictKind::FBiharmonicProper => "f_biharmonic_proper",
            VerdictKind::NotFBiharmonic => "not_f_biharmonic",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl core::fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    pub points: usize,
    pub tol: f64,
    pub max_norm_a: f64,
    pub max_abs_h: f64,
    pub max_norm_f: f64,
    pub max_norm_bi: f64,
    pub max_rel_grad_f: f64,
    /// Points with both f-lines within `tol`.
    pub f_passing: usize,
    pub bi_passing: usize,
    /// First sample (by index) whose f-residual exceeds `tol`.
    pub first_f_failure: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub evidence: Evidence,
}

impl Verdict {
    /// The residual that decided the verdict: f-lines for f-biharmonic or
    /// worse, biharmonic lines for biharmonic, `|A|` or `|H|` otherwise.
    pub fn max_norm_residual(&self) -> f64 {
        let e = &self.evidence;
        match self.kind {
            VerdictKind::TotallyGeodesic => e.max_norm_a,
            VerdictKind::MinimalNotGeodesic => e.max_abs_h,
            VerdictKind::BiharmonicProper => e.max_norm_bi,
            VerdictKind::FBiharmonicProper | VerdictKind::NotFBiharmonic => e.max_norm_f,
        }
    }
}

/// Aggregates per-point reports. Every point must pass for a property to hold.
pub fn verdict_from_reports(reports: &[ResidualReport], tol: f64) -> Verdict {
    let e = Evidence {
        points: reports.len(),
        tol,
        max_norm_a: reports.iter().map(|r| libm::sqrt(r.norm_a2.max(0.0))).fold(0.0, f64::max),
        max_abs_h: reports.iter().map(|r| r.h.abs()).fold(0.0, f64::max),
        max_norm_f: reports.iter().map(ResidualReport::max_normalized_f).fold(0.0, nan_max),
        max_norm_bi: reports.iter().map(ResidualReport::max_normalized_bi).fold(0.0, nan_max),
        max_rel_grad_f: reports.iter().map(ResidualReport::relative_grad_f).fold(0.0, f64::max),
        f_passing: reports.iter().filter(|r| r.max_normalized_f() <= tol).count(),
        bi_passing: reports.iter().filter(|r| r.max_normalized_bi() <= tol).count(),
        first_f_failure: reports.iter().position(|r| !(r.max_normalized_f() <= tol)),
    };
    let kind = if e.max_norm_a <= tol {
        VerdictKind::TotallyGeodesic
    } else if e.max_abs_h <= tol {
        VerdictKind::MinimalNotGeodesic
    } else if e.bi_passing == e.points {
        VerdictKind::BiharmonicProper
    } else if e.f_passing == e.points && e.max_rel_grad_f > NONCONSTANT_TOL {
        VerdictKind::FBiharmonicProper
    } else {
        VerdictKind::NotFBiharmonic
    };
    Verdict { kind, evidence: e }
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Chart points accepted by the sampler: `φ(x)` defined and admissible.
pub fn admissible_points(
    space: &ConformalSpace,
    chart: &ImmersionChart,
    sampler: &Sampler,
) -> Result<Vec<Vec<f64>>, Error> {
    sampler.sample(|x| is_admissible(space, chart, x))
}

pub fn is_admissible(space: &ConformalSpace, chart: &ImmersionChart, x: &[f64]) -> bool {
    chart.point(x).is_ok_and(|p| space.admissible(&p).is_ok())
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub verdict: Verdict,
    pub reports: Vec<ResidualReport>,
}

pub fn classify(
    space: &ConformalSpace,
    chart: &ImmersionChart,
    f: &Expr,
    sampler: &Sampler,
    tol: f64,
) -> Result<Classification, Error> {
    let reports = admissible_points(space, chart, sampler)?
        .iter()
        .map(|x| residual_at(space, chart, f, x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Classification { verdict: verdict_from_reports(&reports, tol), reports })
}

/// Normalized defects of the identities satisfied by an umbilical
/// f-biharmonic hypersurface.
#[derive(Debug, Clone, PartialEq)]
pub struct UmbilicalCheck {
    pub h: f64,
    pub ric_nn: f64,
    /// `|grad(f|H|^{(4−m)/2})|` relative, `None` for `m = 4`.
    pub f_form: Option<f64>,
    /// `Ric(ξ,ξ) − (mH² − |H|^{(2−m)/2} Δ|H|^{(m−2)/2})`, relative.
    pub curvature_identity: f64,
    /// `|(Ric ξ)ᵀ − (m−1) grad H|`, relative.
    pub codazzi: f64,
    /// `Δ|H|^{(m−2)/2} − m|H|^{(m+2)/2}` when `Ric(ξ,ξ) ≤ 0`.
    pub margin: Option<f64>,
}

pub fn umbilical_theory_check(
    space: &ConformalSpace,
    chart: &ImmersionChart,
    f: &Expr,
    x: &[f64],
) -> Result<UmbilicalCheck, Error> {
    let sp = SurfacePoint::new(space, chart, x)?;
    let geo = sp.geometry();
    if !geo.umbilic {
        let spread = geo.principal.iter().fold(0.0f64, |a, l| a.max((l - geo.h_mean).abs()));
        return Err(Error::NotUmbilic { spread });
    }
    let m = sp.m();
    let mf = m as f64;
    let h = sp.mean_curvature();
    let hv = h.value();
    let (ric_nn, ric_t) = sp.ricci_projections();
    let ric_t_norm = sp.norm(&ric_t);
    let kappa2 = geo.norm_a2 + ric_nn.abs() + ric_t_norm;
    if hv.abs() <= 1e-12 * libm::sqrt(kappa2) || hv == 0.0 {
        return Err(Error::ZeroMeanCurvature);
    }
    let abs_h: Jet = if hv < 0.0 { h.neg() } else { h.clone() };
    let kappa = libm::sqrt(kappa2);

    let f_form = if m == 4 {
        None
    } else {
        let fj = sp.scalar_with(f, &merged_params(space, chart))?;
        if !(fj.value() > 0.0) {
            return Err(Error::NonPositiveWeight { value: fj.value() });
        }
        let ln_f = fj.elementary(crate::scalar::Elementary::Ln)?;
        let ln_h = abs_h.elementary(crate::scalar::Elementary::Ln)?;
        let c = (4.0 - mf) / 2.0;
        let u = ln_f.add(&ln_h.scale(c));
        let raw = sp.norm(&sp.gradient(&u));
        let n = sp.norm(&sp.gradient(&ln_f)) + c.abs() * sp.norm(&sp.gradient(&ln_h));
        Some(raw / floor(n, kappa))
    };

    let q = abs_h.powf((mf - 2.0) / 2.0)?;
    let lap_q = sp.laplacian(&q);
    let corr = libm::pow(abs_h.value(), (2.0 - mf) / 2.0) * lap_q;
    let raw_b = ric_nn - (mf * hv * hv - corr);
    let curvature_identity = raw_b.abs() / floor(ric_nn.abs() + mf * hv * hv + corr.abs(), kappa2);

    let grad_h = sp.gradient(h);
    let cod: Vec<f64> = (0..m).map(|i| ric_t[i] - (mf - 1.0) * grad_h[i]).collect();
    let codazzi = sp.norm(&cod) / floor(ric_t_norm + (mf - 1.0) * sp.norm(&grad_h), kappa2);

    let margin = (ric_nn <= 0.0).then(|| lap_q - mf * libm::pow(abs_h.value(), (mf + 2.0) / 2.0));
    Ok(UmbilicalCheck { h: hv, ric_nn, f_form, curvature_identity, codazzi, margin })
}
