//! Extrinsic geometry of a hypersurface chart `φ: U ⊂ Rᵐ → (Rᵐ⁺¹, σ⁻²h₀)`.
//!
//! Everything is carried as order-2 jets in the chart variables, so first and
//! second derivatives of H, fH and the induced metric come out exactly (up to
//! rounding) with no finite differences. Because `h` is conformal to `h₀`,
//! h-orthogonality to the tangent space is Euclidean orthogonality, which is
//! how the normal is built.

use alloc::vec::Vec;

use crate::ambient::{christoffel_contract, ConformalSpace, CurvatureData, Mutation};
use crate::error::Error;
use crate::expr::{Bindings, Expr, Params, Var};
use crate::jet::{Jet, JetSpace};
use crate::linalg::{self, Matrix};
use crate::scalar::Scalar;

/// Rank threshold on the Euclidean Gram determinant of `dφ`.
pub const RANK_FLOOR: f64 = 1e-10;
/// Relative tolerance of the umbilicity test.
pub const UMBILIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// `det(∂₁φ, …, ∂ₘφ, ξ₀) > 0`.
    #[default]
    Standard,
    Reversed,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChartKind {
    /// `φ(x) = (x₁, …, xₘ, Σ aᵢxᵢ + offset)`.
    Hyperplane {
        a: Vec<f64>,
        offset: f64,
    },
    General,
}

#[derive(Debug, Clone)]
pub struct ImmersionChart {
    m: usize,
    components: Vec<Expr>,
    kind: ChartKind,
    params: Params,
    orientation: Orientation,
    jets: JetSpace,
}

impl ImmersionChart {
    pub fn hyperplane(a: &[f64], offset: f64) -> Result<Self, Error> {
        let m = a.len();
        let mut comps: Vec<Expr> = (1..=m).map(|i| Expr::Var(Var::X(i as u8))).collect();
        let mut last = Expr::Const(offset);
        for (i, &ai) in a.iter().enumerate().rev() {
            let term = Expr::binary(crate::expr::BinOp::Mul, Expr::Const(ai), Expr::Var(Var::X(i as u8 + 1)));
            last = Expr::binary(crate::expr::BinOp::Add, term, last);
        }
        comps.push(last);
        let mut chart = Self::general(comps, Params::new())?;
        chart.kind = ChartKind::Hyperplane { a: a.to_vec(), offset };
        Ok(chart)
    }

    /// `m + 1` component expressions in `x1..xm`.
    pub fn general(components: Vec<Expr>, params: Params) -> Result<Self, Error> {
        if components.len() < 2 {
            return Err(Error::Dimension { expected: 2, found: components.len() });
        }
        let m = components.len() - 1;
        if m > crate::expr::MAX_X as usize - 1 {
            return Err(Error::Dimension { expected: crate::expr::MAX_X as usize - 1, found: m });
        }
        for c in &components {
            for v in c.variables() {
                match v {
                    Var::X(i) if (i as usize) <= m => {}
                    v => return Err(Error::UnboundVariable(v)),
                }
            }
            for p in c.parameters() {
                if !params.contains_key(&p) {
                    return Err(Error::UnboundParameter(p));
                }
            }
        }
        Ok(ImmersionChart {
            m,
            components,
            kind: ChartKind::General,
            params,
            orientation: Orientation::Standard,
            jets: JetSpace::new(m, 4)?,
        })
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> &ChartKind {
        &self.kind
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// `φ(x)`.
    pub fn point(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        self.check(x)?;
        let b = Bindings::chart(x, &self.params)?;
        self.components.iter().map(|c| c.eval(&b)).collect()
    }

    fn check(&self, x: &[f64]) -> Result<(), Error> {
        if x.len() != self.m {
            return Err(Error::Dimension { expected: self.m, found: x.len() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointGeometry {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub sigma: f64,
    pub g: Matrix<f64>,
    pub g_inv: Matrix<f64>,
    /// h-unit normal, ambient coordinate components.
    pub xi: Vec<f64>,
    /// `ξ / σ`, Euclidean-unit.
    pub xi0: Vec<f64>,
    pub second_form: Matrix<f64>,
    /// `Aⁱⱼ = gⁱᵏ II_kj`.
    pub shape: Matrix<f64>,
    pub h_mean: f64,
    pub norm_a2: f64,
    pub principal: Vec<f64>,
    pub umbilic: bool,
}

/// All jets needed at one chart point, shared by the geometry, calculus and
/// residual routines.
#[derive(Debug, Clone)]
pub struct SurfacePoint {
    m: usize,
    x: Vec<f64>,
    /// `φ` truncated to order 2.
    phi: Vec<Jet>,
    x_seeds: Vec<Jet>,
    tangents: Vec<Vec<Jet>>,
    g: Matrix<Jet>,
    g_inv: Matrix<Jet>,
    xi0: Vec<Jet>,
    sigma: Jet,
    second_form: Matrix<Jet>,
    shape: Matrix<Jet>,
    h: Jet,
    /// `Γ(g)ᵏᵢⱼ` at the point.
    metric_christoffel: Vec<Matrix<f64>>,
    curvature: CurvatureData,
    params: Params,
}

impl SurfacePoint {
    pub fn new(space: &ConformalSpace, chart: &ImmersionChart, x: &[f64]) -> Result<Self, Error> {
        Self::with_mutation(space, chart, x, Mutation::None)
    }

    #[doc(hidden)]
    pub fn with_mutation(
        space: &ConformalSpace,
        chart: &ImmersionChart,
        x: &[f64],
        mutation: Mutation,
    ) -> Result<Self, Error> {
        chart.check(x)?;
        let m = chart.m;
        if space.n() != m + 1 {
            return Err(Error::Dimension { expected: m + 1, found: space.n() });
        }
        let seeds = chart.jets.seeds(x)?;
        let b = Bindings::chart(&seeds, &chart.params)?;
        let phi4: Vec<Jet> = chart.components.iter().map(|c| c.eval(&b)).collect::<Result<_, _>>()?;
        let phi: Vec<Jet> = phi4.iter().map(|j| j.truncate(2)).collect();
        let p: Vec<f64> = phi.iter().map(Jet::value).collect();

        let mut tangents = Vec::with_capacity(m);
        let mut hess = Vec::with_capacity(m);
        for i in 0..m {
            let d: Vec<Jet> = phi4.iter().map(|c| c.derivative(i)).collect::<Result<_, _>>()?;
            tangents.push(d.iter().map(|j| j.truncate(2)).collect::<Vec<_>>());
            let mut row = Vec::with_capacity(m);
            for j in 0..m {
                row.push(d.iter().map(|c| c.derivative(j)).collect::<Result<Vec<_>, _>>()?);
            }
            hess.push(row);
        }

        let s_amb = space.sigma_jet(&p)?;
        let curvature = CurvatureData::from_sigma_jet(&p, &s_amb, mutation)?;
        let sigma = s_amb.truncate(2).compose(&phi)?;
        let mut psi = Vec::with_capacity(m + 1);
        for k in 0..=m {
            let dk = s_amb.derivative(k)?.compose(&phi)?;
            psi.push(dk.div(&sigma)?.neg());
        }
        if mutation == Mutation::FlipChristoffelSign {
            psi.iter_mut().for_each(|j| *j = j.neg());
        }

        let g0: Matrix<Jet> =
            (0..m).map(|i| (0..m).map(|j| linalg::dot(&tangents[i], &tangents[j])).collect()).collect();
        let gram = linalg::determinant(&linalg::values(&g0));
        if !(gram > RANK_FLOOR) {
            return Err(Error::RankDeficient { gram });
        }
        let g0_inv = linalg::inverse(&g0)?;
        let inv_s2 = sigma.square().recip()?;
        let g: Matrix<Jet> = g0.iter().map(|r| r.iter().map(|e| e.mul(&inv_s2)).collect()).collect();
        let g_inv: Matrix<Jet> = g0_inv.iter().map(|r| r.iter().map(|e| e.mul(&sigma.square())).collect()).collect();

        let xi0 = euclidean_normal(&tangents, &g0_inv, chart.orientation)?;

        let mut second_form: Matrix<Jet> = Vec::with_capacity(m);
        for i in 0..m {
            let mut row = Vec::with_capacity(m);
            for j in 0..m {
                let gam = christoffel_contract(&psi, &tangents[i], &tangents[j]);
                let acc: Vec<Jet> = hess[i][j].iter().zip(&gam).map(|(f, c)| f.add(c)).collect();
                row.push(linalg::dot(&xi0, &acc).div(&sigma)?);
            }
            second_form.push(row);
        }
        let shape = linalg::mat_mul(&g_inv, &second_form);
        let mut tr = shape[0][0].clone();
        for i in 1..m {
            tr = tr.add(&shape[i][i]);
        }
        let h = tr.scale(1.0 / m as f64);

        let ginv_v = linalg::values(&g_inv);
        let dg = |l: usize, i: usize, j: usize| g[i][j].first(l);
        let metric_christoffel = (0..m)
            .map(|k| {
                (0..m)
                    .map(|i| {
                        (0..m)
                            .map(|j| {
                                0.5 * (0..m)
                                    .map(|l| ginv_v[k][l] * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j)))
                                    .sum::<f64>()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();

        let x_seeds = (0..m).map(|i| chart.jets.seed_at(2, x, i)).collect::<Result<_, _>>()?;
        Ok(SurfacePoint {
            m,
            x: x.to_vec(),
            phi,
            x_seeds,
            tangents,
            g,
            g_inv,
            xi0,
            sigma,
            second_form,
            shape,
            h,
            metric_christoffel,
            curvature,
            params: chart.params.clone(),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn ambient_point(&self) -> Vec<f64> {
        self.phi.iter().map(Jet::value).collect()
    }

    pub fn curvature(&self) -> &CurvatureData {
        &self.curvature
    }

    /// Mean curvature as an order-2 chart jet.
    pub fn mean_curvature(&self) -> &Jet {
        &self.h
    }

    pub fn sigma(&self) -> &Jet {
        &self.sigma
    }

    pub fn xi0(&self) -> Vec<f64> {
        self.xi0.iter().map(Jet::value).collect()
    }

    pub fn xi(&self) -> Vec<f64> {
        let s = self.sigma.value();
        self.xi0.iter().map(|c| s * c.value()).collect()
    }

    pub fn tangent(&self, i: usize) -> Vec<f64> {
        self.tangents[i].iter().map(Jet::value).collect()
    }

    pub fn metric(&self) -> Matrix<f64> {
        linalg::values(&self.g)
    }

    pub fn metric_inverse(&self) -> Matrix<f64> {
        linalg::values(&self.g_inv)
    }

    pub fn shape(&self) -> Matrix<f64> {
        linalg::values(&self.shape)
    }

    pub fn norm_a2(&self) -> f64 {
        let a = self.shape();
        let mut acc = 0.0;
        for i in 0..self.m {
            for j in 0..self.m {
                acc += a[i][j] * a[j][i];
            }
        }
        acc
    }

    /// Evaluates an expression on the surface: `x1..xm` are the chart
    /// variables and `z` is bound to the last component of `φ`.
    pub fn scalar(&self, e: &Expr) -> Result<Jet, Error> {
        self.scalar_with(e, &self.params)
    }

    pub fn scalar_with(&self, e: &Expr, params: &Params) -> Result<Jet, Error> {
        let b = Bindings::chart(&self.x_seeds, params)?.with(Var::Z, self.phi[self.m].clone());
        e.eval(&b)
    }

    /// `grad_g u` in the chart basis.
    pub fn gradient(&self, u: &Jet) -> Vec<f64> {
        let gi = self.metric_inverse();
        (0..self.m).map(|i| (0..self.m).map(|j| gi[i][j] * u.first(j)).sum()).collect()
    }

    /// `Δ_g u = gⁱʲ(∂ᵢ∂ⱼu − Γ(g)ᵏᵢⱼ ∂ₖu)`.
    pub fn laplacian(&self, u: &Jet) -> f64 {
        let gi = self.metric_inverse();
        let mut acc = 0.0;
        for i in 0..self.m {
            for j in 0..self.m {
                let mut t = u.second(i, j);
                for k in 0..self.m {
                    t -= self.metric_christoffel[k][i][j] * u.first(k);
                }
                acc += gi[i][j] * t;
            }
        }
        acc
    }

    /// `|v|_g` for a tangent vector in chart components.
    pub fn norm(&self, v: &[f64]) -> f64 {
        libm::sqrt(linalg::bilinear(&self.metric(), v, v).max(0.0))
    }

    /// `A v` for chart components.
    pub fn apply_shape(&self, v: &[f64]) -> Vec<f64> {
        let a = self.shape();
        a.iter().map(|row| linalg::dot_f64(row, v)).collect()
    }

    /// `(Ric(ξ,ξ), (Ric ξ)ᵀ)` with the tangential part in chart components.
    pub fn ricci_projections(&self) -> (f64, Vec<f64>) {
        let xi = self.xi();
        let nn = self.curvature.ricci_form(&xi, &xi);
        let lowered: Vec<f64> = (0..self.m).map(|j| self.curvature.ricci_form(&xi, &self.tangent(j))).collect();
        let gi = self.metric_inverse();
        let t = (0..self.m).map(|i| linalg::dot_f64(&gi[i], &lowered)).collect();
        (nn, t)
    }

    pub fn geometry(&self) -> PointGeometry {
        let g = self.metric();
        let second_form = linalg::values(&self.second_form);
        let h_mean = self.h.value();
        let principal =
            linalg::generalized_eigenvalues(&second_form, &g).unwrap_or_else(|| alloc::vec![f64::NAN; self.m]);
        let spread = principal.iter().fold(0.0f64, |a, l| a.max((l - h_mean).abs()));
        PointGeometry {
            x: self.x.clone(),
            p: self.ambient_point(),
            sigma: self.sigma.value(),
            g_inv: self.metric_inverse(),
            g,
            xi: self.xi(),
            xi0: self.xi0(),
            second_form,
            shape: self.shape(),
            h_mean,
            norm_a2: self.norm_a2(),
            umbilic: spread < UMBILIC_TOL * (1.0 + h_mean.abs()),
            principal,
        }
    }
}

/// Unit Euclidean normal to `span(E)`, as jets, oriented per `orientation`.
fn euclidean_normal(tangents: &[Vec<Jet>], g0_inv: &Matrix<Jet>, orientation: Orientation) -> Result<Vec<Jet>, Error> {
    let m = tangents.len();
    let n = m + 1;
    let mut best: Option<(f64, Vec<Jet>)> = None;
    for b in 0..n {
        let w: Vec<Jet> = tangents.iter().map(|e| e[b].clone()).collect();
        let c = linalg::mat_vec(g0_inv, &w);
        let mut v: Vec<Jet> = (0..n)
            .map(|k| {
                let mut acc = tangents[0][k].mul(&c[0]);
                for i in 1..m {
                    acc = acc.add(&tangents[i][k].mul(&c[i]));
                }
                acc.neg()
            })
            .collect();
        v[b] = v[b].add_const(1.0);
        let len = linalg::dot(&v, &v).value();
        if best.as_ref().is_none_or(|(l, _)| len > *l) {
            best = Some((len, v));
        }
    }
    let (_, v) = best.unwrap();
    let inv_len = linalg::dot(&v, &v).powf(-0.5)?;
    let mut xi0: Vec<Jet> = v.iter().map(|c| c.mul(&inv_len)).collect();
    let mut frame: Matrix<f64> = tangents.iter().map(|e| e.iter().map(Jet::value).collect()).collect();
    frame.push(xi0.iter().map(Jet::value).collect());
    let mut flip = linalg::determinant(&frame) < 0.0;
    if orientation == Orientation::Reversed {
        flip = !flip;
    }
    if flip {
        xi0.iter_mut().for_each(|c| *c = c.neg());
    }
    Ok(xi0)
}

pub fn geometry_at(space: &ConformalSpace, chart: &ImmersionChart, x: &[f64]) -> Result<PointGeometry, Error> {
    Ok(SurfacePoint::new(space, chart, x)?.geometry())
}

/// `(grad_g u, Δ_g u)` for `u` in chart variables (and `z` restricted to the surface).
pub fn surface_scalar_calculus(
    space: &ConformalSpace,
    chart: &ImmersionChart,
    u: &Expr,
    x: &[f64],
) -> Result<(Vec<f64>, f64), Error> {
    let sp = SurfacePoint::new(space, chart, x)?;
    let uj = sp.scalar(u)?;
    Ok((sp.gradient(&uj), sp.laplacian(&uj)))
}

pub fn ricci_projections(space: &ConformalSpace, chart: &ImmersionChart, x: &[f64]) -> Result<(f64, Vec<f64>), Error> {
    Ok(SurfacePoint::new(space, chart, x)?.ricci_projections())
}
