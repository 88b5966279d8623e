//! Truncated multivariate Taylor expansions ("jets").
//!
//! A [`Jet`] of order `K` in `n` variables stores the Taylor coefficients
//! `∂^α f / α!` for every multi-index `|α| ≤ K`, densely, in graded
//! lexicographic order. Arithmetic is truncated polynomial arithmetic, and
//! elementary functions are applied by composing their univariate Taylor
//! series with the nilpotent part of the argument.
//!
//! Jets that are combined must come from the same [`JetSpace`] shape. The
//! layout (monomial table plus the precomputed product table) is shared
//! behind an `Arc`, so jets are cheap to clone and `Send + Sync`.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, MathError};
use crate::scalar::{checked_recip, real_power_coefficients, Elementary};

pub const MAX_VARS: usize = 16;
pub const MAX_ORDER: usize = 15;
pub const DEFAULT_ORDER: usize = 3;

/// Exponent vector of a monomial.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn new(exponents: Vec<u8>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n_vars: usize) -> Self {
        MultiIndex(vec![0; n_vars])
    }

    pub fn unit(n_vars: usize, var: usize) -> Self {
        let mut e = vec![0; n_vars];
        e[var] = 1;
        MultiIndex(e)
    }

    /// Multi-index of the mixed partial `∂_{v₀} ∂_{v₁} …`.
    pub fn from_vars(n_vars: usize, vars: &[usize]) -> Self {
        let mut e = vec![0u8; n_vars];
        for &v in vars {
            e[v] += 1;
        }
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u8] {
        &self.0
    }

    pub fn n_vars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    /// `α! = Π αᵢ!`
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&e| (1..=e as u64).product::<u64>() as f64).product()
    }

    fn key(&self) -> u64 {
        self.0.iter().enumerate().fold(0u64, |k, (i, &e)| k | ((e as u64) << (4 * i)))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "α{:?}", self.0)
    }
}

/// Monomial table and truncated product table for one `(n_vars, order)`.
pub struct Layout {
    n_vars: usize,
    order: usize,
    monomials: Vec<MultiIndex>,
    factorials: Vec<f64>,
    /// `degree_end[d]` = number of monomials of degree `≤ d`.
    degree_end: Vec<usize>,
    index: BTreeMap<u64, usize>,
    /// `(i, j, k)`: monomial `i` times monomial `j` is monomial `k`.
    products: Vec<[u32; 3]>,
    lower: Option<Arc<Layout>>,
}

impl fmt::Debug for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Layout")
            .field("n_vars", &self.n_vars)
            .field("order", &self.order)
            .field("len", &self.monomials.len())
            .finish()
    }
}

fn push_exponents(n: usize, remaining: usize, prefix: &mut Vec<u8>, out: &mut Vec<MultiIndex>) {
    if prefix.len() + 1 == n {
        prefix.push(remaining as u8);
        out.push(MultiIndex(prefix.clone()));
        prefix.pop();
        return;
    }
    for e in (0..=remaining).rev() {
        prefix.push(e as u8);
        push_exponents(n, remaining - e, prefix, out);
        prefix.pop();
    }
}

impl Layout {
    fn build(n_vars: usize, order: usize, lower: Option<Arc<Layout>>) -> Layout {
        let mut monomials = Vec::new();
        let mut degree_end = Vec::with_capacity(order + 1);
        for d in 0..=order {
            if n_vars == 0 {
                if d == 0 {
                    monomials.push(MultiIndex(Vec::new()));
                }
            } else {
                push_exponents(n_vars, d, &mut Vec::with_capacity(n_vars), &mut monomials);
            }
            degree_end.push(monomials.len());
        }
        let index: BTreeMap<u64, usize> = monomials.iter().enumerate().map(|(i, m)| (m.key(), i)).collect();
        let factorials = monomials.iter().map(MultiIndex::factorial).collect();
        let degrees: Vec<usize> = monomials.iter().map(MultiIndex::degree).collect();
        let keys: Vec<u64> = monomials.iter().map(MultiIndex::key).collect();
        let mut products = Vec::new();
        for i in 0..monomials.len() {
            let limit = degree_end[order - degrees[i]];
            for j in 0..limit {
                // Packed nibbles add without carry because every exponent stays ≤ order.
                let k = index[&(keys[i] + keys[j])];
                products.push([i as u32, j as u32, k as u32]);
            }
        }
        Layout { n_vars, order, monomials, factorials, degree_end, index, products, lower }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[MultiIndex] {
        &self.monomials
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        if alpha.n_vars() != self.n_vars || alpha.degree() > self.order {
            return None;
        }
        self.index.get(&alpha.key()).copied()
    }
}

/// Factory for jets of a fixed number of variables, holding one layout per
/// order `0..=order`.
#[derive(Clone, Debug)]
pub struct JetSpace {
    layouts: Vec<Arc<Layout>>,
}

impl JetSpace {
    pub fn new(n_vars: usize, order: usize) -> Result<Self, Error> {
        if n_vars > MAX_VARS || order > MAX_ORDER {
            return Err(Error::JetShape { n_vars, order });
        }
        let mut layouts: Vec<Arc<Layout>> = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let lower = layouts.last().cloned();
            layouts.push(Arc::new(Layout::build(n_vars, k, lower)));
        }
        Ok(JetSpace { layouts })
    }

    pub fn n_vars(&self) -> usize {
        self.layouts[0].n_vars
    }

    pub fn order(&self) -> usize {
        self.layouts.len() - 1
    }

    pub fn layout(&self, order: usize) -> &Arc<Layout> {
        &self.layouts[order]
    }

    pub fn constant(&self, c: f64) -> Jet {
        Jet::constant(self.layouts.last().unwrap().clone(), c)
    }

    pub fn constant_at(&self, order: usize, c: f64) -> Jet {
        Jet::constant(self.layouts[order].clone(), c)
    }

    /// Jet of the coordinate function `x_var` expanded at `point`.
    pub fn seed(&self, point: &[f64], var: usize) -> Result<Jet, Error> {
        self.seed_at(self.order(), point, var)
    }

    pub fn seed_at(&self, order: usize, point: &[f64], var: usize) -> Result<Jet, Error> {
        let n = self.n_vars();
        if point.len() != n {
            return Err(Error::Dimension { expected: n, found: point.len() });
        }
        if var >= n {
            return Err(Error::VarOutOfRange { index: var, n_vars: n });
        }
        let layout = self.layouts[order].clone();
        let mut jet = Jet::constant(layout, point[var]);
        if order >= 1 {
            // Degree-one monomials sit right after the constant, in variable order.
            jet.coeffs[1 + var] = 1.0;
        }
        Ok(jet)
    }

    /// Seeds for every coordinate at `point`.
    pub fn seeds(&self, point: &[f64]) -> Result<Vec<Jet>, Error> {
        (0..self.n_vars()).map(|v| self.seed(point, v)).collect()
    }
}

/// Jet of the coordinate function `x_var` at `point`, in a fresh space.
///
/// Prefer [`JetSpace::seed`] in loops; building the layout is not free.
pub fn seed(point: &[f64], var: usize, order: usize) -> Result<Jet, Error> {
    JetSpace::new(point.len(), order)?.seed(point, var)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("n_vars", &self.layout.n_vars)
            .field("order", &self.layout.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    pub fn constant(layout: Arc<Layout>, c: f64) -> Jet {
        let mut coeffs = vec![0.0; layout.len()];
        coeffs[0] = c;
        Jet { layout, coeffs }
    }

    pub fn from_coeffs(layout: Arc<Layout>, coeffs: Vec<f64>) -> Result<Jet, Error> {
        if coeffs.len() != layout.len() {
            return Err(Error::Dimension { expected: layout.len(), found: coeffs.len() });
        }
        Ok(Jet { layout, coeffs })
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn n_vars(&self) -> usize {
        self.layout.n_vars
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Taylor coefficient `∂^α f / α!`; zero above the truncation order.
    pub fn coefficient(&self, alpha: &MultiIndex) -> f64 {
        self.layout.position(alpha).map_or(0.0, |i| self.coeffs[i])
    }

    /// The partial derivative `∂^α f` at the expansion point.
    pub fn partial(&self, alpha: &MultiIndex) -> f64 {
        self.layout.position(alpha).map_or(0.0, |i| self.coeffs[i] * self.layout.factorials[i])
    }

    pub fn first(&self, var: usize) -> f64 {
        if self.layout.order == 0 {
            0.0
        } else {
            self.coeffs[1 + var]
        }
    }

    pub fn second(&self, a: usize, b: usize) -> f64 {
        self.partial(&MultiIndex::from_vars(self.n_vars(), &[a, b]))
    }

    pub fn gradient(&self) -> Vec<f64> {
        (0..self.n_vars()).map(|v| self.first(v)).collect()
    }

    pub fn hessian(&self) -> Vec<Vec<f64>> {
        let n = self.n_vars();
        (0..n).map(|a| (0..n).map(|b| self.second(a, b)).collect()).collect()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0.0)
    }

    pub fn constant_like(&self, c: f64) -> Jet {
        Jet::constant(self.layout.clone(), c)
    }

    fn assert_compatible(&self, other: &Jet) {
        assert!(
            Arc::ptr_eq(&self.layout, &other.layout)
                || (self.layout.n_vars == other.layout.n_vars && self.layout.order == other.layout.order),
            "jets of different shapes combined: {:?} vs {:?}",
            self.layout,
            other.layout
        );
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        self.assert_compatible(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f(a, b)).collect();
        Jet { layout: self.layout.clone(), coeffs }
    }

    pub fn add(&self, other: &Jet) -> Jet {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Jet {
        self.scale(-1.0)
    }

    pub fn scale(&self, c: f64) -> Jet {
        Jet { layout: self.layout.clone(), coeffs: self.coeffs.iter().map(|&a| a * c).collect() }
    }

    pub fn add_const(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// Truncated polynomial product.
    pub fn mul(&self, other: &Jet) -> Jet {
        self.assert_compatible(other);
        if other.is_constant() {
            return self.scale(other.value());
        }
        if self.is_constant() {
            return other.scale(self.value());
        }
        let mut out = vec![0.0; self.coeffs.len()];
        for &[i, j, k] in &self.layout.products {
            let a = self.coeffs[i as usize];
            if a != 0.0 {
                out[k as usize] += a * other.coeffs[j as usize];
            }
        }
        Jet { layout: self.layout.clone(), coeffs: out }
    }

    /// `Σ cₖ (self − self.value)ᵏ` evaluated by Horner's rule.
    fn compose_series(&self, c: &[f64]) -> Jet {
        let mut d = self.clone();
        d.coeffs[0] = 0.0;
        let top = c.len() - 1;
        let mut r = self.constant_like(c[top]);
        if d.is_constant() {
            r.coeffs[0] = c[0];
            return r;
        }
        for k in (0..top).rev() {
            r = r.mul(&d);
            r.coeffs[0] += c[k];
        }
        r
    }

    pub fn recip(&self) -> Result<Jet, MathError> {
        let inv = checked_recip(self.value())?;
        let mut c = vec![0.0; self.order() + 1];
        let mut p = inv;
        for (k, ck) in c.iter_mut().enumerate() {
            *ck = if k % 2 == 0 { p } else { -p };
            p *= inv;
        }
        Ok(self.compose_series(&c))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet, MathError> {
        if other.is_constant() {
            return Ok(self.scale(checked_recip(other.value())?));
        }
        Ok(self.mul(&other.recip()?))
    }

    pub fn combine(&self, other: &Jet, op: CombineOp) -> Result<Jet, MathError> {
        Ok(match op {
            CombineOp::Add => self.add(other),
            CombineOp::Sub => self.sub(other),
            CombineOp::Mul => self.mul(other),
            CombineOp::Div => self.div(other)?,
        })
    }

    pub fn elementary(&self, f: Elementary) -> Result<Jet, MathError> {
        if f == Elementary::Abs {
            let v = self.value();
            if libm::fabs(v) < crate::scalar::ABS_KINK {
                return Err(MathError::Domain { func: "abs", value: v });
            }
            return Ok(if v > 0.0 { self.clone() } else { self.neg() });
        }
        let c = f.taylor_coefficients(self.value(), self.order())?;
        Ok(self.compose_series(&c))
    }

    pub fn powi(&self, n: i64) -> Result<Jet, MathError> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut base = self.clone();
        let mut acc = self.constant_like(1.0);
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// `self^r`; integer exponents accept any nonzero base.
    pub fn pow_r(&self, r: crate::Rational) -> Result<Jet, MathError> {
        crate::scalar::Scalar::pow_rational(self, r)
    }

    /// `self^r` for a real exponent; the base must be positive.
    pub fn powf(&self, r: f64) -> Result<Jet, MathError> {
        let a = self.value();
        if a <= 0.0 {
            return Err(MathError::Domain { func: "pow", value: a });
        }
        let c = real_power_coefficients(a, r, self.order());
        Ok(self.compose_series(&c))
    }

    /// `∂f/∂x_var`, one order lower.
    pub fn derivative(&self, var: usize) -> Result<Jet, Error> {
        let n = self.n_vars();
        if var >= n {
            return Err(Error::VarOutOfRange { index: var, n_vars: n });
        }
        let lower = self.layout.lower.clone().ok_or(Error::JetShape { n_vars: n, order: 0 })?;
        let coeffs = lower
            .monomials
            .iter()
            .map(|beta| {
                let mut up = beta.clone();
                up.0[var] += 1;
                let scale = up.0[var] as f64;
                self.coeffs[self.layout.index[&up.key()]] * scale
            })
            .collect();
        Ok(Jet { layout: lower, coeffs })
    }

    /// Drops every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        let mut layout = self.layout.clone();
        while layout.order > order {
            layout = layout.lower.clone().expect("layout chain reaches order 0");
        }
        let len = layout.len();
        Jet { layout, coeffs: self.coeffs[..len].to_vec() }
    }

    /// Substitutes `inner` for the variables of `self`.
    ///
    /// `self` is read as a polynomial in the displacement from its expansion
    /// point, so `inner[k].value()` must equal the k-th expansion coordinate.
    /// The result lives in the layout of `inner`.
    pub fn compose(&self, inner: &[Jet]) -> Result<Jet, Error> {
        let n = self.n_vars();
        if inner.len() != n {
            return Err(Error::Dimension { expected: n, found: inner.len() });
        }
        let first = inner.first().ok_or(Error::Dimension { expected: 1, found: 0 })?;
        let k_inner = first.order();
        let max_pow = self.order().min(k_inner);
        // powers[v][e] = (inner_v − value)^e
        let mut powers: Vec<Vec<Jet>> = Vec::with_capacity(n);
        for jet in inner {
            first.assert_compatible(jet);
            let mut d = jet.clone();
            d.coeffs[0] = 0.0;
            let mut row = vec![first.constant_like(1.0), d.clone()];
            for e in 2..=max_pow {
                let next = row[e - 1].mul(&d);
                row.push(next);
            }
            row.truncate(max_pow + 1);
            powers.push(row);
        }
        let mut out = vec![0.0; first.coeffs.len()];
        let limit = self.layout.degree_end[max_pow];
        for (idx, alpha) in self.layout.monomials[..limit].iter().enumerate() {
            let c = self.coeffs[idx];
            if c == 0.0 {
                continue;
            }
            let mut term: Option<Jet> = None;
            for (v, &e) in alpha.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let p = &powers[v][e as usize];
                term = Some(match term {
                    None => p.clone(),
                    Some(t) => t.mul(p),
                });
            }
            match term {
                None => out[0] += c,
                Some(t) => {
                    for (o, &tc) in out.iter_mut().zip(&t.coeffs) {
                        *o += c * tc;
                    }
                }
            }
        }
        Ok(Jet { layout: first.layout.clone(), coeffs: out })
    }
}
