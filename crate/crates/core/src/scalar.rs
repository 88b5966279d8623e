//! Scalars the expression evaluator and the geometry routines are generic over.

use crate::error::MathError;
use crate::jet::Jet;
use crate::Rational;

/// Smallest magnitude accepted as a divisor.
pub const DIVISION_FLOOR: f64 = 1e-300;
/// `abs` is rejected closer than this to its kink.
pub const ABS_KINK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Elementary {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Atan,
    Abs,
}

impl Elementary {
    pub const ALL: [Elementary; 7] = [
        Elementary::Exp,
        Elementary::Ln,
        Elementary::Sqrt,
        Elementary::Sin,
        Elementary::Cos,
        Elementary::Atan,
        Elementary::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Elementary::Exp => "exp",
            Elementary::Ln => "ln",
            Elementary::Sqrt => "sqrt",
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Atan => "atan",
            Elementary::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Taylor coefficients `f⁽ᵏ⁾(a)/k!` for `k = 0..=order`.
    pub fn taylor_coefficients(self, a: f64, order: usize) -> Result<alloc::vec::Vec<f64>, MathError> {
        use alloc::vec;
        let mut c = vec![0.0; order + 1];
        match self {
            Elementary::Exp => {
                let e = libm::exp(a);
                let mut fact = 1.0;
                for (k, ck) in c.iter_mut().enumerate() {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    *ck = e / fact;
                }
            }
            Elementary::Ln => {
                if a <= 0.0 {
                    return Err(MathError::Domain { func: "ln", value: a });
                }
                c[0] = libm::log(a);
                let mut p = 1.0;
                for k in 1..=order {
                    p *= a;
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    c[k] = sign / (k as f64 * p);
                }
            }
            Elementary::Sqrt => {
                if a <= 0.0 {
                    return Err(MathError::Domain { func: "sqrt", value: a });
                }
                return Ok(real_power_coefficients(a, 0.5, order));
            }
            Elementary::Sin | Elementary::Cos => {
                let (s, co) = (libm::sin(a), libm::cos(a));
                let cycle = if self == Elementary::Sin { [s, co, -s, -co] } else { [co, -s, -co, s] };
                let mut fact = 1.0;
                for (k, ck) in c.iter_mut().enumerate() {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    *ck = cycle[k % 4] / fact;
                }
            }
            Elementary::Atan => {
                c[0] = libm::atan(a);
                // atan' = 1/(1 + s²), s = a + t; reciprocal series in t.
                let b = [1.0 + a * a, 2.0 * a, 1.0];
                let mut q = vec![0.0; order];
                for k in 0..order {
                    let mut acc = if k == 0 { 1.0 } else { 0.0 };
                    if k >= 1 {
                        acc -= b[1] * q[k - 1];
                    }
                    if k >= 2 {
                        acc -= b[2] * q[k - 2];
                    }
                    q[k] = acc / b[0];
                }
                for k in 1..=order {
                    c[k] = q[k - 1] / k as f64;
                }
            }
            Elementary::Abs => {
                if libm::fabs(a) < ABS_KINK {
                    return Err(MathError::Domain { func: "abs", value: a });
                }
                let sign = if a > 0.0 { 1.0 } else { -1.0 };
                c[0] = libm::fabs(a);
                if order >= 1 {
                    c[1] = sign;
                }
            }
        }
        Ok(c)
    }

    pub fn eval(self, a: f64) -> Result<f64, MathError> {
        match self {
            Elementary::Exp => Ok(libm::exp(a)),
            Elementary::Ln if a > 0.0 => Ok(libm::log(a)),
            Elementary::Sqrt if a > 0.0 => Ok(libm::sqrt(a)),
            Elementary::Sin => Ok(libm::sin(a)),
            Elementary::Cos => Ok(libm::cos(a)),
            Elementary::Atan => Ok(libm::atan(a)),
            Elementary::Abs if libm::fabs(a) >= ABS_KINK => Ok(libm::fabs(a)),
            f => Err(MathError::Domain { func: f.name(), value: a }),
        }
    }
}

/// Taylor coefficients of `s ↦ s^r` at `a > 0`.
pub(crate) fn real_power_coefficients(a: f64, r: f64, order: usize) -> alloc::vec::Vec<f64> {
    let mut c = alloc::vec![0.0; order + 1];
    let mut binom = 1.0;
    for (k, ck) in c.iter_mut().enumerate() {
        if k > 0 {
            binom *= (r - (k - 1) as f64) / k as f64;
        }
        *ck = binom * libm::pow(a, r - k as f64);
    }
    c
}

/// A real-valued quantity carrying optional derivative information.
///
/// `f64` is the plain case; [`Jet`] carries a truncated Taylor expansion.
pub trait Scalar: Clone + core::fmt::Debug {
    fn value(&self) -> f64;
    /// A constant with the same shape as `self`.
    fn lift(&self, c: f64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, c: f64) -> Self;
    fn div(&self, other: &Self) -> Result<Self, MathError>;
    fn apply(&self, f: Elementary) -> Result<Self, MathError>;
    fn powi(&self, n: i64) -> Result<Self, MathError>;
    fn powf(&self, r: f64) -> Result<Self, MathError>;

    fn pow_rational(&self, r: Rational) -> Result<Self, MathError> {
        if *r.denom() == 1 {
            self.powi(*r.numer())
        } else {
            self.powf(*r.numer() as f64 / *r.denom() as f64)
        }
    }

    fn add_const(&self, c: f64) -> Self {
        self.add(&self.lift(c))
    }

    fn square(&self) -> Self {
        self.mul(self)
    }
}

pub(crate) fn checked_recip(v: f64) -> Result<f64, MathError> {
    if libm::fabs(v) < DIVISION_FLOOR {
        Err(MathError::SingularDivision { value: v })
    } else {
        Ok(1.0 / v)
    }
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
    fn div(&self, other: &Self) -> Result<Self, MathError> {
        Ok(self * checked_recip(*other)?)
    }
    fn apply(&self, f: Elementary) -> Result<Self, MathError> {
        f.eval(*self)
    }
    fn powi(&self, n: i64) -> Result<Self, MathError> {
        if n < 0 {
            let r = checked_recip(*self)?;
            Ok(libm::pow(r, (-n) as f64))
        } else {
            Ok(libm::pow(*self, n as f64))
        }
    }
    fn powf(&self, r: f64) -> Result<Self, MathError> {
        if *self <= 0.0 {
            return Err(MathError::Domain { func: "pow", value: *self });
        }
        Ok(libm::pow(*self, r))
    }
}

impl Scalar for Jet {
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn lift(&self, c: f64) -> Self {
        self.constant_like(c)
    }
    fn add(&self, other: &Self) -> Self {
        Jet::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        Jet::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        Jet::mul(self, other)
    }
    fn neg(&self) -> Self {
        Jet::neg(self)
    }
    fn scale(&self, c: f64) -> Self {
        Jet::scale(self, c)
    }
    fn div(&self, other: &Self) -> Result<Self, MathError> {
        Jet::div(self, other)
    }
    fn apply(&self, f: Elementary) -> Result<Self, MathError> {
        self.elementary(f)
    }
    fn powi(&self, n: i64) -> Result<Self, MathError> {
        Jet::powi(self, n)
    }
    fn powf(&self, r: f64) -> Result<Self, MathError> {
        Jet::powf(self, r)
    }
}
