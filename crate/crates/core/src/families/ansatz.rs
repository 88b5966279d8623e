//! Exact reduction of the power ansätze to a quadratic in the exponent `t`.
//!
//! Each reduced equation is a sum of monomials `c · β^{(d₁)} β^{(d₂)} β^{(d₃)} β^{(d₄)}`
//! of total derivative order 4. Substituting `β = s^t` turns `β^{(d)}` into
//! `t(t−1)…(t−d+1) s^{t−d}`, so every monomial carries the common factor
//! `s^{4t−4}` and the equation becomes a polynomial in `t`, computed here
//! over the rationals.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnsatzEquation {
    /// `β = z^t` in the hyperplane ODE with `k_m² = 1/(m+1)`.
    Pq1Power,
    /// `β = (Σxᵢ + z + C)^t` in the horizontal-plane PDE, cleared of `β_z`.
    Pc1AffinePower,
}

impl AnsatzEquation {
    pub fn name(self) -> &'static str {
        match self {
            AnsatzEquation::Pq1Power => "pq1",
            AnsatzEquation::Pc1AffinePower => "pc1",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pq1" | "pq1_power" => Some(AnsatzEquation::Pq1Power),
            "pc1" | "pc1_affine_power" => Some(AnsatzEquation::Pc1AffinePower),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzReduction {
    pub equation: AnsatzEquation,
    pub m: BigRational,
    /// Polynomial in `t` before cancelling `t²`, ascending coefficients.
    pub full: Vec<BigRational>,
    /// `[a, b, c]` of `at² + bt + c`, scaled so that `a = m² + 4`.
    pub quadratic: [BigRational; 3],
    /// `full = prefactor · t² · quadratic`.
    pub prefactor: BigRational,
    /// Power of `s` multiplying every term: `4t − 4`, as `(coefficient of t, constant)`.
    pub exponent: (i64, i64),
    /// Exact rational roots, ascending; empty if the roots are not rational.
    pub roots: Vec<BigRational>,
}

type Term = (BigRational, [usize; 4]);

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn terms(eq: AnsatzEquation, m: &BigRational) -> Vec<Term> {
    let one = q(1);
    let two = q(2);
    let four = q(4);
    match eq {
        AnsatzEquation::Pq1Power => {
            let k2 = &one / (m + &one);
            let w = &one - &k2;
            vec![
                (m * (&one + &k2), [1, 1, 1, 1]),
                (((m * m - &two * m + &two) * &w - &two * m) / &two, [0, 1, 1, 2]),
                (-(m - &two) * &w / &two, [0, 0, 1, 3]),
                (-(m - &two) * (m - &four) * &w / &four, [0, 0, 2, 2]),
            ]
        }
        AnsatzEquation::Pc1AffinePower => {
            let mm2 = m - &two;
            vec![
                (&four * m, [0, 2, 1, 1]),
                (-&four * m * m, [1, 1, 1, 1]),
                (&four * m, [0, 2, 1, 1]),
                (-q(8) * m, [1, 1, 1, 1]),
                (&two * &mm2 * m, [0, 0, 3, 1]),
                (-&two * &mm2 * &mm2 * m, [0, 1, 1, 2]),
                (&mm2 * (m - &four) * m, [0, 0, 2, 2]),
            ]
        }
    }
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `t(t−1)…(t−d+1)`.
fn falling(d: usize) -> Vec<BigRational> {
    let mut p = vec![q(1)];
    for k in 0..d {
        p = poly_mul(&p, &[q(-(k as i64)), q(1)]);
    }
    p
}

fn exact_sqrt(x: &BigRational) -> Option<BigRational> {
    if x.is_negative() {
        return None;
    }
    let (n, d) = (x.numer(), x.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    (&sn * &sn == *n && &sd * &sd == *d).then(|| BigRational::new(sn, sd))
}

pub fn ansatz_reduce(eq: AnsatzEquation, m: &BigRational) -> Result<AnsatzReduction, Error> {
    if *m < q(2) {
        return Err(Error::Constraint(format!("m ≥ 2 required, got {m}")));
    }
    let mut full = vec![BigRational::zero(); 5];
    for (c, orders) in terms(eq, m) {
        let mut p = vec![c];
        for d in orders {
            p = poly_mul(&p, &falling(d));
        }
        for (i, v) in p.into_iter().enumerate() {
            full[i] += v;
        }
    }
    if !(full[0].is_zero() && full[1].is_zero()) {
        return Err(Error::Constraint("reduced polynomial is not divisible by t²".into()));
    }
    let lead = m * m + q(4);
    let prefactor = &full[4] / &lead;
    if prefactor.is_zero() {
        return Err(Error::Constraint("reduced polynomial has no t⁴ term".into()));
    }
    let quadratic = [&full[4] / &prefactor, &full[3] / &prefactor, &full[2] / &prefactor];
    let [a, b, c] = &quadratic;
    let disc = b * b - q(4) * a * c;
    let mut roots = match exact_sqrt(&disc) {
        Some(s) => {
            let two_a = q(2) * a;
            let mut r = vec![(-b - &s) / &two_a, (-b + &s) / &two_a];
            r.dedup();
            r
        }
        None => Vec::new(),
    };
    roots.sort();
    Ok(AnsatzReduction { equation: eq, m: m.clone(), full, quadratic, prefactor, exponent: (4, -4), roots })
}

pub fn ansatz_reduce_int(eq: AnsatzEquation, m: i64) -> Result<AnsatzReduction, Error> {
    ansatz_reduce(eq, &q(m))
}

/// `(m² − 2m)/(m² + 4)`.
pub fn nontrivial_root(m: &BigRational) -> BigRational {
    (m * m - q(2) * m) / (m * m + q(4))
}

fn term(out: &mut String, c: &BigRational, mono: &str) {
    if c.is_zero() {
        return;
    }
    if c.is_negative() {
        out.push('-');
    } else if !out.is_empty() {
        out.push('+');
    }
    let a = c.abs();
    if !(a.is_one() && !mono.is_empty()) {
        out.push_str(&format!("{a}"));
    }
    out.push_str(mono);
}

impl AnsatzReduction {
    pub fn polynomial_string(&self) -> String {
        let mut s = String::new();
        let [a, b, c] = &self.quadratic;
        term(&mut s, a, "t^2");
        term(&mut s, b, "t");
        term(&mut s, c, "");
        if s.is_empty() {
            s.push('0');
        }
        s
    }
}

impl fmt::Display for AnsatzReduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}=0", self.polynomial_string())?;
        if self.roots.is_empty() {
            return f.write_str("; no rational roots");
        }
        let roots: Vec<String> = self.roots.iter().map(|r| format!("t={r}")).collect();
        write!(f, "; {}", roots.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn m3_quadratic() {
        let r = ansatz_reduce_int(AnsatzEquation::Pq1Power, 3).unwrap();
        assert_eq!(r.to_string(), "13t^2+10t-3=0; t=-1, t=3/13");
        assert_eq!(r.prefactor, BigRational::new(3.into(), 16.into()));
        let r = ansatz_reduce_int(AnsatzEquation::Pc1AffinePower, 3).unwrap();
        assert_eq!(r.to_string(), "13t^2+10t-3=0; t=-1, t=3/13");
        // 4β_z² · pc1 = −m t² (13t² + 10t − 3) s^{4t−4}
        assert_eq!(r.prefactor, q(-3));
    }

    #[test]
    fn m4_and_m8() {
        let r = ansatz_reduce_int(AnsatzEquation::Pq1Power, 4).unwrap();
        assert_eq!(r.to_string(), "20t^2+12t-8=0; t=-1, t=2/5");
        let r = ansatz_reduce_int(AnsatzEquation::Pc1AffinePower, 8).unwrap();
        assert_eq!(r.to_string(), "68t^2+20t-48=0; t=-1, t=12/17");
    }

    #[test]
    fn rejects_small_m() {
        assert!(ansatz_reduce_int(AnsatzEquation::Pq1Power, 1).is_err());
    }
}
