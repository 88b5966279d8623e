//! Small dense linear algebra over [`Scalar`]s, sized for m ≤ 9.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, MathError};
use crate::scalar::Scalar;

pub type Matrix<S> = Vec<Vec<S>>;

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = a[0].mul(&b[0]);
    for (x, y) in a.iter().zip(b).skip(1) {
        acc = acc.add(&x.mul(y));
    }
    acc
}

pub fn dot_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `vᵀ M w` for a real matrix.
pub fn bilinear(m: &[Vec<f64>], v: &[f64], w: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, mij) in row.iter().enumerate() {
            acc += v[i] * mij * w[j];
        }
    }
    acc
}

pub fn mat_vec<S: Scalar>(m: &[Vec<S>], v: &[S]) -> Vec<S> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn mat_mul<S: Scalar>(a: &[Vec<S>], b: &[Vec<S>]) -> Matrix<S> {
    let cols = b[0].len();
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let col: Vec<S> = b.iter().map(|r| r[j].clone()).collect();
                    dot(row, &col)
                })
                .collect()
        })
        .collect()
}

pub fn values<S: Scalar>(m: &[Vec<S>]) -> Matrix<f64> {
    m.iter().map(|r| r.iter().map(Scalar::value).collect()).collect()
}

/// Inverse by Gauss–Jordan elimination with partial pivoting on values.
pub fn inverse<S: Scalar>(a: &[Vec<S>]) -> Result<Matrix<S>, Error> {
    let n = a.len();
    let one = a[0][0].lift(1.0);
    let zero = a[0][0].lift(0.0);
    let mut m: Matrix<S> = a.to_vec();
    let mut inv: Matrix<S> =
        (0..n).map(|i| (0..n).map(|j| if i == j { one.clone() } else { zero.clone() }).collect()).collect();
    let scale = a.iter().flatten().map(|x| libm::fabs(x.value())).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&i, &j| libm::fabs(m[i][col].value()).total_cmp(&libm::fabs(m[j][col].value()))).unwrap();
        let pv = m[pivot][col].value();
        if libm::fabs(pv) <= 1e-14 * scale {
            return Err(MathError::SingularDivision { value: pv }.into());
        }
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col].clone();
        for j in 0..n {
            m[col][j] = m[col][j].div(&p)?;
            inv[col][j] = inv[col][j].div(&p)?;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let factor = m[i][col].clone();
            for j in 0..n {
                m[i][j] = m[i][j].sub(&factor.mul(&m[col][j]));
                inv[i][j] = inv[i][j].sub(&factor.mul(&inv[col][j]));
            }
        }
    }
    Ok(inv)
}

pub fn determinant(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m = a.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(col, pivot);
            det = -det;
        }
        det *= m[col][col];
        for i in col + 1..n {
            let f = m[i][col] / m[col][col];
            for j in col..n {
                m[i][j] -= f * m[col][j];
            }
        }
    }
    det
}

/// Lower-triangular `L` with `a = L Lᵀ`; `None` unless `a` is positive definite.
pub fn cholesky(a: &[Vec<f64>]) -> Option<Matrix<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if d <= 0.0 {
                    return None;
                }
                l[i][i] = libm::sqrt(d);
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        let diag: f64 = (0..n).map(|i| m[i][i] * m[i][i]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q] == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of `g⁻¹ b` for symmetric `b` and positive definite `g`.
pub fn generalized_eigenvalues(b: &[Vec<f64>], g: &[Vec<f64>]) -> Option<Vec<f64>> {
    let l = cholesky(g)?;
    let n = g.len();
    let linv = inverse(&l).ok()?;
    let lt_inv: Matrix<f64> = (0..n).map(|i| (0..n).map(|j| linv[j][i]).collect()).collect();
    let c = mat_mul(&mat_mul(&linv, b), &lt_inv);
    let sym: Matrix<f64> = (0..n).map(|i| (0..n).map(|j| 0.5 * (c[i][j] + c[j][i])).collect()).collect();
    Some(symmetric_eigenvalues(&sym))
}
