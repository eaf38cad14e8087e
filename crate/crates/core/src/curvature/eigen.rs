//! Cyclic Jacobi eigensolver for small dense symmetric matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const OFF_DIAGONAL_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 64;

fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn off_diagonal(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)] * m[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Relative asymmetry `max|m_ij − m_ji| / max|m_ij|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst / scale
}

/// Full eigendecomposition by cyclic Jacobi rotations in row-major sweep
/// order. Returns the (unsorted) eigenvalues and the eigenvector matrix
/// whose columns pair with them.
pub fn jacobi_eigen(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if !m.is_square() {
        return Err(Error::Contract(format!(
            "matrix is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract("matrix has non-finite entries".into()));
    }
    let asym = asymmetry(m);
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }

    let n = m.nrows();
    // Work on the exactly symmetric part.
    let mut a = (m + m.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let target = OFF_DIAGONAL_TOL * frobenius(&a);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    Ok(((0..n).map(|i| a[(i, i)]).collect(), v))
}

/// Smallest eigenvalue of a symmetric matrix with a unit eigenvector.
///
/// Ties between equal eigenvalues go to the lowest column; the vector's
/// largest-magnitude entry is made positive, so the output is fully
/// deterministic.
pub fn min_eig_sym(m: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    if m.nrows() == 0 {
        return Err(Error::Contract("empty matrix has no eigenvalues".into()));
    }
    let (values, vectors) = jacobi_eigen(m)?;
    let mut best = 0;
    for (i, &val) in values.iter().enumerate() {
        if val < values[best] {
            best = i;
        }
    }
    let mut vec = vectors.column(best).into_owned();
    let norm = vec.norm();
    vec /= norm;
    let mut pivot = 0;
    for i in 0..vec.len() {
        if vec[i].abs() > vec[pivot].abs() {
            pivot = i;
        }
    }
    if vec[pivot] < 0.0 {
        vec.neg_mut();
    }
    Ok((values[best], vec))
}
