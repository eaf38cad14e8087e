//! Closed-form curvatures of the cycles and of the ten-vertex tree, all at
//! `n = ∞` with unit edge weights.
//!
//! These are written out term by term and do not go through the local
//! quadratic form, so they serve as an independent check on the engine.
//! Indices are taken modulo the cycle length.

use crate::error::{Error, Result};
use crate::graph::T3_PARENT;

fn check(m: &[f64], len: Option<usize>) -> Result<()> {
    if let Some(len) = len {
        if m.len() != len {
            return Err(Error::InvalidParameter(format!(
                "expected {len} vertex weights, got {}",
                m.len()
            )));
        }
    }
    if let Some((i, &v)) = m
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v > 0.0))
    {
        return Err(Error::NonPositiveMeasure {
            vertex: i.to_string(),
            value: v,
        });
    }
    Ok(())
}

/// `(m(i-1), m(i), m(i+1))` on a cycle.
fn around(m: &[f64], i: usize) -> (f64, f64, f64) {
    let k = m.len();
    let i = i % k;
    (m[(i + k - 1) % k], m[i], m[(i + 1) % k])
}

/// Curvature on the triangle `C₃`.
pub fn ric_c3(m: &[f64], i: usize) -> Result<f64> {
    check(m, Some(3))?;
    let (prev, cur, next) = around(m, i);
    let (a, b, c) = (1.0 / prev, 1.0 / next, 1.0 / cur);
    let radicand = (c - a - b).powi(2) + 25.0 / 16.0 * (a - b).powi(2);
    Ok(7.0 / 4.0 * (a + b) - radicand.sqrt())
}

/// Curvature on the square `C₄`.
pub fn ric_c4(m: &[f64], i: usize) -> Result<f64> {
    check(m, Some(4))?;
    let (prev, cur, next) = around(m, i);
    let sum = prev + next;
    let prod = prev * next;
    let radicand = (1.0 / cur - 2.0 / sum).powi(2) + ((next - prev) / (2.0 * prod)).powi(2);
    Ok(sum / (2.0 * prod) + 2.0 / sum - radicand.sqrt())
}

/// Curvature on `C_k` for `k ≥ 5`: the smaller eigenvalue of
/// `[[1/m(i-1), 1/m(i)], [1/m(i), 1/m(i+1)]]`.
pub fn ric_ck(m: &[f64], i: usize) -> Result<f64> {
    if m.len() < 5 {
        return Err(Error::InvalidParameter(format!(
            "closed form needs a cycle of length at least 5, got {}",
            m.len()
        )));
    }
    check(m, None)?;
    let (prev, cur, next) = around(m, i);
    let (a, b) = (1.0 / prev, 1.0 / next);
    Ok(0.5 * (a + b) - 0.5 * ((a - b).powi(2) + 4.0 / (cur * cur)).sqrt())
}

/// Cycle curvature dispatching on the length.
pub fn ric_cycle(m: &[f64], i: usize) -> Result<f64> {
    match m.len() {
        3 => ric_c3(m, i),
        4 => ric_c4(m, i),
        _ => ric_ck(m, i),
    }
}

/// Smallest eigenvalue of a symmetric 3×3 matrix by the trigonometric
/// formula for the roots of its characteristic polynomial.
pub fn lambda_min_3x3(a: [[f64; 3]; 3]) -> f64 {
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    if p1 == 0.0 {
        return a[0][0].min(a[1][1]).min(a[2][2]);
    }
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos()
}

/// The 3×3 matrix whose least eigenvalue is the curvature at an interior
/// vertex of the tree. Indices are 0-based (`x_i` is `i - 1`).
pub fn t3_interior_matrix(m: &[f64], x: usize) -> Result<[[f64; 3]; 3]> {
    check(m, Some(10))?;
    let inv = |v: usize| 1.0 / m[v];
    let diag = match x {
        0 => [1, 2, 3].map(|y| 0.5 * (inv(y) - inv(0))),
        1..=3 => {
            let first_child = 4 + 2 * (x - 1);
            [
                0.5 * (3.0 * inv(first_child) - inv(x)),
                0.5 * (3.0 * inv(first_child + 1) - inv(x)),
                0.5 * (inv(0) - inv(x)),
            ]
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "vertex {x} is not interior in the tree"
            )))
        }
    };
    let off = inv(x);
    let mut a = [[off; 3]; 3];
    for i in 0..3 {
        a[i][i] = diag[i];
    }
    Ok(a)
}

/// Curvature on the ten-vertex tree.
pub fn ric_t3(m: &[f64], x: usize) -> Result<f64> {
    check(m, Some(10))?;
    match T3_PARENT.get(x) {
        None => Err(Error::InvalidParameter(format!(
            "vertex {x} is not in the tree"
        ))),
        Some(Some(parent)) if x >= 4 => Ok(0.5 * (1.0 / m[*parent] + 1.0 / m[x])),
        Some(_) => Ok(lambda_min_3x3(t3_interior_matrix(m, x)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::min_eig_sym;
    use crate::graph::t3;
    use nalgebra::dmatrix;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn c3_values() {
        for i in 0..3 {
            assert!(close(ric_c3(&[1.0; 3], i).unwrap(), 2.5, 1e-15));
        }
        assert!(close(ric_c3(&[5.0, 5.0, 2.0], 2).unwrap(), 0.6, 1e-15));
        let a = ric_c3(&[3.0, 3.0, 4.0], 0).unwrap();
        assert!(close(a, 0.75, 1e-15));
        assert!(close(a, ric_c3(&[3.0, 3.0, 4.0], 2).unwrap(), 1e-15));
        assert!(ric_c3(&[1.0, 0.0, 1.0], 0).is_err());
    }

    #[test]
    fn c4_values() {
        for i in 0..4 {
            assert!(close(ric_c4(&[1.0; 4], i).unwrap(), 2.0, 1e-15));
        }
        // m(i-1) = m(i+1) kills the second radicand term.
        let (a, b) = (2.0_f64, 3.0_f64);
        let expected = 1.0 / a + 1.0 / a - (1.0 / b - 1.0 / a).abs();
        assert!(close(ric_c4(&[a, b, a, b], 1).unwrap(), expected, 1e-15));
        assert!(ric_c4(&[1.0, -1.0, 1.0, 1.0], 0).is_err());
    }

    #[test]
    fn ck_values() {
        for k in 5..9 {
            for i in 0..k {
                assert!(close(ric_ck(&vec![1.7; k], i).unwrap(), 0.0, 1e-15));
            }
        }
        let m = [2.0, 0.5, 2.0, 1.0, 1.0];
        assert!(close(ric_ck(&m, 1).unwrap(), 0.5 - 2.0, 1e-15));
        assert!(ric_ck(&[1.0; 4], 0).is_err());
    }

    #[test]
    fn t3_values() {
        let ones = [1.0; 10];
        assert!(close(ric_t3(&ones, t3(5)).unwrap(), 1.0, 1e-15));
        assert!(close(ric_t3(&ones, t3(1)).unwrap(), -1.0, 1e-14));
        let mut m = ones;
        m[t3(3)] = 2.0;
        m[t3(7)] = 4.0;
        assert!(close(ric_t3(&m, t3(7)).unwrap(), 0.375, 1e-15));
        assert!(ric_t3(&ones, 10).is_err());
    }

    #[test]
    fn trig_eigenvalue_matches_jacobi() {
        let a = [[0.3, 1.0, -2.0], [1.0, 4.0, 0.5], [-2.0, 0.5, -1.0]];
        let m = dmatrix![0.3, 1.0, -2.0; 1.0, 4.0, 0.5; -2.0, 0.5, -1.0];
        assert!(close(lambda_min_3x3(a), min_eig_sym(&m).unwrap().0, 1e-13));
        assert_eq!(
            lambda_min_3x3([[2.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 3.0]]),
            -1.0
        );
    }

    proptest! {
        #[test]
        fn ck_is_two_by_two_eigenvalue(
            m in proptest::collection::vec(0.1f64..10.0, 5..9),
            i in 0usize..8,
        ) {
            let k = m.len();
            let i = i % k;
            let (prev, cur, next) = around(&m, i);
            let mat = dmatrix![1.0 / prev, 1.0 / cur; 1.0 / cur, 1.0 / next];
            let (l, _) = min_eig_sym(&mat).unwrap();
            prop_assert!((ric_ck(&m, i).unwrap() - l).abs() < 1e-12);
        }

        #[test]
        fn closed_forms_scale_inversely(
            m in proptest::collection::vec(0.1f64..10.0, 10),
            lambda in prop_oneof![Just(0.5), Just(2.0), Just(10.0)],
        ) {
            let scaled: Vec<f64> = m.iter().map(|v| v * lambda).collect();
            let pairs = [
                (ric_c3(&m[..3], 1).unwrap(), ric_c3(&scaled[..3], 1).unwrap()),
                (ric_c4(&m[..4], 2).unwrap(), ric_c4(&scaled[..4], 2).unwrap()),
                (ric_ck(&m[..6], 0).unwrap(), ric_ck(&scaled[..6], 0).unwrap()),
                (ric_t3(&m, 1).unwrap(), ric_t3(&scaled, 1).unwrap()),
            ];
            for (base, s) in pairs {
                prop_assert!((s - base / lambda).abs() <= 1e-10 * (1.0 + base.abs()));
            }
        }
    }
}
