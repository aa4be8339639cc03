//! Symmetric eigendecomposition by cyclic Jacobi rotations.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues (unsorted, in diagonal order) and eigenvectors stored as
/// columns of a row-major `p x p` matrix.
pub fn jacobi_eigen(a: &[f64], p: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.len() != p * p {
        return Err(Error::Shape(alloc::format!(
            "{} entries for a {p} x {p} matrix",
            a.len()
        )));
    }
    let mut m = a.to_vec();
    let mut v = vec![0.0; p * p];
    for i in 0..p {
        v[i * p + i] = 1.0;
    }
    let norm: f64 = m.iter().map(|x| x * x).sum();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..p)
            .flat_map(|i| (0..p).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * p + j] * m[i * p + j])
            .sum();
        if off <= 1e-30 * norm.max(f64::MIN_POSITIVE) {
            return Ok(((0..p).map(|i| m[i * p + i]).collect(), v));
        }
        for r in 0..p {
            for s in r + 1..p {
                let ars = m[r * p + s];
                if ars == 0.0 {
                    continue;
                }
                let theta = (m[s * p + s] - m[r * p + r]) / (2.0 * ars);
                let t = theta.signum() / (theta.abs() + math::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / math::sqrt(t * t + 1.0);
                let sn = t * c;
                for k in 0..p {
                    let (mkr, mks) = (m[k * p + r], m[k * p + s]);
                    m[k * p + r] = c * mkr - sn * mks;
                    m[k * p + s] = sn * mkr + c * mks;
                }
                for k in 0..p {
                    let (mrk, msk) = (m[r * p + k], m[s * p + k]);
                    m[r * p + k] = c * mrk - sn * msk;
                    m[s * p + k] = sn * mrk + c * msk;
                }
                for k in 0..p {
                    let (vkr, vks) = (v[k * p + r], v[k * p + s]);
                    v[k * p + r] = c * vkr - sn * vks;
                    v[k * p + s] = sn * vkr + c * vks;
                }
            }
        }
    }
    Err(Error::numerical(
        "jacobi_eigen",
        "off-diagonal mass did not vanish",
    ))
}

/// Positions of `values` from largest to smallest. Values within a relative
/// `1e-10` of each other count as equal and keep index order.
pub fn descending_order(values: &[f64]) -> Vec<usize> {
    let scale = values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let tol = 1e-10 * scale;
    let mut left: Vec<usize> = (0..values.len()).collect();
    let mut out = Vec::with_capacity(values.len());
    while !left.is_empty() {
        let top = left
            .iter()
            .map(|&i| values[i])
            .fold(f64::NEG_INFINITY, f64::max);
        let pos = left
            .iter()
            .position(|&i| values[i] >= top - tol)
            .unwrap_or(0);
        out.push(left.remove(pos));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let (vals, vecs) = jacobi_eigen(&[2.0, 1.0, 1.0, 2.0], 2).unwrap();
        let mut s = vals.clone();
        s.sort_by(f64::total_cmp);
        assert!((s[0] - 1.0).abs() < 1e-12 && (s[1] - 3.0).abs() < 1e-12);
        for k in 0..2 {
            let col = [vecs[k], vecs[2 + k]];
            let av = [2.0 * col[0] + col[1], col[0] + 2.0 * col[1]];
            assert!((av[0] - vals[k] * col[0]).abs() < 1e-12);
            assert!((av[1] - vals[k] * col[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn order_with_ties() {
        assert_eq!(descending_order(&[1.0, 3.0, 3.0, 2.0]), vec![1, 2, 3, 0]);
        assert_eq!(descending_order(&[1.0, 1.0 + 1e-14, 1.0]), vec![0, 1, 2]);
    }
}
