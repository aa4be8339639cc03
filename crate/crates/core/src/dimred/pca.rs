//! Principal component analysis on standardized features.

use alloc::vec;
use alloc::vec::Vec;

use super::linalg::{descending_order, jacobi_eigen};
use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// Column standard deviations; zero-variance columns map to all zeros.
    pub scale: Vec<f64>,
    /// Top components as rows, `c x p`.
    pub components: Vec<f64>,
    pub n_components: usize,
    /// All eigenvalues of the covariance matrix, largest first.
    pub eigenvalues: Vec<f64>,
    /// Columns whose variance was zero.
    pub zero_variance: Vec<usize>,
}

impl Pca {
    /// Fit on a row-major `n x p` matrix.
    pub fn fit(data: &[f64], p: usize, c: usize) -> Result<Self> {
        let n = data.len().checked_div(p).unwrap_or(0);
        if n < 2 {
            return Err(Error::TooShort {
                op: "pca",
                needed: 2,
                got: n,
            });
        }
        if c == 0 || c > p {
            return Err(Error::param(
                "n_components",
                alloc::format!("must be in 1..={p}"),
            ));
        }
        let mut mean = vec![0.0; p];
        for row in data.chunks(p) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; p];
        for row in data.chunks(p) {
            for j in 0..p {
                var[j] += (row[j] - mean[j]) * (row[j] - mean[j]);
            }
        }
        let scale: Vec<f64> = var.iter().map(|v| math::sqrt(v / n as f64)).collect();
        let zero_variance: Vec<usize> = (0..p).filter(|&j| !(scale[j] > 0.0)).collect();
        let z = standardize(data, p, &mean, &scale);

        let mut cov = vec![0.0; p * p];
        for row in z.chunks(p) {
            for i in 0..p {
                for j in i..p {
                    cov[i * p + j] += row[i] * row[j];
                }
            }
        }
        for i in 0..p {
            for j in i..p {
                let v = cov[i * p + j] / (n - 1) as f64;
                cov[i * p + j] = v;
                cov[j * p + i] = v;
            }
        }
        let (vals, vecs) = jacobi_eigen(&cov, p)?;
        let order = descending_order(&vals);
        let eigenvalues: Vec<f64> = order.iter().map(|&k| vals[k].max(0.0)).collect();
        let mut components = Vec::with_capacity(c * p);
        for &k in order.iter().take(c) {
            let mut col: Vec<f64> = (0..p).map(|i| vecs[i * p + k]).collect();
            let mut lead = 0;
            for i in 1..p {
                if col[i].abs() > col[lead].abs() {
                    lead = i;
                }
            }
            if col[lead] < 0.0 {
                col.iter_mut().for_each(|v| *v = -*v);
            }
            components.extend(col);
        }
        Ok(Pca {
            mean,
            scale,
            components,
            n_components: c,
            eigenvalues,
            zero_variance,
        })
    }

    /// Projection of the rows of `data` onto the kept components.
    pub fn transform(&self, data: &[f64]) -> Vec<f64> {
        let p = self.mean.len();
        let z = standardize(data, p, &self.mean, &self.scale);
        let c = self.n_components;
        let mut out = Vec::with_capacity(z.len() / p * c);
        for row in z.chunks(p) {
            for k in 0..c {
                let comp = &self.components[k * p..(k + 1) * p];
                out.push(row.iter().zip(comp).map(|(a, b)| a * b).sum());
            }
        }
        out
    }

    /// Variance of each kept component.
    pub fn explained_variance(&self) -> &[f64] {
        &self.eigenvalues[..self.n_components]
    }

    /// Kept eigenvalues over the total variance.
    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        let total: f64 = self.eigenvalues.iter().sum();
        self.explained_variance()
            .iter()
            .map(|v| if total > 0.0 { v / total } else { 0.0 })
            .collect()
    }
}

fn standardize(data: &[f64], p: usize, mean: &[f64], scale: &[f64]) -> Vec<f64> {
    data.chunks(p)
        .flat_map(|row| {
            (0..p).map(move |j| {
                if scale[j] > 0.0 {
                    (row[j] - mean[j]) / scale[j]
                } else {
                    0.0
                }
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn points_on_a_line() {
        let data: Vec<f64> = (0..20).flat_map(|i| [i as f64, i as f64]).collect();
        let pca = Pca::fit(&data, 2, 2).unwrap();
        assert!((pca.explained_variance_ratio()[0] - 1.0).abs() < 1e-9);
        let c = &pca.components[..2];
        assert!((c[0] - c[1]).abs() < 1e-12 && c[0] > 0.0);
    }

    #[test]
    fn isotropic_keeps_index_order() {
        // two uncorrelated +-1 columns: identity covariance after scaling
        let data = [1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0];
        let pca = Pca::fit(&data, 2, 2).unwrap();
        assert!((pca.eigenvalues[0] - pca.eigenvalues[1]).abs() < 1e-12);
        assert_eq!(pca.components, vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn trace_is_preserved_and_components_orthonormal() {
        let mut r = rng::seeded(12);
        let p = 6;
        let data: Vec<f64> = (0..50 * p)
            .map(|i| rng::normal(&mut r) * (1 + i % p) as f64)
            .collect();
        let pca = Pca::fit(&data, p, p).unwrap();
        // standardized columns: total variance = p * n / (n - 1)
        let total: f64 = pca.explained_variance().iter().sum();
        assert!((total - p as f64 * 50.0 / 49.0).abs() < 1e-9);
        for a in 0..p {
            for b in 0..p {
                let dot: f64 = (0..p)
                    .map(|i| pca.components[a * p + i] * pca.components[b * p + i])
                    .sum();
                assert!((dot - if a == b { 1.0 } else { 0.0 }).abs() < 1e-9);
            }
        }
        assert!(pca.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn zero_variance_column_is_flagged() {
        let data = [1.0, 5.0, 2.0, 5.0, 4.0, 5.0];
        let pca = Pca::fit(&data, 2, 1).unwrap();
        assert_eq!(pca.zero_variance, vec![1]);
        assert!(pca.transform(&data).iter().all(|v| v.is_finite()));
    }

    #[test]
    fn rejects_tiny_input() {
        assert!(Pca::fit(&[1.0, 2.0], 2, 1).is_err());
        assert!(Pca::fit(&[1.0, 2.0, 3.0, 4.0], 2, 3).is_err());
    }
}
