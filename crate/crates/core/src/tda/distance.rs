use alloc::vec;
use alloc::vec::Vec;

use super::embed::PointCloud;
use crate::error::{Error, Result};
use crate::math;

/// Dense symmetric distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Euclidean distances between all points of `cloud`.
    pub fn euclidean(cloud: &PointCloud) -> Self {
        let n = cloud.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                let d = math::sqrt(math::sq_dist(cloud.point(i), cloud.point(j)));
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        DistanceMatrix { n, data }
    }

    /// Wrap a row-major matrix after checking shape, symmetry, a zero
    /// diagonal and non-negative finite entries.
    pub fn from_raw(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Shape(alloc::format!(
                "{} entries for n = {n}",
                data.len()
            )));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::param("distance", "diagonal must be zero"));
            }
            for j in 0..i {
                let d = data[i * n + j];
                if !(d >= 0.0) || !d.is_finite() || d != data[j * n + i] {
                    return Err(Error::param(
                        "distance",
                        "entries must be finite, non-negative and symmetric",
                    ));
                }
            }
        }
        Ok(DistanceMatrix { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// `min_i max_j d(i, j)`: beyond this radius the Rips complex is a cone.
    pub fn enclosing_radius(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min)
            .min(self.max())
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        DistanceMatrix {
            n: self.n,
            data: self.data.iter().map(|d| d * alpha).collect(),
        }
    }

    /// Checks every triangle inequality up to `tol`.
    pub fn satisfies_triangle_inequality(&self, tol: f64) -> bool {
        let n = self.n;
        (0..n).all(|i| {
            (0..n).all(|j| (0..n).all(|k| self.get(i, k) <= self.get(i, j) + self.get(j, k) + tol))
        })
    }
}
