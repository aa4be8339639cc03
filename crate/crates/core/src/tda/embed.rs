//! Delay embedding and landmark subsampling.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::rng;

/// Row-major `n x dim` point set plus the embedding that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<f64>,
    pub dim: usize,
    /// `(delay, embedding dimension)` when built by [`takens_embed`].
    pub provenance: Option<(usize, usize)>,
}

impl PointCloud {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape("ragged point rows".into()));
        }
        Ok(PointCloud {
            points: rows.concat(),
            dim,
            provenance: None,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn select(&self, idx: &[usize]) -> PointCloud {
        let mut points = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            points.extend_from_slice(self.point(i));
        }
        PointCloud {
            points,
            dim: self.dim,
            provenance: self.provenance,
        }
    }
}

/// Row `n` is `[x[n], x[n + delay], .., x[n + (dim - 1) * delay]]`.
pub fn takens_embed(x: &[f64], dim: usize, delay: usize) -> Result<PointCloud> {
    if dim == 0 {
        return Err(Error::param("dim", "must be at least 1"));
    }
    if delay == 0 {
        return Err(Error::param("delay", "must be at least 1"));
    }
    let span = (dim - 1) * delay;
    if x.len() <= span {
        return Err(Error::TooShort {
            op: "takens_embed",
            needed: span + 1,
            got: x.len(),
        });
    }
    let n = x.len() - span;
    let mut points = Vec::with_capacity(n * dim);
    for i in 0..n {
        for j in 0..dim {
            points.push(x[i + j * delay]);
        }
    }
    Ok(PointCloud {
        points,
        dim,
        provenance: Some((delay, dim)),
    })
}

/// First lag at which the sample autocorrelation drops to zero or below.
pub fn first_autocorr_zero(x: &[f64], max_lag: usize) -> Option<usize> {
    let m = math::mean(x);
    let c0: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    if !(c0 > 0.0) {
        return None;
    }
    (1..max_lag.min(x.len())).find(|&lag| {
        let c: f64 = (0..x.len() - lag)
            .map(|i| (x[i] - m) * (x[i + lag] - m))
            .sum();
        c <= 0.0
    })
}

/// Greedy farthest-point traversal starting from `first`. Ties go to the
/// lowest index.
pub fn maxmin_from(cloud: &PointCloud, k: usize, first: usize) -> Result<Vec<usize>> {
    let n = cloud.len();
    if k > n {
        return Err(Error::param(
            "k",
            alloc::format!("cannot pick {k} landmarks from {n} points"),
        ));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    if first >= n {
        return Err(Error::param("first", "index out of range"));
    }
    let mut chosen = Vec::with_capacity(k);
    let mut min_d = vec![f64::INFINITY; n];
    let mut cur = first;
    for _ in 0..k {
        chosen.push(cur);
        min_d[cur] = f64::NEG_INFINITY;
        let p = cloud.point(cur);
        let mut best = usize::MAX;
        let mut best_d = f64::NEG_INFINITY;
        for (i, md) in min_d.iter_mut().enumerate() {
            if *md == f64::NEG_INFINITY {
                continue;
            }
            let d = math::sq_dist(p, cloud.point(i));
            if d < *md {
                *md = d;
            }
            if *md > best_d {
                best_d = *md;
                best = i;
            }
        }
        cur = best;
    }
    Ok(chosen)
}

/// Farthest-point subsample whose first landmark is drawn from `seed`.
pub fn maxmin_subsample(cloud: &PointCloud, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k > cloud.len() {
        return maxmin_from(cloud, k, 0);
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let first = rng::index(&mut rng::seeded(seed), cloud.len());
    maxmin_from(cloud, k, first)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn takens_rows() {
        let c = takens_embed(&[0.0, 1.0, 2.0, 3.0, 4.0], 2, 1).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c.points, vec![0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0]);
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let c = takens_embed(&x, 3, 2).unwrap();
        assert_eq!(c.len(), 6);
        assert_eq!(c.point(5), &[5.0, 7.0, 9.0]);
        assert_eq!(c.provenance, Some((2, 3)));
        let c = takens_embed(&x, 1, 4).unwrap();
        assert_eq!(c.points, x);
        assert!(takens_embed(&x, 4, 4).is_err());
        assert!(takens_embed(&x, 0, 1).is_err());
    }

    #[test]
    fn maxmin_basic_cases() {
        let line = PointCloud::from_rows(&[vec![0.0], vec![1.0], vec![10.0]]).unwrap();
        assert_eq!(maxmin_from(&line, 2, 0).unwrap(), vec![0, 2]);
        let all = maxmin_subsample(&line, 3, 9).unwrap();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2]);
        assert!(maxmin_subsample(&line, 4, 0).is_err());
        assert_eq!(
            maxmin_subsample(&line, 2, 5).unwrap(),
            maxmin_subsample(&line, 2, 5).unwrap()
        );
    }

    #[test]
    fn maxmin_avoids_duplicates_until_exhausted() {
        let rows = vec![
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 3.0],
            vec![2.0, 2.0],
        ];
        let cloud = PointCloud::from_rows(&rows).unwrap();
        for seed in 0..20 {
            let idx = maxmin_subsample(&cloud, 4, seed).unwrap();
            let mut seen: Vec<&[f64]> = idx.iter().map(|&i| cloud.point(i)).collect();
            seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
            seen.dedup();
            assert_eq!(seen.len(), 4, "seed {seed}: {idx:?}");
        }
    }

    #[test]
    fn autocorr_zero_of_sinusoid_is_quarter_period() {
        let x: Vec<f64> = (0..1000)
            .map(|i| math::sin(2.0 * core::f64::consts::PI * i as f64 / 100.0))
            .collect();
        let lag = first_autocorr_zero(&x, 200).unwrap();
        assert!((24..=26).contains(&lag), "{lag}");
        assert_eq!(first_autocorr_zero(&[1.0; 50], 20), None);
    }
}
