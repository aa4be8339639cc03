//! Brute-force k-nearest-neighbour classification on standardized features.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ingest::StageLabel;
use crate::math;
use crate::matrix::FeatureMatrix;

pub const N_CLASSES: usize = StageLabel::COUNT;

/// Per-column z-scoring fitted on a set of rows. Zero-variance columns keep
/// scale 1 so they contribute nothing after centering.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Fit on `rows` of a row-major matrix with `cols` columns.
    pub fn fit(data: &[f64], cols: usize, rows: &[usize]) -> Self {
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; cols];
        for &r in rows {
            for (m, v) in mean.iter_mut().zip(&data[r * cols..(r + 1) * cols]) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; cols];
        for &r in rows {
            for ((s, v), m) in var
                .iter_mut()
                .zip(&data[r * cols..(r + 1) * cols])
                .zip(&mean)
            {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .iter()
            .map(|s| {
                let sd = math::sqrt(s / n);
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    /// Standardize every row of a row-major matrix.
    pub fn apply_all(&self, data: &[f64], cols: usize) -> Vec<f64> {
        data.chunks(cols).flat_map(|r| self.apply(r)).collect()
    }
}

/// The `k` smallest `(squared distance, train position)` pairs, nearest
/// first; equal distances go to the earlier training row.
pub(crate) fn nearest(k: usize, n_train: usize, dist: impl Fn(usize) -> f64) -> Vec<(f64, usize)> {
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for t in 0..n_train {
        let d = dist(t);
        if best.len() == k && d >= best[k - 1].0 {
            continue;
        }
        let pos = best.partition_point(|&(bd, _)| bd <= d);
        best.insert(pos, (d, t));
        best.truncate(k);
    }
    best
}

/// Majority vote; ties go to the smaller mean distance, then the lower class.
pub(crate) fn vote(neighbours: &[(f64, usize)], class_of: impl Fn(usize) -> usize) -> usize {
    let mut count = [0usize; N_CLASSES];
    let mut dist = [0.0f64; N_CLASSES];
    for &(d2, t) in neighbours {
        let c = class_of(t);
        count[c] += 1;
        dist[c] += math::sqrt(d2.max(0.0));
    }
    let mut best = usize::MAX;
    for c in 0..N_CLASSES {
        if count[c] == 0 {
            continue;
        }
        if best == usize::MAX {
            best = c;
            continue;
        }
        let mean_c = dist[c] / count[c] as f64;
        let mean_b = dist[best] / count[best] as f64;
        if count[c] > count[best] || (count[c] == count[best] && mean_c < mean_b) {
            best = c;
        }
    }
    best
}

/// Predict stage labels for `query` rows from the labelled `train` matrix.
/// Columns are standardized with the training statistics.
pub fn knn_predict(train: &FeatureMatrix, query: &[Vec<f64>], k: usize) -> Result<Vec<StageLabel>> {
    if train.n_rows() == 0 {
        return Err(Error::param("train", "training set is empty"));
    }
    if k == 0 || k > train.n_rows() {
        return Err(Error::param(
            "knn_k",
            alloc::format!("must be in 1..={}, got {k}", train.n_rows()),
        ));
    }
    let cols = train.n_cols();
    if query.iter().any(|q| q.len() != cols) {
        return Err(Error::Shape(alloc::format!(
            "query rows must have {cols} columns"
        )));
    }
    let classes = train.class_indices()?;
    let rows: Vec<usize> = (0..train.n_rows()).collect();
    let st = Standardizer::fit(&train.data, cols, &rows);
    let z = st.apply_all(&train.data, cols);
    Ok(query
        .iter()
        .map(|q| {
            let zq = st.apply(q);
            let nn = nearest(k, train.n_rows(), |t| {
                math::sq_dist(&zq, &z[t * cols..(t + 1) * cols])
            });
            StageLabel::ALL[vote(&nn, |t| classes[t])]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;

    fn matrix(rows: &[Vec<f64>], labels: &[StageLabel]) -> FeatureMatrix {
        let names = (0..rows[0].len()).map(|i| alloc::format!("x{i}")).collect();
        FeatureMatrix::from_rows(names, rows, labels.iter().map(|l| Some(*l)).collect()).unwrap()
    }

    #[test]
    fn exact_match_with_k1() {
        let m = matrix(
            &[vec![0.0, 0.0], vec![1.0, 5.0], vec![3.0, 2.0]],
            &[StageLabel::W, StageLabel::N2, StageLabel::Rem],
        );
        assert_eq!(
            knn_predict(&m, &[vec![1.0, 5.0]], 1).unwrap(),
            vec![StageLabel::N2]
        );
    }

    #[test]
    fn two_point_ties() {
        let m = matrix(&[vec![0.0], vec![2.0]], &[StageLabel::N1, StageLabel::W]);
        // nearer class wins the 1-1 vote
        assert_eq!(
            knn_predict(&m, &[vec![1.5]], 2).unwrap(),
            vec![StageLabel::W]
        );
        assert_eq!(
            knn_predict(&m, &[vec![0.4]], 2).unwrap(),
            vec![StageLabel::N1]
        );
        // exact midpoint: lower class index
        assert_eq!(
            knn_predict(&m, &[vec![1.0]], 2).unwrap(),
            vec![StageLabel::W]
        );
    }

    #[test]
    fn nearest_keeps_earliest_on_ties() {
        let d = [3.0, 1.0, 1.0, 0.5, 1.0];
        let nn = nearest(3, d.len(), |t| d[t]);
        assert_eq!(nn, vec![(0.5, 3), (1.0, 1), (1.0, 2)]);
    }

    #[test]
    fn errors() {
        let m = matrix(&[vec![0.0]], &[StageLabel::W]);
        assert!(knn_predict(&m, &[vec![0.0]], 2).is_err());
        let empty = FeatureMatrix::from_rows(vec![String::from("x")], &[], vec![]).unwrap();
        assert!(knn_predict(&empty, &[vec![0.0]], 1).is_err());
    }

    #[test]
    fn constant_column_is_harmless() {
        let s = Standardizer::fit(&[1.0, 5.0, 3.0, 5.0], 2, &[0, 1]);
        assert_eq!(s.scale, vec![1.0, 1.0]);
        assert_eq!(s.apply(&[2.0, 5.0]), vec![0.0, 0.0]);
    }
}
