//! Stratified k-fold cross-validation of the KNN classifier.
//!
//! A [`CvContext`] fixes the folds and the per-fold standardization once,
//! so that every feature subset scored against it sees the same splits.

use alloc::vec;
use alloc::vec::Vec;

use super::knn::{nearest, vote, Standardizer, N_CLASSES};
use crate::error::{Error, Result};
use crate::ingest::StageLabel;
use crate::matrix::FeatureMatrix;
use crate::rng;

/// Fold number of every row: within each class (in class order) the rows
/// are shuffled once and dealt round-robin.
pub fn stratified_folds(classes: &[usize], k_folds: usize, seed: u64) -> Result<Vec<usize>> {
    if k_folds < 2 {
        return Err(Error::param("k_folds", "must be at least 2"));
    }
    let mut r = rng::seeded(seed);
    let mut fold = vec![0; classes.len()];
    for c in 0..N_CLASSES {
        let mut members: Vec<usize> = (0..classes.len()).filter(|&i| classes[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < k_folds {
            return Err(Error::ClassTooSmall {
                class: StageLabel::ALL[c].name(),
                count: members.len(),
                folds: k_folds,
            });
        }
        rng::shuffle(&mut r, &mut members);
        for (pos, &i) in members.iter().enumerate() {
            fold[i] = pos % k_folds;
        }
    }
    Ok(fold)
}

struct Fold {
    train: Vec<usize>,
    test: Vec<usize>,
    /// Every row standardized with this fold's training statistics.
    z: Vec<f64>,
}

/// Squared test-to-train distances of every fold for one feature subset.
pub struct DistanceCache {
    per_fold: Vec<Vec<f64>>,
}

pub struct CvContext {
    folds: Vec<Fold>,
    assignment: Vec<usize>,
    classes: Vec<usize>,
    cols: usize,
    knn_k: usize,
}

impl CvContext {
    pub fn new(x: &FeatureMatrix, k_folds: usize, knn_k: usize, seed: u64) -> Result<Self> {
        let classes = x.class_indices()?;
        let assignment = stratified_folds(&classes, k_folds, seed)?;
        let cols = x.n_cols();
        let mut folds = Vec::with_capacity(k_folds);
        for f in 0..k_folds {
            let train: Vec<usize> = (0..classes.len()).filter(|&i| assignment[i] != f).collect();
            let test: Vec<usize> = (0..classes.len()).filter(|&i| assignment[i] == f).collect();
            if knn_k == 0 || knn_k > train.len() {
                return Err(Error::param(
                    "knn_k",
                    alloc::format!("must be in 1..={} for this fold layout", train.len()),
                ));
            }
            let z = Standardizer::fit(&x.data, cols, &train).apply_all(&x.data, cols);
            folds.push(Fold { train, test, z });
        }
        Ok(CvContext {
            folds,
            assignment,
            classes,
            cols,
            knn_k,
        })
    }

    pub fn n_folds(&self) -> usize {
        self.folds.len()
    }

    /// Fold number of every row.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn distances(&self, subset: &[usize]) -> DistanceCache {
        let c = self.cols;
        let per_fold = self
            .folds
            .iter()
            .map(|f| {
                let mut d = Vec::with_capacity(f.test.len() * f.train.len());
                for &q in &f.test {
                    let zq = &f.z[q * c..(q + 1) * c];
                    for &t in &f.train {
                        let zt = &f.z[t * c..(t + 1) * c];
                        d.push(
                            subset
                                .iter()
                                .map(|&j| (zq[j] - zt[j]) * (zq[j] - zt[j]))
                                .sum(),
                        );
                    }
                }
                d
            })
            .collect();
        DistanceCache { per_fold }
    }

    fn fold_predictions(&self, fi: usize, dist: impl Fn(usize, usize) -> f64) -> Vec<usize> {
        let f = &self.folds[fi];
        (0..f.test.len())
            .map(|qi| {
                let nn = nearest(self.knn_k, f.train.len(), |ti| dist(qi, ti));
                vote(&nn, |ti| self.classes[f.train[ti]])
            })
            .collect()
    }

    fn fold_accuracy(&self, fi: usize, preds: &[usize]) -> f64 {
        let f = &self.folds[fi];
        let hits = f
            .test
            .iter()
            .zip(preds)
            .filter(|(&q, &p)| self.classes[q] == p)
            .count();
        hits as f64 / f.test.len() as f64
    }

    /// Mean fold accuracy for the subset the cache was built from.
    pub fn accuracy_cached(&self, cache: &DistanceCache) -> f64 {
        let mut total = 0.0;
        for fi in 0..self.folds.len() {
            let n_train = self.folds[fi].train.len();
            let d = &cache.per_fold[fi];
            let preds = self.fold_predictions(fi, |q, t| d[q * n_train + t]);
            total += self.fold_accuracy(fi, &preds);
        }
        total / self.folds.len() as f64
    }

    /// Mean fold accuracy after dropping column `col` from the cached subset.
    pub fn accuracy_without(&self, cache: &DistanceCache, col: usize) -> f64 {
        let c = self.cols;
        let mut total = 0.0;
        for (fi, f) in self.folds.iter().enumerate() {
            let n_train = f.train.len();
            let d = &cache.per_fold[fi];
            let preds = self.fold_predictions(fi, |q, t| {
                let diff = f.z[f.test[q] * c + col] - f.z[f.train[t] * c + col];
                (d[q * n_train + t] - diff * diff).max(0.0)
            });
            total += self.fold_accuracy(fi, &preds);
        }
        total / self.folds.len() as f64
    }

    pub fn accuracy(&self, subset: &[usize]) -> f64 {
        self.accuracy_cached(&self.distances(subset))
    }

    /// Per-fold accuracies and the out-of-fold prediction (class index) of
    /// every row, using all columns.
    pub fn evaluate_all(&self) -> (Vec<f64>, Vec<usize>) {
        let all: Vec<usize> = (0..self.cols).collect();
        let cache = self.distances(&all);
        let mut preds = vec![0; self.classes.len()];
        let mut accs = Vec::with_capacity(self.folds.len());
        for (fi, f) in self.folds.iter().enumerate() {
            let n_train = f.train.len();
            let d = &cache.per_fold[fi];
            let p = self.fold_predictions(fi, |q, t| d[q * n_train + t]);
            accs.push(self.fold_accuracy(fi, &p));
            for (&q, &c) in f.test.iter().zip(&p) {
                preds[q] = c;
            }
        }
        (accs, preds)
    }
}

/// Stratified k-fold KNN accuracy on the columns in `subset`.
pub fn cross_val_accuracy(
    x: &FeatureMatrix,
    subset: &[usize],
    k_folds: usize,
    knn_k: usize,
    seed: u64,
) -> Result<f64> {
    if let Some(&bad) = subset.iter().find(|&&j| j >= x.n_cols()) {
        return Err(Error::param(
            "subset",
            alloc::format!("column {bad} out of range"),
        ));
    }
    Ok(CvContext::new(x, k_folds, knn_k, seed)?.accuracy(subset))
}
