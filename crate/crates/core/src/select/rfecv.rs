//! Greedy backward elimination wrapped around cross-validated KNN.

use alloc::string::String;
use alloc::vec::Vec;

use super::cv::CvContext;
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfecvParams {
    pub knn_k: usize,
    pub k_folds: usize,
    pub seed: u64,
    /// Start from accuracy 0 instead of the full-set accuracy, which forces
    /// the first removal.
    pub strict_paper: bool,
}

impl Default for RfecvParams {
    fn default() -> Self {
        RfecvParams {
            knn_k: 5,
            k_folds: 5,
            seed: 0,
            strict_paper: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Kept column positions in the input matrix, in input order.
    pub kept: Vec<usize>,
    pub kept_names: Vec<String>,
    /// `(removed feature, accuracy after removal)`, in commit order.
    pub trace: Vec<(String, f64)>,
    /// Accuracy the elimination started from.
    pub baseline: f64,
}

/// Evaluates a batch of independent scoring jobs. The default runs them in
/// order; a caller can plug in a parallel map, since results are collected
/// by position and never depend on evaluation order.
pub trait BatchScorer {
    fn score(&self, n: usize, job: &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64>;
}

pub struct Sequential;

impl BatchScorer for Sequential {
    fn score(&self, n: usize, job: &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64> {
        (0..n).map(job).collect()
    }
}

pub fn rfecv(x: &FeatureMatrix, params: &RfecvParams) -> Result<SelectionResult> {
    rfecv_with(x, params, &Sequential)
}

/// Repeatedly removes the single feature whose removal gives the highest
/// cross-validated accuracy, as long as that accuracy strictly beats the
/// current one. Ties between candidates go to the earliest column. Stops
/// at one remaining feature.
pub fn rfecv_with(
    x: &FeatureMatrix,
    params: &RfecvParams,
    scorer: &dyn BatchScorer,
) -> Result<SelectionResult> {
    if x.n_cols() < 2 {
        return Err(Error::param("features", "RFECV needs at least 2 features"));
    }
    let ctx = CvContext::new(x, params.k_folds, params.knn_k, params.seed)?;
    let mut kept: Vec<usize> = (0..x.n_cols()).collect();
    let full = ctx.accuracy(&kept);
    let baseline = if params.strict_paper { 0.0 } else { full };
    let mut current = baseline;
    let mut trace = Vec::new();

    while kept.len() > 1 {
        let cache = ctx.distances(&kept);
        let scores = scorer.score(kept.len(), &|i| ctx.accuracy_without(&cache, kept[i]));
        let mut best = 0;
        for (i, s) in scores.iter().enumerate() {
            if *s > scores[best] {
                best = i;
            }
        }
        if !(scores[best] > current) {
            break;
        }
        current = scores[best];
        let removed = kept.remove(best);
        log::debug!("rfecv removed {} -> {current:.4}", x.names[removed]);
        trace.push((x.names[removed].clone(), current));
    }
    Ok(SelectionResult {
        kept_names: kept.iter().map(|&j| x.names[j].clone()).collect(),
        kept,
        trace,
        baseline,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::StageLabel;
    use crate::rng;
    use alloc::vec;

    fn two_feature_fixture() -> FeatureMatrix {
        // Seed chosen so the noise column costs accuracy in the full set.
        let mut r = rng::seeded(4);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..40 {
            let class = i % 2;
            rows.push(vec![
                1.5 * class as f64 + rng::uniform(&mut r),
                rng::uniform(&mut r),
            ]);
            labels.push(Some(StageLabel::ALL[class]));
        }
        FeatureMatrix::from_rows(vec!["signal".into(), "noise".into()], &rows, labels).unwrap()
    }

    #[test]
    fn noise_feature_is_dropped() {
        let x = two_feature_fixture();
        let res = rfecv(
            &x,
            &RfecvParams {
                k_folds: 2,
                ..RfecvParams::default()
            },
        )
        .unwrap();
        assert_eq!(res.kept_names, vec![String::from("signal")]);
        assert_eq!(res.trace.len(), 1);
        assert_eq!(res.trace[0].1, 1.0);
    }

    #[test]
    fn identical_columns_remove_nothing() {
        let x = two_feature_fixture().select_columns(&[0, 0, 0]);
        let res = rfecv(&x, &RfecvParams::default()).unwrap();
        assert_eq!(res.kept.len(), 3);
        assert!(res.trace.is_empty());
        // strict-paper mode starts from 0 and so commits the first removal
        let strict = rfecv(
            &x,
            &RfecvParams {
                strict_paper: true,
                ..RfecvParams::default()
            },
        )
        .unwrap();
        assert_eq!(strict.trace.len(), 1);
        assert_eq!(strict.kept, vec![1, 2]);
    }

    #[test]
    fn needs_two_features() {
        let x = two_feature_fixture().select_columns(&[0]);
        assert!(rfecv(&x, &RfecvParams::default()).is_err());
    }
}
