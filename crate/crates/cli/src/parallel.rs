//! Rayon-backed batch scoring for RFECV.

use rayon::prelude::*;
use sleeptopo_core::select::BatchScorer;

/// Scores candidates on the current rayon pool; results keep job order.
pub struct RayonScorer;

impl BatchScorer for RayonScorer {
    fn score(&self, jobs: usize, f: &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64> {
        (0..jobs).into_par_iter().map(f).collect()
    }
}
