//! Summary statistics of a persistence diagram and top-k filtering.

use alloc::vec::Vec;

use super::{PersistenceDiagram, PersistencePair};
use crate::math;

/// Number of statistics per value set.
pub const N_STATS: usize = 8;

pub const STAT_NAMES: [&str; N_STATS] = [
    "mean", "std", "skewness", "kurtosis", "p25", "p50", "p75", "entropy",
];

/// Statistics of the midlife and lifespan sets of one homology dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistenceStats {
    pub midlife: [f64; N_STATS],
    pub lifespan: [f64; N_STATS],
    /// Set when the dimension had no pairs of positive lifespan.
    pub degenerate: bool,
}

impl PersistenceStats {
    pub fn values(&self) -> [f64; 2 * N_STATS] {
        let mut out = [0.0; 2 * N_STATS];
        out[..N_STATS].copy_from_slice(&self.midlife);
        out[N_STATS..].copy_from_slice(&self.lifespan);
        out
    }
}

fn eight(values: &[f64]) -> [f64; N_STATS] {
    let s = math::sorted(values);
    let (skew, kurt) = math::shape_moments(values).unwrap_or((0.0, 0.0));
    [
        math::mean(values),
        math::pop_std(values),
        skew,
        kurt,
        math::percentile_sorted(&s, 25.0),
        math::percentile_sorted(&s, 50.0),
        math::percentile_sorted(&s, 75.0),
        math::normalized_entropy(values, math::ln),
    ]
}

/// Statistics over the pairs of dimension `dim`, essential pairs included
/// with their substituted death.
pub fn persistence_statistics(diagram: &PersistenceDiagram, dim: u8) -> PersistenceStats {
    let pairs: Vec<&PersistencePair> = diagram.pairs.iter().filter(|p| p.dim == dim).collect();
    if pairs.is_empty() {
        return PersistenceStats {
            midlife: [0.0; N_STATS],
            lifespan: [0.0; N_STATS],
            degenerate: true,
        };
    }
    let mid: Vec<f64> = pairs.iter().map(|p| p.midlife()).collect();
    let life: Vec<f64> = pairs.iter().map(|p| p.lifespan()).collect();
    PersistenceStats {
        midlife: eight(&mid),
        lifespan: eight(&life),
        degenerate: life.iter().all(|l| *l == 0.0),
    }
}

/// Keeps the `k0` H0 and `k1` H1 pairs furthest from the diagonal.
/// Lifespan ties go to the smaller birth, then to the earlier pair. Kept
/// pairs stay in their original relative order.
pub fn filter_top_k(diagram: &PersistenceDiagram, k0: usize, k1: usize) -> PersistenceDiagram {
    let mut keep = alloc::vec![false; diagram.pairs.len()];
    for (dim, k) in [(0u8, k0), (1u8, k1)] {
        let mut idx: Vec<usize> = (0..diagram.pairs.len())
            .filter(|&i| diagram.pairs[i].dim == dim)
            .collect();
        idx.sort_by(|&a, &b| {
            let (pa, pb) = (&diagram.pairs[a], &diagram.pairs[b]);
            pb.lifespan()
                .total_cmp(&pa.lifespan())
                .then(pa.birth.total_cmp(&pb.birth))
                .then(a.cmp(&b))
        });
        for &i in idx.iter().take(k) {
            keep[i] = true;
        }
    }
    PersistenceDiagram {
        pairs: diagram
            .pairs
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(p, _)| *p)
            .collect(),
        filtration_cap: diagram.filtration_cap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn diagram(pairs: &[(u8, f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram {
            pairs: pairs
                .iter()
                .map(|&(d, b, e)| PersistencePair::finite(d, b, e))
                .collect(),
            filtration_cap: 10.0,
        }
    }

    #[test]
    fn singleton_pair() {
        let s = persistence_statistics(&diagram(&[(0, 0.0, 2.0)]), 0);
        assert_eq!(s.midlife, [1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
        assert_eq!(s.lifespan, [2.0, 0.0, 0.0, 0.0, 2.0, 2.0, 2.0, 0.0]);
        assert!(!s.degenerate);
    }

    #[test]
    fn two_pairs() {
        let s = persistence_statistics(&diagram(&[(0, 0.0, 1.0), (0, 0.0, 3.0)]), 0);
        assert_eq!(s.lifespan[0], 2.0);
        assert_eq!(s.lifespan[5], 2.0);
        let expected = -(0.25 * libm::log(0.25) + 0.75 * libm::log(0.75));
        assert!((s.lifespan[7] - expected).abs() < 1e-12);
        assert!(s.lifespan[4] <= s.lifespan[5] && s.lifespan[5] <= s.lifespan[6]);
    }

    #[test]
    fn empty_is_degenerate_zeros() {
        let s = persistence_statistics(&diagram(&[(0, 0.0, 1.0)]), 1);
        assert!(s.degenerate);
        assert_eq!(s.values(), [0.0; 16]);
    }

    #[test]
    fn essential_pairs_use_substituted_death() {
        let d = PersistenceDiagram {
            pairs: vec![PersistencePair::essential(0, 0.0, 4.0)],
            filtration_cap: 4.0,
        };
        assert_eq!(persistence_statistics(&d, 0).lifespan[0], 4.0);
    }

    #[test]
    fn top_k_by_lifespan() {
        let d = diagram(&[(1, 0.0, 5.0), (1, 1.0, 4.0), (1, 2.0, 3.0)]);
        assert_eq!(filter_top_k(&d, 500, 20).pairs.len(), 3);
        let kept = filter_top_k(&d, 500, 2);
        assert_eq!(kept.pairs, d.pairs[..2].to_vec());
    }

    #[test]
    fn top_k_ties() {
        // equal lifespans: smaller birth wins, then input order
        let d = diagram(&[(1, 2.0, 3.0), (1, 1.0, 2.0), (1, 1.0, 2.0), (0, 0.0, 1.0)]);
        let kept = filter_top_k(&d, 0, 1);
        assert_eq!(kept.pairs, vec![d.pairs[1]]);
        let kept = filter_top_k(&d, 1, 2);
        assert_eq!(kept.pairs, vec![d.pairs[1], d.pairs[2], d.pairs[3]]);
    }
}
