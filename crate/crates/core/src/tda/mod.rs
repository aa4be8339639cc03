//! Topological features of an epoch: delay embedding, landmark
//! subsampling, Vietoris-Rips persistence in dimensions 0 and 1 and
//! summary statistics of the resulting diagrams.

pub mod distance;
pub mod embed;
pub mod rips;
pub mod stats;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::features::Degeneracy;
pub use distance::DistanceMatrix;
pub use embed::{first_autocorr_zero, maxmin_subsample, takens_embed, PointCloud};
pub use rips::{rips_h0, rips_h1};
pub use stats::{filter_top_k, persistence_statistics, PersistenceStats, N_STATS, STAT_NAMES};

pub const N_TOPO_FEATURES: usize = 4 * N_STATS;

/// Column names of the topological block, in output order.
pub const TOPO_FEATURE_NAMES: [&str; N_TOPO_FEATURES] = [
    "h0_midlife_mean",
    "h0_midlife_std",
    "h0_midlife_skewness",
    "h0_midlife_kurtosis",
    "h0_midlife_p25",
    "h0_midlife_p50",
    "h0_midlife_p75",
    "h0_midlife_entropy",
    "h0_lifespan_mean",
    "h0_lifespan_std",
    "h0_lifespan_skewness",
    "h0_lifespan_kurtosis",
    "h0_lifespan_p25",
    "h0_lifespan_p50",
    "h0_lifespan_p75",
    "h0_lifespan_entropy",
    "h1_midlife_mean",
    "h1_midlife_std",
    "h1_midlife_skewness",
    "h1_midlife_kurtosis",
    "h1_midlife_p25",
    "h1_midlife_p50",
    "h1_midlife_p75",
    "h1_midlife_entropy",
    "h1_lifespan_mean",
    "h1_lifespan_std",
    "h1_lifespan_skewness",
    "h1_lifespan_kurtosis",
    "h1_lifespan_p25",
    "h1_lifespan_p50",
    "h1_lifespan_p75",
    "h1_lifespan_entropy",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub dim: u8,
    pub birth: f64,
    pub death: f64,
    /// The class never died; `death` is a substituted cap.
    pub essential: bool,
}

impl PersistencePair {
    pub fn finite(dim: u8, birth: f64, death: f64) -> Self {
        PersistencePair {
            dim,
            birth,
            death,
            essential: false,
        }
    }

    pub fn essential(dim: u8, birth: f64, death: f64) -> Self {
        PersistencePair {
            dim,
            birth,
            death,
            essential: true,
        }
    }

    pub fn midlife(&self) -> f64 {
        (self.birth + self.death) / 2.0
    }

    pub fn lifespan(&self) -> f64 {
        self.death - self.birth
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    pub pairs: Vec<PersistencePair>,
    /// Largest pairwise distance; the death given to the essential H0 class.
    pub filtration_cap: f64,
}

impl PersistenceDiagram {
    pub fn of_dim(&self, dim: u8) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }
}

/// Embedding delay choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Delay {
    Fixed(usize),
    /// First zero of the autocorrelation within `max_lag`, else `fallback`.
    AutocorrZero {
        max_lag: usize,
        fallback: usize,
    },
}

/// Where the H1 filtration is truncated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaxEps {
    /// `min_i max_j d(i, j)`. The complex is a cone beyond it, so no H1
    /// class survives and the diagram equals the untruncated one.
    EnclosingRadius,
    /// Largest pairwise distance.
    Full,
    Fixed(f64),
}

/// What happens to classes that never die.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EssentialPolicy {
    /// Keep them with their substituted death.
    #[default]
    Cap,
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdaParams {
    pub dim: usize,
    pub delay: Delay,
    /// Landmark budget; the whole cloud is used when it is not larger.
    pub subsample: usize,
    pub max_eps: MaxEps,
    pub essential: EssentialPolicy,
    /// Display filter sizes for H0 and H1.
    pub k0: usize,
    pub k1: usize,
}

impl Default for TdaParams {
    fn default() -> Self {
        TdaParams {
            dim: 3,
            delay: Delay::Fixed(10),
            subsample: 256,
            max_eps: MaxEps::EnclosingRadius,
            essential: EssentialPolicy::Cap,
            k0: 500,
            k1: 20,
        }
    }
}

impl TdaParams {
    pub fn resolve_delay(&self, x: &[f64]) -> usize {
        match self.delay {
            Delay::Fixed(t) => t,
            Delay::AutocorrZero { max_lag, fallback } => {
                first_autocorr_zero(x, max_lag).unwrap_or(fallback)
            }
        }
    }
}

/// Full H0 + H1 diagram of a distance matrix.
pub fn diagram_of(
    dist: &DistanceMatrix,
    max_eps: MaxEps,
    essential: EssentialPolicy,
) -> Result<PersistenceDiagram> {
    let cap = dist.max();
    let eps = match max_eps {
        MaxEps::EnclosingRadius => dist.enclosing_radius(),
        MaxEps::Full => cap,
        MaxEps::Fixed(e) if e > 0.0 => e,
        MaxEps::Fixed(_) => return Err(Error::param("max_eps", "must be positive")),
    };
    let mut pairs = rips_h0(dist);
    pairs.extend(rips_h1(dist, eps));
    if essential == EssentialPolicy::Drop {
        pairs.retain(|p| !p.essential);
    }
    Ok(PersistenceDiagram {
        pairs,
        filtration_cap: cap,
    })
}

/// Embed, subsample and compute the diagram of one epoch.
pub fn diagram_for_epoch(x: &[f64], params: &TdaParams, seed: u64) -> Result<PersistenceDiagram> {
    let delay = params.resolve_delay(x);
    let cloud = takens_embed(x, params.dim, delay)?;
    let cloud = if cloud.len() > params.subsample {
        let idx = maxmin_subsample(&cloud, params.subsample, seed)?;
        cloud.select(&idx)
    } else {
        cloud
    };
    diagram_of(
        &DistanceMatrix::euclidean(&cloud),
        params.max_eps,
        params.essential,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologicalFeatures {
    pub values: [f64; N_TOPO_FEATURES],
    pub degenerate: Degeneracy,
}

pub fn features_of_diagram(diagram: &PersistenceDiagram) -> TopologicalFeatures {
    let h0 = persistence_statistics(diagram, 0);
    let h1 = persistence_statistics(diagram, 1);
    let mut values = [0.0; N_TOPO_FEATURES];
    values[..2 * N_STATS].copy_from_slice(&h0.values());
    values[2 * N_STATS..].copy_from_slice(&h1.values());
    let mut degenerate = Degeneracy::empty();
    degenerate.set(Degeneracy::H0_STATS, h0.degenerate);
    degenerate.set(Degeneracy::H1_STATS, h1.degenerate);
    TopologicalFeatures { values, degenerate }
}

/// The 32 persistence statistics of one epoch (16 for H0, then 16 for H1).
pub fn topological_features(
    x: &[f64],
    params: &TdaParams,
    seed: u64,
) -> Result<TopologicalFeatures> {
    Ok(features_of_diagram(&diagram_for_epoch(x, params, seed)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{math, rng};
    use core::f64::consts::PI;

    fn sinusoid(n: usize, period: f64) -> Vec<f64> {
        (0..n)
            .map(|i| math::sin(2.0 * PI * i as f64 / period))
            .collect()
    }

    fn max_h1(d: &PersistenceDiagram) -> f64 {
        d.of_dim(1).map(|p| p.lifespan()).fold(0.0, f64::max)
    }

    #[test]
    fn names() {
        assert_eq!(TOPO_FEATURE_NAMES.len(), 32);
        assert_eq!(TOPO_FEATURE_NAMES[8], "h0_lifespan_mean");
        assert_eq!(TOPO_FEATURE_NAMES[31], "h1_lifespan_entropy");
    }

    #[test]
    fn constant_epoch_gives_degenerate_zeros() {
        let f = topological_features(&[2.5; 3000], &TdaParams::default(), 1).unwrap();
        assert_eq!(f.values, [0.0; 32]);
        assert!(f.degenerate.contains(Degeneracy::H0_STATS));
        assert!(f.degenerate.contains(Degeneracy::H1_STATS));
    }

    #[test]
    fn sinusoid_has_a_persistent_loop() {
        let x = sinusoid(3000, 40.0);
        let params = TdaParams {
            delay: Delay::Fixed(10),
            subsample: 64,
            ..TdaParams::default()
        };
        let d = diagram_for_epoch(&x, &params, 3).unwrap();
        assert!(max_h1(&d) > 0.1 * d.filtration_cap, "{d:?}");
    }

    #[test]
    fn sinusoid_beats_noise() {
        let params = TdaParams {
            subsample: 64,
            ..TdaParams::default()
        };
        let sine = sinusoid(3000, 40.0);
        for seed in 0..10 {
            let mut r = rng::seeded(seed);
            let noise: Vec<f64> = (0..3000)
                .map(|_| rng::normal(&mut r) / 2f64.sqrt())
                .collect();
            let a = max_h1(&diagram_for_epoch(&sine, &params, seed).unwrap());
            let b = max_h1(&diagram_for_epoch(&noise, &params, seed).unwrap());
            assert!(a > b, "seed {seed}: {a} vs {b}");
        }
    }

    #[test]
    fn autocorr_delay_resolves() {
        let x = sinusoid(1000, 40.0);
        let p = TdaParams {
            delay: Delay::AutocorrZero {
                max_lag: 200,
                fallback: 10,
            },
            ..TdaParams::default()
        };
        assert!((9..=11).contains(&p.resolve_delay(&x)));
        assert_eq!(p.resolve_delay(&[1.0; 100]), 10);
    }

    #[test]
    fn drop_policy_removes_essentials() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| alloc::vec![i as f64]).collect();
        let d = DistanceMatrix::euclidean(&PointCloud::from_rows(&rows).unwrap());
        let keep = diagram_of(&d, MaxEps::Full, EssentialPolicy::Cap).unwrap();
        let drop = diagram_of(&d, MaxEps::Full, EssentialPolicy::Drop).unwrap();
        assert_eq!(keep.pairs.len(), 5);
        assert_eq!(drop.pairs.len(), 4);
        assert_eq!(keep.filtration_cap, 4.0);
        assert!(diagram_of(&d, MaxEps::Fixed(0.0), EssentialPolicy::Cap).is_err());
    }
}
