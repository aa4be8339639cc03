//! The spectral-temporal feature block: 17 time, 20 frequency and 16
//! time-frequency values per epoch, in a fixed documented order
//! ([`FEATURE_NAMES`]).

pub mod spectral;
pub mod time;
pub mod wavelet;

use alloc::vec::Vec;

use crate::error::Result;
pub use spectral::{BandSpec, Window, BANDS};
pub use time::PetrosianMode;

pub const N_TIME: usize = 17;
pub const N_FREQUENCY: usize = 20;
pub const N_TIME_FREQUENCY: usize = 16;
pub const N_FEATURES: usize = N_TIME + N_FREQUENCY + N_TIME_FREQUENCY;

/// Column names, in output order.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    // time
    "zero_crossings",
    "hjorth_activity",
    "hjorth_mobility",
    "hjorth_complexity",
    "min",
    "max",
    "mean",
    "std",
    "var",
    "skewness",
    "kurtosis",
    "median",
    "petrosian_fd",
    "teager_energy",
    "mean_energy",
    "curve_length",
    "hurst",
    // frequency
    "band_power_delta",
    "band_power_theta",
    "band_power_alpha",
    "band_power_beta",
    "psd_delta",
    "psd_theta",
    "psd_alpha",
    "psd_beta",
    "relative_power_delta",
    "relative_power_theta",
    "relative_power_alpha",
    "relative_power_beta",
    "peak_frequency_delta",
    "peak_frequency_theta",
    "peak_frequency_alpha",
    "peak_frequency_beta",
    "spectral_entropy_delta",
    "spectral_entropy_theta",
    "spectral_entropy_alpha",
    "spectral_entropy_beta",
    // time-frequency
    "dwt_d1_mean",
    "dwt_d1_std",
    "dwt_d1_energy",
    "dwt_d1_entropy",
    "dwt_d2_mean",
    "dwt_d2_std",
    "dwt_d2_energy",
    "dwt_d2_entropy",
    "dwt_d3_mean",
    "dwt_d3_std",
    "dwt_d3_energy",
    "dwt_d3_entropy",
    "dwt_d4_mean",
    "dwt_d4_std",
    "dwt_d4_energy",
    "dwt_d4_entropy",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureGroup {
    Time,
    Frequency,
    TimeFrequency,
    Topology,
}

impl FeatureGroup {
    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::Time => "time",
            FeatureGroup::Frequency => "frequency",
            FeatureGroup::TimeFrequency => "time-frequency",
            FeatureGroup::Topology => "topology",
        }
    }
}

/// Group of the spectral-temporal feature at position `i`.
pub fn group_of(i: usize) -> FeatureGroup {
    if i < N_TIME {
        FeatureGroup::Time
    } else if i < N_TIME + N_FREQUENCY {
        FeatureGroup::Frequency
    } else {
        FeatureGroup::TimeFrequency
    }
}

/// Per-epoch record of statistics that hit a 0/0 and were resolved to 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Degeneracy(u16);

impl Degeneracy {
    pub const HJORTH: Self = Self(1);
    pub const MOMENTS: Self = Self(1 << 1);
    pub const HURST: Self = Self(1 << 2);
    pub const SPECTRUM: Self = Self(1 << 3);
    pub const WAVELET: Self = Self(1 << 4);
    pub const H0_STATS: Self = Self(1 << 5);
    pub const H1_STATS: Self = Self(1 << 6);

    const NAMES: [(Self, &'static str); 7] = [
        (Self::HJORTH, "hjorth"),
        (Self::MOMENTS, "moments"),
        (Self::HURST, "hurst"),
        (Self::SPECTRUM, "spectrum"),
        (Self::WAVELET, "wavelet"),
        (Self::H0_STATS, "h0_stats"),
        (Self::H1_STATS, "h1_stats"),
    ];

    pub fn empty() -> Self {
        Self(0)
    }
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
    pub fn contains(self, other: Self) -> bool {
        self.0 & other.0 == other.0
    }
    pub fn set(&mut self, other: Self, on: bool) {
        if on {
            self.0 |= other.0;
        }
    }
    pub fn union(self, other: Self) -> Self {
        Self(self.0 | other.0)
    }
    pub fn names(self) -> Vec<&'static str> {
        Self::NAMES
            .iter()
            .filter(|(f, _)| self.contains(*f))
            .map(|(_, n)| *n)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureConfig {
    pub window: Window,
    pub petrosian: PetrosianMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectroTemporalFeatures {
    pub values: [f64; N_FEATURES],
    pub degenerate: Degeneracy,
}

impl SpectroTemporalFeatures {
    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values[i])
    }
}

/// Compute the 53 spectral-temporal features of one epoch.
///
/// The wavelet block uses the leading `16 * floor(n / 16)` samples, since
/// the four-level periodic transform needs a length divisible by 16.
pub fn extract(
    x: &[f64],
    sample_rate_hz: f64,
    cfg: &FeatureConfig,
) -> Result<SpectroTemporalFeatures> {
    let mut v = [0.0; N_FEATURES];
    let mut deg = Degeneracy::empty();

    v[0] = time::zero_crossings(x)? as f64;
    let h = time::hjorth(x)?;
    v[1..4].copy_from_slice(&[h.activity, h.mobility, h.complexity]);
    deg.set(Degeneracy::HJORTH, h.degenerate);
    let m = time::moments(x)?;
    v[4..12].copy_from_slice(&[
        m.min, m.max, m.mean, m.std, m.var, m.skewness, m.kurtosis, m.median,
    ]);
    deg.set(Degeneracy::MOMENTS, m.degenerate);
    v[12] = time::petrosian_fd(x, cfg.petrosian)?;
    v[13] = time::teager_energy(x)?;
    v[14] = time::mean_energy(x)?;
    v[15] = time::curve_length(x)?;
    let hu = time::hurst(x)?;
    v[16] = hu.exponent;
    deg.set(Degeneracy::HURST, hu.degenerate);

    let bf = spectral::band_features(x, sample_rate_hz, cfg.window)?;
    v[N_TIME..N_TIME + N_FREQUENCY].copy_from_slice(&bf.values());
    deg.set(Degeneracy::SPECTRUM, bf.degenerate);

    let usable = x.len() / 16 * 16;
    let w = wavelet::dwt_features(&x[..usable])?;
    deg.set(Degeneracy::WAVELET, w.iter().all(|c| *c == 0.0));
    v[N_TIME + N_FREQUENCY..].copy_from_slice(&w);

    Ok(SpectroTemporalFeatures {
        values: v,
        degenerate: deg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    #[test]
    fn names_are_unique_and_grouped() {
        let mut sorted = FEATURE_NAMES.to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 53);
        assert_eq!(
            (0..53)
                .filter(|i| group_of(*i) == FeatureGroup::Time)
                .count(),
            17
        );
        assert_eq!(
            (0..53)
                .filter(|i| group_of(*i) == FeatureGroup::Frequency)
                .count(),
            20
        );
        assert_eq!(FEATURE_NAMES[N_TIME], "band_power_delta");
        assert_eq!(FEATURE_NAMES[N_TIME + N_FREQUENCY], "dwt_d1_mean");
    }

    #[test]
    fn constant_epoch_is_finite_and_flagged() {
        let f = extract(&[4.0; 3000], 100.0, &FeatureConfig::default()).unwrap();
        assert!(f.values.iter().all(|v| v.is_finite()));
        assert!(f.degenerate.contains(Degeneracy::HJORTH));
        assert!(f.degenerate.contains(Degeneracy::HURST));
        assert_eq!(f.get("mean"), Some(4.0));
    }

    #[test]
    fn variance_identities() {
        let mut r = rng::seeded(1);
        let x: Vec<f64> = (0..3000).map(|_| 30.0 * rng::normal(&mut r)).collect();
        let f = extract(&x, 100.0, &FeatureConfig::default()).unwrap();
        let var = f.get("var").unwrap();
        assert!((var - f.get("std").unwrap().powi(2)).abs() < 1e-12 * var.max(1.0));
        assert!((f.get("hjorth_activity").unwrap() - var).abs() < 1e-12);
        assert!(f.degenerate.is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn finite_and_scale_behaviour(seed in 0u64..1000, alpha in 0.1f64..20.0) {
            let mut r = rng::seeded(seed);
            let x: Vec<f64> = (0..512).map(|_| rng::normal(&mut r) + 0.3).collect();
            let y: Vec<f64> = x.iter().map(|v| alpha * v).collect();
            let cfg = FeatureConfig::default();
            let (fx, fy) = (extract(&x, 100.0, &cfg).unwrap(), extract(&y, 100.0, &cfg).unwrap());
            prop_assert!(fx.values.iter().all(|v| v.is_finite()));
            let g = |f: &SpectroTemporalFeatures, n: &str| f.get(n).unwrap();
            for name in ["zero_crossings", "petrosian_fd", "hurst"] {
                prop_assert!((g(&fx, name) - g(&fy, name)).abs() < 1e-9, "{}", name);
            }
            prop_assert!((g(&fy, "mean_energy") - alpha * alpha * g(&fx, "mean_energy")).abs()
                < 1e-9 * g(&fy, "mean_energy"));
            for b in ["delta", "theta", "alpha", "beta"] {
                let rp = alloc::format!("relative_power_{b}");
                let pf = alloc::format!("peak_frequency_{b}");
                let se = alloc::format!("spectral_entropy_{b}");
                let bp = alloc::format!("band_power_{b}");
                prop_assert!((g(&fx, &rp) - g(&fy, &rp)).abs() < 1e-9);
                prop_assert_eq!(g(&fx, &pf), g(&fy, &pf));
                prop_assert!((g(&fx, &se) - g(&fy, &se)).abs() < 1e-9);
                prop_assert!((g(&fy, &bp) - alpha * alpha * g(&fx, &bp)).abs() < 1e-9 * g(&fy, &bp));
            }
        }
    }
}
