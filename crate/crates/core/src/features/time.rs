//! Time-domain features.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

fn need(op: &'static str, x: &[f64], needed: usize) -> Result<()> {
    if x.len() < needed {
        Err(Error::TooShort {
            op,
            needed,
            got: x.len(),
        })
    } else {
        Ok(())
    }
}

fn diff(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Counts adjacent pairs where the signal changes strict sign or lands on
/// zero from a non-zero value.
pub fn zero_crossings(x: &[f64]) -> Result<usize> {
    need("zero_crossings", x, 2)?;
    Ok(x.windows(2)
        .filter(|w| {
            let (a, b) = (w[0], w[1]);
            (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0) || (a != 0.0 && b == 0.0)
        })
        .count())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hjorth {
    pub activity: f64,
    pub mobility: f64,
    pub complexity: f64,
    /// Zero-variance input; mobility and complexity were set to 0.
    pub degenerate: bool,
}

/// Hjorth parameters from the population standard deviations of the signal
/// and its first and second differences:
/// activity = s0^2, mobility = s1/s0, complexity = sqrt(s2*s1/s0^2).
pub fn hjorth(x: &[f64]) -> Result<Hjorth> {
    need("hjorth", x, 3)?;
    let var0 = math::variance(x);
    let d1 = diff(x);
    let d2 = diff(&d1);
    let s0 = math::sqrt(var0);
    let s1 = math::pop_std(&d1);
    let s2 = math::pop_std(&d2);
    if !(s0 > 0.0) {
        return Ok(Hjorth {
            activity: 0.0,
            mobility: 0.0,
            complexity: 0.0,
            degenerate: true,
        });
    }
    Ok(Hjorth {
        activity: var0,
        mobility: s1 / s0,
        complexity: math::sqrt(s2 * s1 / var0),
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
    pub var: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub median: f64,
    pub degenerate: bool,
}

/// Population moments. Kurtosis is the plain fourth standardized moment
/// (3 for a Gaussian). Skewness and kurtosis are 0 when the spread is 0.
pub fn moments(x: &[f64]) -> Result<Moments> {
    need("moments", x, 1)?;
    let var = math::variance(x);
    let shape = math::shape_moments(x);
    Ok(Moments {
        min: x.iter().copied().fold(f64::INFINITY, f64::min),
        max: x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: math::mean(x),
        std: math::sqrt(var),
        var,
        skewness: shape.map_or(0.0, |s| s.0),
        kurtosis: shape.map_or(0.0, |s| s.1),
        median: math::median(x),
        degenerate: shape.is_none(),
    })
}

/// How consecutive-difference events are counted for the Petrosian
/// fractal dimension.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PetrosianMode {
    /// Sign changes of the first difference (the limit of a vanishing threshold).
    #[default]
    SignChange,
    /// `|x[n] - x[n-1]| >= delta`.
    Threshold(f64),
}

pub fn petrosian_events(x: &[f64], mode: PetrosianMode) -> usize {
    let d = diff(x);
    match mode {
        PetrosianMode::SignChange => d.windows(2).filter(|w| w[0] * w[1] < 0.0).count(),
        PetrosianMode::Threshold(delta) => d.iter().filter(|v| v.abs() >= delta).count(),
    }
}

/// `log10 N / (log10 N + log10(N / (N + 0.4 N_delta)))`.
pub fn petrosian_fd(x: &[f64], mode: PetrosianMode) -> Result<f64> {
    need("petrosian_fd", x, 2)?;
    let n = x.len() as f64;
    let nd = petrosian_events(x, mode) as f64;
    let ln = math::log10(n);
    Ok(ln / (ln + math::log10(n / (n + 0.4 * nd))))
}

/// Mean Teager energy over the interior samples.
pub fn teager_energy(x: &[f64]) -> Result<f64> {
    need("teager_energy", x, 3)?;
    let sum: f64 = x.windows(3).map(|w| w[1] * w[1] - w[2] * w[0]).sum();
    Ok(sum / (x.len() - 2) as f64)
}

pub fn mean_energy(x: &[f64]) -> Result<f64> {
    need("mean_energy", x, 1)?;
    Ok(x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64)
}

pub fn curve_length(x: &[f64]) -> Result<f64> {
    need("curve_length", x, 2)?;
    let sum: f64 = x
        .windows(2)
        .map(|w| math::sqrt(1.0 + (w[1] - w[0]) * (w[1] - w[0])))
        .sum();
    Ok(sum / (x.len() - 1) as f64)
}

/// Smallest window used by the rescaled-range estimator.
pub const HURST_MIN_WINDOW: usize = 8;
const HURST_SCALES: usize = 16;

/// Window sizes for the R/S fit: log-spaced from 8 to n/2, deduplicated.
pub fn hurst_window_sizes(n: usize) -> Vec<usize> {
    let lo = HURST_MIN_WINDOW as f64;
    let hi = (n / 2) as f64;
    let mut sizes: Vec<usize> = (0..HURST_SCALES)
        .map(|i| {
            let t = i as f64 / (HURST_SCALES - 1) as f64;
            math::round(math::exp(math::ln(lo) + t * (math::ln(hi) - math::ln(lo)))) as usize
        })
        .collect();
    sizes.dedup();
    sizes
}

/// Mean rescaled range over disjoint windows of `size`, skipping windows
/// with zero spread. `None` when every window was skipped.
pub fn mean_rescaled_range(x: &[f64], size: usize) -> Option<f64> {
    let mut total = 0.0;
    let mut used = 0usize;
    for w in x.chunks_exact(size) {
        let m = math::mean(w);
        let s = math::pop_std(w);
        if !(s > 0.0) {
            continue;
        }
        let (mut acc, mut lo, mut hi) = (0.0f64, 0.0f64, 0.0f64);
        for v in w {
            acc += v - m;
            lo = lo.min(acc);
            hi = hi.max(acc);
        }
        total += (hi - lo) / s;
        used += 1;
    }
    (used > 0).then(|| total / used as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hurst {
    pub exponent: f64,
    pub degenerate: bool,
}

/// Rescaled-range Hurst estimate: least-squares slope of log(R/S) against
/// log(window size). Falls back to 0.5 when fewer than two window sizes
/// have non-zero spread.
pub fn hurst(x: &[f64]) -> Result<Hurst> {
    need("hurst", x, 32)?;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for size in hurst_window_sizes(x.len()) {
        if let Some(rs) = mean_rescaled_range(x, size) {
            if rs > 0.0 {
                pts.push((math::ln(size as f64), math::ln(rs)));
            }
        }
    }
    if pts.len() < 2 {
        return Ok(Hurst {
            exponent: 0.5,
            degenerate: true,
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(Hurst {
        exponent: sxy / sxx,
        degenerate: false,
    })
}
