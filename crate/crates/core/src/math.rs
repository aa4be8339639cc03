//! Float helpers on top of `libm` and the small descriptive-statistics kit
//! shared by the feature extractors and the persistence statistics.

use alloc::vec::Vec;

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}
#[inline]
pub fn log10(x: f64) -> f64 {
    libm::log10(x)
}
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}
#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn tan(x: f64) -> f64 {
    libm::tan(x)
}
#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}
#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population (1/n) variance.
pub fn variance(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

pub fn pop_std(x: &[f64]) -> f64 {
    sqrt(variance(x))
}

/// Third and fourth standardized moments (skewness, non-excess kurtosis).
/// Returns `None` when the standard deviation is zero.
pub fn shape_moments(x: &[f64]) -> Option<(f64, f64)> {
    let m = mean(x);
    let sd = pop_std(x);
    if !(sd > 0.0) {
        return None;
    }
    let n = x.len() as f64;
    let (mut s3, mut s4) = (0.0, 0.0);
    for v in x {
        let z = (v - m) / sd;
        let z2 = z * z;
        s3 += z2 * z;
        s4 += z2 * z2;
    }
    Some((s3 / n, s4 / n))
}

pub fn sorted(x: &[f64]) -> Vec<f64> {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Median by the odd/even rule on a sorted copy.
pub fn median(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let s = sorted(x);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

/// Percentile `q` in [0, 100] with linear interpolation between closest
/// ranks on an already sorted slice.
pub fn percentile_sorted(s: &[f64], q: f64) -> f64 {
    match s.len() {
        0 => 0.0,
        1 => s[0],
        n => {
            let pos = q / 100.0 * (n - 1) as f64;
            let lo = floor(pos) as usize;
            let hi = (lo + 1).min(n - 1);
            let frac = pos - lo as f64;
            s[lo] + (s[hi] - s[lo]) * frac
        }
    }
}

/// Shannon entropy of non-negative weights normalized to sum 1, using
/// `log` for the logarithm. Zero total mass gives 0.
pub fn normalized_entropy(w: &[f64], log: fn(f64) -> f64) -> f64 {
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return 0.0;
    }
    let mut h = 0.0;
    for &v in w {
        if v > 0.0 {
            let p = v / total;
            h -= p * log(p);
        }
    }
    // A point mass can leave -0.0 behind.
    if h <= 0.0 {
        0.0
    } else {
        h
    }
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
