//! Periodic Daubechies-4 (8-tap) discrete wavelet transform and the
//! per-level detail statistics.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Daubechies scaling filter with four vanishing moments.
pub const DB4: [f64; 8] = [
    0.230_377_813_308_855_23,
    0.714_846_570_552_541_5,
    0.630_880_767_929_590_4,
    -0.027_983_769_416_983_85,
    -0.187_034_811_718_881_14,
    0.030_841_381_835_986_965,
    0.032_883_011_666_982_945,
    -0.010_597_401_784_997_278,
];

pub const LEVELS: usize = 4;

fn wavelet_filter(h: &[f64]) -> Vec<f64> {
    let l = h.len();
    (0..l)
        .map(|m| {
            if m % 2 == 0 {
                h[l - 1 - m]
            } else {
                -h[l - 1 - m]
            }
        })
        .collect()
}

/// One analysis step with periodic extension. `x.len()` must be even.
pub fn analyze(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let g = wavelet_filter(&DB4);
    let half = n / 2;
    let mut a = vec![0.0; half];
    let mut d = vec![0.0; half];
    for k in 0..half {
        let (mut sa, mut sd) = (0.0, 0.0);
        for m in 0..DB4.len() {
            let v = x[(2 * k + m) % n];
            sa += DB4[m] * v;
            sd += g[m] * v;
        }
        a[k] = sa;
        d[k] = sd;
    }
    (a, d)
}

/// Inverse of [`analyze`] (its transpose, since the transform is orthogonal).
pub fn synthesize(a: &[f64], d: &[f64]) -> Vec<f64> {
    let n = 2 * a.len();
    let g = wavelet_filter(&DB4);
    let mut x = vec![0.0; n];
    for k in 0..a.len() {
        for m in 0..DB4.len() {
            x[(2 * k + m) % n] += DB4[m] * a[k] + g[m] * d[k];
        }
    }
    x
}

/// Multi-level decomposition: `(approximation, [d1, d2, ..])`, finest first.
pub fn wavedec(x: &[f64], levels: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let multiple = 1usize << levels;
    if x.is_empty() || !x.len().is_multiple_of(multiple) {
        return Err(Error::LengthNotMultiple {
            op: "wavedec",
            multiple,
            got: x.len(),
        });
    }
    let mut approx = x.to_vec();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let (a, d) = analyze(&approx);
        details.push(d);
        approx = a;
    }
    Ok((approx, details))
}

pub fn waverec(approx: &[f64], details: &[Vec<f64>]) -> Vec<f64> {
    let mut x = approx.to_vec();
    for d in details.iter().rev() {
        x = synthesize(&x, d);
    }
    x
}

/// Mean, standard deviation, energy (mean square) and normalized-energy
/// entropy (bits) of each detail level, finest level first.
pub fn dwt_features(x: &[f64]) -> Result<[f64; 16]> {
    let (_, details) = wavedec(x, LEVELS)?;
    let mut out = [0.0; 16];
    for (j, d) in details.iter().enumerate() {
        let sq: Vec<f64> = d.iter().map(|c| c * c).collect();
        out[4 * j] = math::mean(d);
        out[4 * j + 1] = math::pop_std(d);
        out[4 * j + 2] = math::mean(&sq);
        out[4 * j + 3] = math::normalized_entropy(&sq, math::log2);
    }
    Ok(out)
}
