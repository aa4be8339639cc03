//! Frequency-domain features over the four classical EEG bands.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    pub name: &'static str,
    pub low_hz: f64,
    pub high_hz: f64,
}

pub const BANDS: [BandSpec; 4] = [
    BandSpec {
        name: "delta",
        low_hz: 1.0,
        high_hz: 4.0,
    },
    BandSpec {
        name: "theta",
        low_hz: 4.0,
        high_hz: 8.0,
    },
    BandSpec {
        name: "alpha",
        low_hz: 8.0,
        high_hz: 13.0,
    },
    BandSpec {
        name: "beta",
        low_hz: 13.0,
        high_hz: 30.0,
    },
];

/// Minimum epoch length accepted by [`band_features`].
pub const MIN_LEN: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    /// Hann window, amplitude corrected by its coherent gain.
    #[default]
    Hann,
    /// Plain rectangular periodogram.
    Raw,
}

/// One-sided-free periodogram bins `S(f_k) = |X_k|^2 / N` for
/// `k in k_lo..k_hi`, computed by direct DFT over the requested bins only.
pub fn periodogram_bins(x: &[f64], window: Window, k_lo: usize, k_hi: usize) -> Vec<f64> {
    let n = x.len();
    let (xw, gain) = match window {
        Window::Raw => (x.to_vec(), 1.0),
        Window::Hann => {
            let w: Vec<f64> = (0..n)
                .map(|i| 0.5 - 0.5 * math::cos(2.0 * PI * i as f64 / n as f64))
                .collect();
            let cg = w.iter().sum::<f64>() / n as f64;
            (x.iter().zip(&w).map(|(a, b)| a * b).collect(), cg)
        }
    };
    let cos_t: Vec<f64> = (0..n)
        .map(|m| math::cos(2.0 * PI * m as f64 / n as f64))
        .collect();
    let sin_t: Vec<f64> = (0..n)
        .map(|m| math::sin(2.0 * PI * m as f64 / n as f64))
        .collect();
    (k_lo..k_hi)
        .map(|k| {
            let step = k % n;
            let (mut re, mut im, mut idx) = (0.0, 0.0, 0usize);
            for v in &xw {
                re += v * cos_t[idx];
                im -= v * sin_t[idx];
                idx += step;
                if idx >= n {
                    idx -= n;
                }
            }
            (re * re + im * im) / (gain * gain * n as f64)
        })
        .collect()
}

/// Second-order section in transposed direct form II, `a0` normalized to 1.
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    fn rbj(kind_high: bool, cutoff_hz: f64, fs: f64, q: f64) -> Self {
        let w0 = 2.0 * PI * cutoff_hz / fs;
        let (c, s) = (math::cos(w0), math::sin(w0));
        let alpha = s / (2.0 * q);
        let a0 = 1.0 + alpha;
        let b = if kind_high {
            [(1.0 + c) / 2.0, -(1.0 + c), (1.0 + c) / 2.0]
        } else {
            [(1.0 - c) / 2.0, 1.0 - c, (1.0 - c) / 2.0]
        };
        Biquad {
            b: [b[0] / a0, b[1] / a0, b[2] / a0],
            a: [-2.0 * c / a0, (1.0 - alpha) / a0],
        }
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    /// State that makes a constant unit input pass through without transient.
    fn steady_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        let z2 = self.b[2] - self.a[1] * g;
        [g - self.b[0], z2]
    }
}

/// Fourth-order Butterworth band-pass as a high-pass and a low-pass
/// cascade (two biquads each).
fn butterworth_band(low_hz: f64, high_hz: f64, fs: f64) -> Vec<Biquad> {
    // Pole-pair quality factors of a 4th-order Butterworth prototype.
    let qs = [
        1.0 / (2.0 * math::sin(PI / 8.0)),
        1.0 / (2.0 * math::sin(3.0 * PI / 8.0)),
    ];
    let mut sos = Vec::with_capacity(4);
    for q in qs {
        sos.push(Biquad::rbj(true, low_hz, fs, q));
    }
    for q in qs {
        sos.push(Biquad::rbj(false, high_hz, fs, q));
    }
    sos
}

fn sos_filter(sos: &[Biquad], x: &mut [f64]) {
    let x0 = x.first().copied().unwrap_or(0.0);
    let mut scale = x0;
    for s in sos {
        let zi = s.steady_state();
        let (mut z1, mut z2) = (zi[0] * scale, zi[1] * scale);
        for v in x.iter_mut() {
            let input = *v;
            let y = s.b[0] * input + z1;
            z1 = s.b[1] * input - s.a[0] * y + z2;
            z2 = s.b[2] * input - s.a[1] * y;
            *v = y;
        }
        scale *= s.dc_gain();
    }
}

/// Zero-phase forward-backward filtering with odd extension at both ends.
fn sos_filtfilt(sos: &[Biquad], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let pad = (3 * (2 * sos.len() + 1)).min(n.saturating_sub(1));
    let mut ext = Vec::with_capacity(n + 2 * pad);
    for i in (1..=pad).rev() {
        ext.push(2.0 * x[0] - x[i]);
    }
    ext.extend_from_slice(x);
    for i in 1..=pad {
        ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
    }
    sos_filter(sos, &mut ext);
    ext.reverse();
    sos_filter(sos, &mut ext);
    ext.reverse();
    ext[pad..pad + n].to_vec()
}

/// Zero-phase band-pass filtered copy of `x`.
pub fn bandpass(x: &[f64], band: &BandSpec, sample_rate_hz: f64) -> Vec<f64> {
    sos_filtfilt(
        &butterworth_band(band.low_hz, band.high_hz, sample_rate_hz),
        x,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BandFeatures {
    pub band_power: [f64; 4],
    pub psd: [f64; 4],
    pub relative_power: [f64; 4],
    pub peak_frequency: [f64; 4],
    pub spectral_entropy: [f64; 4],
    /// Total power in the four bands was zero.
    pub degenerate: bool,
}

impl BandFeatures {
    /// The 20 values in reporting order: five feature kinds, four bands each.
    pub fn values(&self) -> [f64; 20] {
        let mut out = [0.0; 20];
        for (g, group) in [
            &self.band_power,
            &self.psd,
            &self.relative_power,
            &self.peak_frequency,
            &self.spectral_entropy,
        ]
        .into_iter()
        .enumerate()
        {
            out[g * 4..g * 4 + 4].copy_from_slice(group);
        }
        out
    }
}

/// Bin range `[lo, hi)` whose frequencies fall in `[low_hz, high_hz)`.
fn band_bins(band: &BandSpec, df: f64) -> (usize, usize) {
    let lo = math::ceil(band.low_hz / df - 1e-9) as usize;
    let hi = math::ceil(band.high_hz / df - 1e-9) as usize;
    (lo, hi)
}

pub fn band_features(x: &[f64], sample_rate_hz: f64, window: Window) -> Result<BandFeatures> {
    if x.len() < MIN_LEN {
        return Err(Error::TooShort {
            op: "band_features",
            needed: MIN_LEN,
            got: x.len(),
        });
    }
    let top = BANDS[BANDS.len() - 1].high_hz;
    if !(sample_rate_hz > 2.0 * top) {
        return Err(Error::param(
            "sample_rate_hz",
            alloc::format!("must exceed {} Hz for the beta band", 2.0 * top),
        ));
    }
    let n = x.len();
    let df = sample_rate_hz / n as f64;
    let ranges: Vec<(usize, usize)> = BANDS.iter().map(|b| band_bins(b, df)).collect();
    let k_lo = ranges[0].0;
    let k_hi = ranges[ranges.len() - 1].1;
    let spec = periodogram_bins(x, window, k_lo, k_hi);

    let mut f = BandFeatures::default();
    for (b, band) in BANDS.iter().enumerate() {
        let filtered = bandpass(x, band, sample_rate_hz);
        f.band_power[b] = filtered.iter().map(|v| v * v).sum::<f64>() / n as f64;
        let (lo, hi) = ranges[b];
        let bins = &spec[lo - k_lo..hi - k_lo];
        f.psd[b] = bins.iter().sum();
        let mut arg = 0;
        for (i, v) in bins.iter().enumerate() {
            if *v > bins[arg] {
                arg = i;
            }
        }
        f.peak_frequency[b] = if f.psd[b] > 0.0 {
            df * (lo + arg) as f64
        } else {
            0.0
        };
        f.spectral_entropy[b] = math::normalized_entropy(bins, math::log2);
    }
    let total: f64 = f.psd.iter().sum();
    if total > 0.0 {
        for b in 0..4 {
            f.relative_power[b] = f.psd[b] / total;
        }
    } else {
        f.degenerate = true;
        f.spectral_entropy = [0.0; 4];
    }
    Ok(f)
}

/// Plain O(N^2) DFT power, kept for cross-checking the bin routine.
#[doc(hidden)]
pub fn full_power_spectrum(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n];
    for (k, o) in out.iter_mut().enumerate() {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, v) in x.iter().enumerate() {
            let ang = 2.0 * PI * ((k * i) % n) as f64 / n as f64;
            re += v * math::cos(ang);
            im -= v * math::sin(ang);
        }
        *o = (re * re + im * im) / n as f64;
    }
    out
}
