//! Seeded synthetic data: labelled point clouds for the reducers and the
//! selector, and a stage-dependent EEG night for end-to-end runs.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::error::Result;
use crate::ingest::{epoch_len, LabelSpan, SignalRecord, StageLabel, EPOCH_SECONDS};
use crate::math;
use crate::matrix::FeatureMatrix;
use crate::rng::{self, SeededRng};

fn names(prefix: &str, p: usize) -> Vec<String> {
    (0..p).map(|j| format!("{prefix}{j}")).collect()
}

/// `n_per` isotropic Gaussian points around each of `k <= 5` centres.
/// Centre `c` sits at `separation / sqrt(2)` along axis `c`, so every pair
/// of centres is `separation` apart. Class `c` gets stage label `c`.
pub fn gaussian_clusters(
    k: usize,
    n_per: usize,
    p: usize,
    sigma: f64,
    separation: f64,
    seed: u64,
) -> Result<FeatureMatrix> {
    let mut r = rng::seeded(seed);
    let offset = separation / math::sqrt(2.0);
    let mut data = Vec::with_capacity(k * n_per * p);
    let mut labels = Vec::with_capacity(k * n_per);
    for c in 0..k {
        for _ in 0..n_per {
            for j in 0..p {
                let centre = if j == c % p { offset } else { 0.0 };
                data.push(centre + sigma * rng::normal(&mut r));
            }
            labels.push(StageLabel::from_index(c));
        }
    }
    let n = labels.len();
    FeatureMatrix::new(
        names("x", p),
        data,
        labels,
        alloc::vec![String::from("synthetic"); n],
        (0..n).collect(),
    )
}

/// `n` rows in `p` columns that are linear mixtures of two latent factors,
/// plus isotropic noise of standard deviation `noise`.
pub fn rank_two(n: usize, p: usize, noise: f64, seed: u64) -> Vec<f64> {
    let mut r = rng::seeded(seed);
    let loadings: Vec<f64> = (0..2 * p).map(|_| rng::normal(&mut r)).collect();
    let mut data = Vec::with_capacity(n * p);
    for _ in 0..n {
        let (u, v) = (rng::normal(&mut r), rng::normal(&mut r));
        for j in 0..p {
            data.push(u * loadings[j] + v * loadings[p + j] + noise * rng::normal(&mut r));
        }
    }
    data
}

/// Five balanced classes with `n_informative` columns whose class means are
/// shuffled multiples of `gap` (unit noise), followed by `n_noise` columns
/// independent of the class: a random sign plus `N(0, 0.3^2)` jitter, which
/// splits the rows into spurious clusters that mislead nearest neighbours.
/// Informative columns are named `info*`, noise `noise*`.
pub fn selection_fixture(
    n_per: usize,
    n_informative: usize,
    n_noise: usize,
    gap: f64,
    seed: u64,
) -> Result<FeatureMatrix> {
    let mut r = rng::seeded(seed);
    let means: Vec<Vec<f64>> = (0..n_informative)
        .map(|_| {
            let mut m: Vec<f64> = (0..StageLabel::COUNT).map(|c| gap * c as f64).collect();
            rng::shuffle(&mut r, &mut m);
            m
        })
        .collect();
    let p = n_informative + n_noise;
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for c in 0..StageLabel::COUNT {
        for _ in 0..n_per {
            for m in &means {
                data.push(m[c] + rng::normal(&mut r));
            }
            for _ in 0..n_noise {
                let sign = if rng::uniform(&mut r) < 0.5 {
                    -1.0
                } else {
                    1.0
                };
                data.push(sign + 0.3 * rng::normal(&mut r));
            }
            labels.push(StageLabel::from_index(c));
        }
    }
    let mut cols = names("info", n_informative);
    cols.extend(names("noise", n_noise));
    let n = labels.len();
    debug_assert_eq!(data.len(), n * p);
    FeatureMatrix::new(
        cols,
        data,
        labels,
        alloc::vec![String::from("synthetic"); n],
        (0..n).collect(),
    )
}

/// Stage sequence with runs of 5 to 12 epochs, stepping through a simple
/// wake -> light -> deep -> REM cycle. From 77 epochs on, every stage has
/// at least five epochs.
fn stage_sequence(n_epochs: usize, r: &mut SeededRng) -> Vec<StageLabel> {
    use StageLabel::*;
    const CYCLE: [StageLabel; 8] = [W, N1, N2, N3, N3, N2, Rem, N2];
    let mut out = Vec::with_capacity(n_epochs);
    let mut pos = 0;
    while out.len() < n_epochs {
        let run = 5 + rng::index(r, 8);
        let stage = CYCLE[pos % CYCLE.len()];
        for _ in 0..run.min(n_epochs - out.len()) {
            out.push(stage);
        }
        pos += 1;
    }
    out
}

/// (frequency Hz, amplitude uV) components of each stage.
fn rhythms(stage: StageLabel) -> &'static [(f64, f64)] {
    match stage {
        StageLabel::W => &[(10.0, 30.0), (20.0, 8.0)],
        StageLabel::N1 => &[(6.0, 25.0), (10.0, 6.0)],
        StageLabel::N2 => &[(13.0, 20.0), (5.0, 15.0), (1.5, 15.0)],
        StageLabel::N3 => &[(1.0, 70.0), (2.0, 40.0)],
        StageLabel::Rem => &[(6.5, 18.0), (3.0, 12.0), (18.0, 6.0)],
    }
}

/// One EEG channel of `n_epochs` scored epochs plus its hypnogram spans.
/// Each epoch is a sum of stage-specific oscillations with random phase and
/// slow amplitude drift, plus AR(1) background noise.
pub fn synthetic_night(
    n_epochs: usize,
    sample_rate_hz: f64,
    seed: u64,
) -> (SignalRecord, Vec<LabelSpan>) {
    let mut r = rng::seeded(seed);
    let stages = stage_sequence(n_epochs, &mut r);
    let win = epoch_len(sample_rate_hz);
    let mut samples = Vec::with_capacity(n_epochs * win);
    let mut ar = 0.0;
    for &stage in &stages {
        let comps: Vec<(f64, f64, f64, f64)> = rhythms(stage)
            .iter()
            .map(|&(f, a)| {
                let f = f * (1.0 + 0.05 * rng::normal(&mut r));
                (
                    f,
                    a * (0.8 + 0.4 * rng::uniform(&mut r)),
                    TAU * rng::uniform(&mut r),
                    TAU * rng::uniform(&mut r),
                )
            })
            .collect();
        for i in 0..win {
            let t = i as f64 / sample_rate_hz;
            let mut v = 0.0;
            for &(f, a, phase, drift) in &comps {
                let env = 1.0 + 0.3 * math::sin(TAU * t / EPOCH_SECONDS + drift);
                v += a * env * math::sin(TAU * f * t + phase);
            }
            ar = 0.9 * ar + 4.0 * rng::normal(&mut r);
            samples.push((v + ar).clamp(-250.0, 250.0));
        }
    }
    let mut spans: Vec<LabelSpan> = Vec::new();
    for (i, s) in stages.iter().enumerate() {
        let onset = i as f64 * EPOCH_SECONDS;
        match spans.last_mut() {
            Some(last) if last.label == s.name() => last.duration_s += EPOCH_SECONDS,
            _ => spans.push(LabelSpan::new(onset, EPOCH_SECONDS, s.name())),
        }
    }
    let record = SignalRecord {
        label: String::from("EEG Fpz-Cz"),
        sample_rate_hz,
        samples,
        physical_min: -250.0,
        physical_max: 250.0,
        digital_min: -32768,
        digital_max: 32767,
    };
    (record, spans)
}
