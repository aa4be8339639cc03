//! Signal records, 30 s epochs, stage labels and hypnogram segmentation.
//!
//! Container parsing (EDF, CSV) lives in the companion crate; this module
//! only holds the in-memory types and the pure segmentation step.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::math;

/// Epoch length in seconds.
pub const EPOCH_SECONDS: f64 = 30.0;

/// Five-class sleep stage vocabulary, in the column order used by reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StageLabel {
    W,
    N1,
    N2,
    N3,
    Rem,
}

impl StageLabel {
    pub const ALL: [StageLabel; 5] = [
        StageLabel::W,
        StageLabel::N1,
        StageLabel::N2,
        StageLabel::N3,
        StageLabel::Rem,
    ];
    pub const COUNT: usize = 5;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            StageLabel::W => "W",
            StageLabel::N1 => "N1",
            StageLabel::N2 => "N2",
            StageLabel::N3 => "N3",
            StageLabel::Rem => "REM",
        }
    }

    /// Exact-name parse (`W`, `N1`, `N2`, `N3`, `REM`).
    pub fn parse(text: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|s| s.name() == text)
            .ok_or_else(|| Error::UnknownLabel(text.to_string()))
    }
}

impl fmt::Display for StageLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Map a hypnogram annotation to a stage.
///
/// Accepts AASM names, R&K digits and the Sleep-EDF `Sleep stage X` form.
/// R&K stages 3 and 4 both become N3. Movement and unscored spans map to
/// `Ok(None)`; anything else is an error.
pub fn map_hypnogram_label(text: &str) -> Result<Option<StageLabel>> {
    let t = text.trim();
    let t = t.strip_prefix("Sleep stage ").unwrap_or(t);
    let upper = t.to_ascii_uppercase();
    let stage = match upper.as_str() {
        "W" | "WAKE" | "0" => Some(StageLabel::W),
        "1" | "N1" | "S1" => Some(StageLabel::N1),
        "2" | "N2" | "S2" => Some(StageLabel::N2),
        "3" | "4" | "N3" | "N4" | "S3" | "S4" => Some(StageLabel::N3),
        "R" | "REM" => Some(StageLabel::Rem),
        "MOVEMENT" | "MOVEMENT TIME" | "M" | "MT" | "?" | "UNKNOWN" | "UNSCORED" => None,
        _ => return Err(Error::UnknownLabel(text.to_string())),
    };
    Ok(stage)
}

/// One channel of a recording, in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalRecord {
    pub label: String,
    pub sample_rate_hz: f64,
    pub samples: Vec<f64>,
    pub physical_min: f64,
    pub physical_max: f64,
    pub digital_min: i32,
    pub digital_max: i32,
}

impl SignalRecord {
    /// Checks the header invariants (rate and ranges). Samples are not
    /// range-checked here; scaling from the digital range guarantees it.
    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz > 0.0) || !self.sample_rate_hz.is_finite() {
            return Err(Error::param(
                "sample_rate_hz",
                "must be positive and finite",
            ));
        }
        if !(self.physical_min < self.physical_max) {
            return Err(Error::param("physical_min", "must be below physical_max"));
        }
        if self.digital_min >= self.digital_max {
            return Err(Error::param("digital_min", "must be below digital_max"));
        }
        Ok(())
    }

    /// Gain and offset of the digital-to-physical affine map.
    pub fn scaling(&self) -> (f64, f64) {
        scaling(
            self.physical_min,
            self.physical_max,
            self.digital_min,
            self.digital_max,
        )
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }
}

/// `physical = digital * gain + offset`, with the endpoints of the digital
/// range mapping onto the endpoints of the physical range.
pub fn scaling(pmin: f64, pmax: f64, dmin: i32, dmax: i32) -> (f64, f64) {
    let gain = (pmax - pmin) / (dmax as f64 - dmin as f64);
    let offset = pmax - gain * dmax as f64;
    (gain, offset)
}

/// Number of samples in one epoch at `sample_rate_hz`.
pub fn epoch_len(sample_rate_hz: f64) -> usize {
    math::round(sample_rate_hz * EPOCH_SECONDS) as usize
}

/// A 30 s window of one EEG channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    pub subject_id: String,
    pub index: usize,
    pub samples: Vec<f64>,
    pub sample_rate_hz: f64,
    pub label: Option<StageLabel>,
}

impl Epoch {
    pub fn new(
        subject_id: impl Into<String>,
        index: usize,
        samples: Vec<f64>,
        sample_rate_hz: f64,
        label: Option<StageLabel>,
    ) -> Result<Self> {
        if !(sample_rate_hz > 0.0) {
            return Err(Error::param("sample_rate_hz", "must be positive"));
        }
        let expected = epoch_len(sample_rate_hz);
        if samples.len() != expected {
            return Err(Error::Shape(alloc::format!(
                "epoch has {} samples, expected {expected}",
                samples.len()
            )));
        }
        Ok(Epoch {
            subject_id: subject_id.into(),
            index,
            samples,
            sample_rate_hz,
            label,
        })
    }
}

/// A scored hypnogram span.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSpan {
    pub onset_s: f64,
    pub duration_s: f64,
    pub label: String,
}

impl LabelSpan {
    pub fn new(onset_s: f64, duration_s: f64, label: impl Into<String>) -> Self {
        LabelSpan {
            onset_s,
            duration_s,
            label: label.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SegmentWarning {
    /// Movement / unscored span skipped.
    UnscoredSpan { onset_s: f64, label: String },
    /// Window starting at `onset_s` runs past the end of the signal.
    PastEnd { onset_s: f64 },
}

#[derive(Debug, Clone, Default)]
pub struct Segmentation {
    pub epochs: Vec<Epoch>,
    pub warnings: Vec<SegmentWarning>,
}

/// Cut a record into labeled 30 s epochs.
///
/// Each 30 s window inside a scored span becomes one epoch whose index is
/// its window position in the record (`onset / 30`). Spans must not overlap
/// and scored spans must last a whole number of epochs.
pub fn segment(
    record: &SignalRecord,
    subject_id: &str,
    spans: &[LabelSpan],
) -> Result<Segmentation> {
    record.validate()?;
    let win = epoch_len(record.sample_rate_hz);
    let mut ordered: Vec<&LabelSpan> = spans.iter().collect();
    ordered.sort_by(|a, b| a.onset_s.total_cmp(&b.onset_s));
    for pair in ordered.windows(2) {
        if pair[0].onset_s + pair[0].duration_s > pair[1].onset_s + 1e-6 {
            return Err(Error::InvalidSpan(alloc::format!(
                "span at {} s overlaps span at {} s",
                pair[0].onset_s,
                pair[1].onset_s
            )));
        }
    }

    let mut out = Segmentation::default();
    for span in ordered {
        if !(span.onset_s >= 0.0) || !(span.duration_s >= 0.0) {
            return Err(Error::InvalidSpan(alloc::format!(
                "negative onset or duration at {} s",
                span.onset_s
            )));
        }
        let Some(stage) = map_hypnogram_label(&span.label)? else {
            out.warnings.push(SegmentWarning::UnscoredSpan {
                onset_s: span.onset_s,
                label: span.label.clone(),
            });
            continue;
        };
        let n_windows = span.duration_s / EPOCH_SECONDS;
        let onset_windows = span.onset_s / EPOCH_SECONDS;
        if (n_windows - math::round(n_windows)).abs() > 1e-6
            || (onset_windows - math::round(onset_windows)).abs() > 1e-6
        {
            return Err(Error::InvalidSpan(alloc::format!(
                "span at {} s with duration {} s is not aligned to 30 s epochs",
                span.onset_s,
                span.duration_s
            )));
        }
        let first = math::round(onset_windows) as usize;
        for w in first..first + math::round(n_windows) as usize {
            let start = w * win;
            let end = start + win;
            if end > record.samples.len() {
                out.warnings.push(SegmentWarning::PastEnd {
                    onset_s: w as f64 * EPOCH_SECONDS,
                });
                continue;
            }
            out.epochs.push(Epoch {
                subject_id: subject_id.to_string(),
                index: w,
                samples: record.samples[start..end].to_vec(),
                sample_rate_hz: record.sample_rate_hz,
                label: Some(stage),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn record(seconds: usize) -> SignalRecord {
        SignalRecord {
            label: "EEG Fpz-Cz".into(),
            sample_rate_hz: 100.0,
            samples: (0..seconds * 100).map(|i| i as f64).collect(),
            physical_min: -1e6,
            physical_max: 1e6,
            digital_min: -32768,
            digital_max: 32767,
        }
    }

    #[test]
    fn ninety_seconds_of_wake_gives_three_epochs() {
        let seg = segment(&record(90), "s1", &[LabelSpan::new(0.0, 90.0, "W")]).unwrap();
        assert_eq!(seg.epochs.len(), 3);
        assert!(seg.epochs.iter().all(|e| e.label == Some(StageLabel::W)));
        assert_eq!(seg.epochs[2].index, 2);
        assert_eq!(seg.epochs[1].samples[0], 3000.0);
        assert!(seg.warnings.is_empty());
    }

    #[test]
    fn rk_stage_four_is_n3() {
        let seg = segment(
            &record(120),
            "s1",
            &[
                LabelSpan::new(0.0, 60.0, "4"),
                LabelSpan::new(60.0, 60.0, "Sleep stage 3"),
            ],
        )
        .unwrap();
        assert_eq!(seg.epochs.len(), 4);
        assert!(seg.epochs.iter().all(|e| e.label == Some(StageLabel::N3)));
    }

    #[test]
    fn movement_span_is_dropped_with_warning() {
        let seg = segment(&record(60), "s1", &[LabelSpan::new(0.0, 60.0, "MOVEMENT")]).unwrap();
        assert!(seg.epochs.is_empty());
        assert_eq!(seg.warnings.len(), 1);
    }

    #[test]
    fn window_past_end_is_counted() {
        let seg = segment(&record(75), "s1", &[LabelSpan::new(0.0, 90.0, "N2")]).unwrap();
        assert_eq!(seg.epochs.len(), 2);
        assert_eq!(
            seg.warnings,
            vec![SegmentWarning::PastEnd { onset_s: 60.0 }]
        );
    }

    #[test]
    fn epoch_count_matches_labeled_seconds() {
        let spans = [
            LabelSpan::new(0.0, 300.0, "W"),
            LabelSpan::new(300.0, 30.0, "Movement time"),
            LabelSpan::new(330.0, 150.0, "REM"),
        ];
        let seg = segment(&record(480), "s1", &spans).unwrap();
        assert_eq!(seg.epochs.len(), (300 + 150) / 30);
    }

    #[test]
    fn overlapping_and_misaligned_spans_are_rejected() {
        let overlap = [
            LabelSpan::new(0.0, 60.0, "W"),
            LabelSpan::new(30.0, 30.0, "N1"),
        ];
        assert!(matches!(
            segment(&record(90), "s", &overlap),
            Err(Error::InvalidSpan(_))
        ));
        let odd = [LabelSpan::new(0.0, 45.0, "W")];
        assert!(matches!(
            segment(&record(90), "s", &odd),
            Err(Error::InvalidSpan(_))
        ));
        let unknown = [LabelSpan::new(0.0, 30.0, "deep")];
        assert!(matches!(
            segment(&record(90), "s", &unknown),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn stage_names_parse_exactly() {
        for s in StageLabel::ALL {
            assert_eq!(StageLabel::parse(s.name()).unwrap(), s);
        }
        assert!(StageLabel::parse("rem").is_err());
        assert!(StageLabel::parse("N4").is_err());
    }

    #[test]
    fn scaling_maps_range_endpoints() {
        let (g, o) = scaling(-3276.8, 3276.7, -32768, 32767);
        assert!((g * -32768.0 + o - -3276.8).abs() < 1e-9);
        assert!((g * 32767.0 + o - 3276.7).abs() < 1e-9);
    }
}
