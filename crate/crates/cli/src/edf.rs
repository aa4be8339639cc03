//! EDF reader and writer (plain EDF, 16-bit little-endian samples).
//!
//! The header follows the published EDF layout, including the 32-byte
//! reserved field at the end of every signal header, so real Sleep-EDF
//! files parse. Data start is taken from the header-bytes field.

use sleeptopo_core::ingest::scaling;
use sleeptopo_core::SignalRecord;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EdfError {
    #[error("truncated EDF at byte {offset}: need {needed} more bytes for {what}")]
    Truncated {
        offset: usize,
        needed: usize,
        what: &'static str,
    },
    #[error("EDF field `{field}` at byte {offset} is not a number: {text:?}")]
    BadNumber {
        field: &'static str,
        offset: usize,
        text: String,
    },
    #[error("EDF field `{field}` at byte {offset}: {reason}")]
    BadValue {
        field: &'static str,
        offset: usize,
        reason: String,
    },
}

const FIXED_HEADER: usize = 256;
const SIGNAL_HEADER: usize = 256;
/// Per-signal field widths, in header order.
const SIGNAL_FIELDS: [(&str, usize); 10] = [
    ("label", 16),
    ("transducer", 80),
    ("physical_dimension", 8),
    ("physical_min", 8),
    ("physical_max", 8),
    ("digital_min", 8),
    ("digital_max", 8),
    ("prefiltering", 80),
    ("samples_per_record", 8),
    ("reserved", 32),
];

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], EdfError> {
        if self.bytes.len() < self.pos + n {
            return Err(EdfError::Truncated {
                offset: self.pos,
                needed: self.pos + n - self.bytes.len(),
                what,
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn text(&mut self, n: usize, what: &'static str) -> Result<String, EdfError> {
        Ok(String::from_utf8_lossy(self.take(n, what)?)
            .trim()
            .to_string())
    }

    fn number<T: std::str::FromStr>(
        &mut self,
        n: usize,
        field: &'static str,
    ) -> Result<T, EdfError> {
        let offset = self.pos;
        let text = self.text(n, field)?;
        text.parse().map_err(|_| EdfError::BadNumber {
            field,
            offset,
            text,
        })
    }
}

/// One header field per signal, returned with the byte offset of each entry.
fn signal_field<T: std::str::FromStr>(
    c: &mut Cursor,
    ns: usize,
    width: usize,
    field: &'static str,
) -> Result<Vec<(T, usize)>, EdfError> {
    (0..ns)
        .map(|_| {
            let at = c.pos;
            c.number(width, field).map(|v| (v, at))
        })
        .collect()
}

/// Parse every signal of an EDF file, in header order.
pub fn read_edf(bytes: &[u8]) -> Result<Vec<SignalRecord>, EdfError> {
    let mut c = Cursor { bytes, pos: 0 };
    c.take(8, "version")?;
    c.take(80, "patient")?;
    c.take(80, "recording")?;
    c.take(8, "start date")?;
    c.take(8, "start time")?;
    let header_at = c.pos;
    let header_bytes: usize = c.number(8, "header_bytes")?;
    c.take(44, "reserved")?;
    let records_at = c.pos;
    let n_records: i64 = c.number(8, "n_records")?;
    let duration_at = c.pos;
    let duration: f64 = c.number(8, "record_duration")?;
    let ns_at = c.pos;
    let ns: usize = c.number(4, "n_signals")?;
    if ns == 0 {
        return Err(EdfError::BadValue {
            field: "n_signals",
            offset: ns_at,
            reason: "no signals".into(),
        });
    }
    if header_bytes != FIXED_HEADER + SIGNAL_HEADER * ns {
        return Err(EdfError::BadValue {
            field: "header_bytes",
            offset: header_at,
            reason: format!("{header_bytes} does not match {ns} signals"),
        });
    }
    if !(duration > 0.0) {
        return Err(EdfError::BadValue {
            field: "record_duration",
            offset: duration_at,
            reason: "must be positive".into(),
        });
    }

    let mut labels = Vec::with_capacity(ns);
    for _ in 0..ns {
        labels.push(c.text(SIGNAL_FIELDS[0].1, "label")?);
    }
    c.take(
        (SIGNAL_FIELDS[1].1 + SIGNAL_FIELDS[2].1) * ns,
        "transducer/dimension",
    )?;
    let pmin: Vec<(f64, usize)> = signal_field(&mut c, ns, 8, "physical_min")?;
    let pmax: Vec<(f64, usize)> = signal_field(&mut c, ns, 8, "physical_max")?;
    let dmin: Vec<(i32, usize)> = signal_field(&mut c, ns, 8, "digital_min")?;
    let dmax: Vec<(i32, usize)> = signal_field(&mut c, ns, 8, "digital_max")?;
    c.take(80 * ns, "prefiltering")?;
    let spr: Vec<(usize, usize)> = signal_field(&mut c, ns, 8, "samples_per_record")?;
    c.take(32 * ns, "reserved")?;

    for i in 0..ns {
        if dmin[i].0 >= dmax[i].0 {
            return Err(EdfError::BadValue {
                field: "digital_min",
                offset: dmin[i].1,
                reason: format!("digital range [{}, {}] is empty", dmin[i].0, dmax[i].0),
            });
        }
        if !(pmin[i].0 < pmax[i].0) {
            return Err(EdfError::BadValue {
                field: "physical_min",
                offset: pmin[i].1,
                reason: format!("physical range [{}, {}] is empty", pmin[i].0, pmax[i].0),
            });
        }
    }

    let per_record: usize = spr.iter().map(|s| s.0).sum();
    let n_records = if n_records < 0 {
        // unknown count: take every whole record present
        ((bytes.len() - c.pos) / (2 * per_record.max(1))) as i64
    } else {
        n_records
    };
    let n_records = usize::try_from(n_records).map_err(|_| EdfError::BadValue {
        field: "n_records",
        offset: records_at,
        reason: "negative".into(),
    })?;

    let gains: Vec<(f64, f64)> = (0..ns)
        .map(|i| scaling(pmin[i].0, pmax[i].0, dmin[i].0, dmax[i].0))
        .collect();
    let mut samples: Vec<Vec<f64>> = spr
        .iter()
        .map(|s| Vec::with_capacity(s.0 * n_records))
        .collect();
    for _ in 0..n_records {
        for i in 0..ns {
            let raw = c.take(2 * spr[i].0, "data record")?;
            let (gain, offset) = gains[i];
            for pair in raw.chunks_exact(2) {
                let d = i16::from_le_bytes([pair[0], pair[1]]) as i32;
                let d = d.clamp(dmin[i].0, dmax[i].0);
                samples[i].push(d as f64 * gain + offset);
            }
        }
    }

    Ok((0..ns)
        .map(|i| SignalRecord {
            label: labels[i].clone(),
            sample_rate_hz: spr[i].0 as f64 / duration,
            samples: std::mem::take(&mut samples[i]),
            physical_min: pmin[i].0,
            physical_max: pmax[i].0,
            digital_min: dmin[i].0,
            digital_max: dmax[i].0,
        })
        .collect())
}

/// Left-aligned, space-padded ASCII field of exactly `width` bytes.
fn field(out: &mut Vec<u8>, text: &str, width: usize) {
    let bytes = text.as_bytes();
    let n = bytes.len().min(width);
    out.extend_from_slice(&bytes[..n]);
    out.extend(std::iter::repeat_n(b' ', width - n));
}

/// Shortest decimal text of `v` that fits in 8 characters.
fn short_number(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= 8 {
        return plain;
    }
    (0..8)
        .rev()
        .map(|d| format!("{v:.d$}"))
        .find(|s| s.len() <= 8)
        .unwrap_or_else(|| format!("{v:.0}"))
}

/// Digital value whose physical value is nearest to `x`.
pub fn quantize(x: f64, record: &SignalRecord) -> i16 {
    let (gain, offset) = record.scaling();
    let d = ((x - offset) / gain).round();
    d.clamp(record.digital_min as f64, record.digital_max as f64) as i16
}

/// Encode signals as EDF with `record_duration` second data records. All
/// signals must cover the same whole number of records, and their digital
/// ranges must fit in 16 bits.
pub fn write_edf(records: &[SignalRecord], record_duration: f64) -> Result<Vec<u8>, EdfError> {
    let bad = |field: &'static str, reason: String| EdfError::BadValue {
        field,
        offset: 0,
        reason,
    };
    if records.is_empty() {
        return Err(bad("n_signals", "nothing to write".into()));
    }
    let mut spr = Vec::with_capacity(records.len());
    let mut n_records = None;
    for r in records {
        let per = r.sample_rate_hz * record_duration;
        if (per - per.round()).abs() > 1e-9 || per < 1.0 {
            return Err(bad(
                "samples_per_record",
                format!("{per} is not a whole count"),
            ));
        }
        let per = per.round() as usize;
        if r.samples.len() % per != 0 {
            return Err(bad(
                "n_records",
                format!("{} samples are not whole records", r.samples.len()),
            ));
        }
        let n = r.samples.len() / per;
        if *n_records.get_or_insert(n) != n {
            return Err(bad("n_records", "signals cover different durations".into()));
        }
        if r.digital_min < i16::MIN as i32
            || r.digital_max > i16::MAX as i32
            || r.digital_min >= r.digital_max
        {
            return Err(bad(
                "digital_min",
                "digital range must be a non-empty 16-bit range".into(),
            ));
        }
        spr.push(per);
    }
    // Samples are quantized against the physical range as stored, after
    // rounding to the 8-character header fields.
    let mut stored = Vec::with_capacity(records.len());
    for r in records {
        let (lo, hi) = (short_number(r.physical_min), short_number(r.physical_max));
        let (pmin, pmax) = (
            lo.parse::<f64>().unwrap_or(f64::NAN),
            hi.parse::<f64>().unwrap_or(f64::NAN),
        );
        if !(pmin < pmax) {
            return Err(bad(
                "physical_min",
                format!("range [{lo}, {hi}] is empty after rounding"),
            ));
        }
        stored.push((
            lo,
            hi,
            SignalRecord {
                label: String::new(),
                sample_rate_hz: r.sample_rate_hz,
                samples: Vec::new(),
                physical_min: pmin,
                physical_max: pmax,
                digital_min: r.digital_min,
                digital_max: r.digital_max,
            },
        ));
    }
    let ns = records.len();
    let n_records = n_records.unwrap_or(0);
    let mut out = Vec::new();
    field(&mut out, "0", 8);
    field(&mut out, "X X X X", 80);
    field(&mut out, "Startdate X X X X", 80);
    field(&mut out, "01.01.00", 8);
    field(&mut out, "00.00.00", 8);
    field(
        &mut out,
        &(FIXED_HEADER + SIGNAL_HEADER * ns).to_string(),
        8,
    );
    field(&mut out, "", 44);
    field(&mut out, &n_records.to_string(), 8);
    field(&mut out, &short_number(record_duration), 8);
    field(&mut out, &ns.to_string(), 4);
    for r in records {
        field(&mut out, &r.label, 16);
    }
    for _ in records {
        field(&mut out, "", 80);
    }
    for _ in records {
        field(&mut out, "uV", 8);
    }
    for (lo, _, _) in &stored {
        field(&mut out, lo, 8);
    }
    for (_, hi, _) in &stored {
        field(&mut out, hi, 8);
    }
    for r in records {
        field(&mut out, &r.digital_min.to_string(), 8);
    }
    for r in records {
        field(&mut out, &r.digital_max.to_string(), 8);
    }
    for _ in records {
        field(&mut out, "", 80);
    }
    for &s in &spr {
        field(&mut out, &s.to_string(), 8);
    }
    for _ in records {
        field(&mut out, "", 32);
    }
    for k in 0..n_records {
        for ((r, &s), (_, _, header)) in records.iter().zip(&spr).zip(&stored) {
            for &x in &r.samples[k * s..(k + 1) * s] {
                out.extend_from_slice(&quantize(x, header).to_le_bytes());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(samples: Vec<f64>) -> SignalRecord {
        SignalRecord {
            label: "EEG Fpz-Cz".into(),
            sample_rate_hz: 2.0,
            samples,
            physical_min: -3276.8,
            physical_max: 3276.7,
            digital_min: -32768,
            digital_max: 32767,
        }
    }

    #[test]
    fn zero_digital_value_scales_to_the_affine_map() {
        let bytes = write_edf(&[record(vec![0.0, 0.0])], 1.0).unwrap();
        let back = read_edf(&bytes).unwrap();
        // gain 0.1, offset 3276.7 - 0.1 * 32767 = 0
        assert!(back[0].samples[0].abs() < 1e-9);
        assert!((back[0].samples[0] - -0.05).abs() <= 0.05 + 1e-9);
        assert_eq!(back[0].sample_rate_hz, 2.0);
        assert_eq!(back[0].label, "EEG Fpz-Cz");
    }

    #[test]
    fn zero_records_give_empty_signals() {
        let bytes = write_edf(&[record(vec![])], 1.0).unwrap();
        let back = read_edf(&bytes).unwrap();
        assert!(back[0].samples.is_empty());
    }

    #[test]
    fn bad_header_length_is_named() {
        let mut bytes = write_edf(&[record(vec![1.0, 2.0])], 1.0).unwrap();
        bytes[184..192].copy_from_slice(b"abc     ");
        let err = read_edf(&bytes).unwrap_err();
        assert_eq!(
            err,
            EdfError::BadNumber {
                field: "header_bytes",
                offset: 184,
                text: "abc".into()
            }
        );
    }

    #[test]
    fn equal_digital_bounds_are_rejected() {
        let mut bytes = write_edf(&[record(vec![1.0, 2.0])], 1.0).unwrap();
        // digital_max of signal 0 sits after label, transducer, dimension, pmin, pmax, dmin
        let at = 256 + 16 + 80 + 8 + 8 + 8 + 8;
        bytes[at..at + 8].copy_from_slice(b"-32768  ");
        assert!(matches!(
            read_edf(&bytes),
            Err(EdfError::BadValue {
                field: "digital_min",
                ..
            })
        ));
    }

    #[test]
    fn truncation_reports_offset() {
        let bytes = write_edf(&[record(vec![1.0, 2.0, 3.0, 4.0])], 1.0).unwrap();
        let err = read_edf(&bytes[..bytes.len() - 1]).unwrap_err();
        assert!(
            matches!(err, EdfError::Truncated { offset: 516, .. }),
            "{err:?}"
        );
        assert!(matches!(
            read_edf(&bytes[..100]),
            Err(EdfError::Truncated { .. })
        ));
    }

    #[test]
    fn short_numbers_fit() {
        assert_eq!(short_number(-3276.8), "-3276.8");
        assert_eq!(short_number(30.0), "30");
        assert!(short_number(-123.456789).len() <= 8);
    }
}
