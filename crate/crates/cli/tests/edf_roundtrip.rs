//! EDF encoding and decoding against each other.

use proptest::prelude::*;
use sleeptopo::edf::{quantize, read_edf, write_edf};
use sleeptopo_core::SignalRecord;

fn record(label: String, rate: f64, samples: Vec<f64>, pmin: f64, span: f64) -> SignalRecord {
    SignalRecord {
        label,
        sample_rate_hz: rate,
        samples,
        physical_min: pmin,
        physical_max: pmin + span,
        digital_min: -32768,
        digital_max: 32767,
    }
}

fn signal(records: usize, per_record: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, records * per_record)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn samples_survive_within_half_a_step(
        n_records in 0usize..4,
        per_record in 1usize..50,
        pmin in -500.0f64..0.0,
        span in 1.0f64..1000.0,
        unit in signal(3, 49),
        label in "[A-Za-z][A-Za-z0-9 -]{0,15}",
    ) {
        let samples: Vec<f64> = unit.iter().take(n_records * per_record).map(|u| pmin + u * span).collect();
        let rec = record(label.clone(), per_record as f64, samples, pmin, span);
        let bytes = write_edf(std::slice::from_ref(&rec), 1.0).unwrap();
        let back = read_edf(&bytes).unwrap();
        prop_assert_eq!(back.len(), 1);
        let got = &back[0];
        prop_assert_eq!(got.label.trim(), label.trim());
        prop_assert_eq!(got.sample_rate_hz, rec.sample_rate_hz);
        prop_assert_eq!(got.samples.len(), rec.samples.len());
        let (gain, _) = got.scaling();
        for (a, b) in got.samples.iter().zip(&rec.samples) {
            prop_assert!((a - b).abs() <= 0.5 * gain + 1e-9 * span, "{} vs {}", a, b);
        }
    }

    #[test]
    fn decoded_samples_encode_to_the_same_digits(unit in signal(2, 30)) {
        let rec = record("EEG".into(), 30.0, unit.iter().map(|u| 100.0 * u - 50.0).collect(), -50.0, 100.0);
        let once = read_edf(&write_edf(std::slice::from_ref(&rec), 1.0).unwrap()).unwrap();
        let twice = read_edf(&write_edf(&once, 1.0).unwrap()).unwrap();
        prop_assert_eq!(&once, &twice);
        for (a, b) in once[0].samples.iter().zip(&rec.samples) {
            prop_assert_eq!(quantize(*a, &once[0]), quantize(*b, &rec));
        }
    }
}

#[test]
fn several_channels_keep_their_order() {
    let a = record("EEG Fpz-Cz".into(), 4.0, vec![1.0; 8], -10.0, 20.0);
    let b = record("EEG Pz-Oz".into(), 2.0, vec![-2.0; 4], -10.0, 20.0);
    let back = read_edf(&write_edf(&[a, b], 2.0).unwrap()).unwrap();
    assert_eq!(back.len(), 2);
    assert_eq!(back[0].label, "EEG Fpz-Cz");
    assert_eq!(back[1].label, "EEG Pz-Oz");
    assert_eq!((back[0].samples.len(), back[1].samples.len()), (8, 4));
}
