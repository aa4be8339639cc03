//! Synthetic recordings on disk: one EDF and hypnogram CSV per subject,
//! plus a config that runs the whole pipeline on them.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use sleeptopo_core::rng::derive_seed;
use sleeptopo_core::synth::synthetic_night;

use crate::csvio::write_hypnogram;
use crate::edf::write_edf;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub subjects: usize,
    pub epochs: usize,
    pub sample_rate_hz: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            subjects: 2,
            epochs: 80,
            sample_rate_hz: 100.0,
            seed: 0,
        }
    }
}

fn put(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Write the dataset into `dir` and return the config path.
pub fn write_dataset(dir: &Path, spec: &SyntheticSpec) -> Result<PathBuf> {
    if spec.subjects == 0 || spec.epochs == 0 {
        return Err(CliError::config(
            "synth",
            "need at least one subject and one epoch",
        ));
    }
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut inputs = Vec::new();
    for k in 0..spec.subjects {
        let subject = format!("s{:02}", k + 1);
        let seed = derive_seed(spec.seed, "synthetic", k as u64);
        let (record, spans) = synthetic_night(spec.epochs, spec.sample_rate_hz, seed);
        let edf = write_edf(&[record], 30.0).map_err(|e| CliError::input(dir.join(&subject), e))?;
        let (edf_name, hyp_name) = (format!("{subject}.edf"), format!("{subject}_hypnogram.csv"));
        put(&dir.join(&edf_name), &edf)?;
        put(&dir.join(&hyp_name), write_hypnogram(&spans).as_bytes())?;
        inputs.push(json!({ "subject": subject, "edf": edf_name, "hypnogram": hyp_name }));
    }
    let config = json!({
        "inputs": inputs,
        "channel": "Fpz-Cz",
        "output_dir": "out",
        "seed": spec.seed,
    });
    let path = dir.join("config.json");
    let text = serde_json::to_string_pretty(&config).map_err(|e| CliError::input(&path, e))? + "\n";
    put(&path, text.as_bytes())?;
    Ok(path)
}
