//! Command-line interface. Flags override the matching config fields.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{GroupingChoice, PipelineConfig};
use crate::error::{CliError, Result};
use crate::pipeline::{Pipeline, Stage};
use crate::synthetic::{write_dataset, SyntheticSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupingArg {
    Pooled,
    PerSubject,
}

impl From<GroupingArg> for GroupingChoice {
    fn from(g: GroupingArg) -> Self {
        match g {
            GroupingArg::Pooled => GroupingChoice::Pooled,
            GroupingArg::PerSubject => GroupingChoice::PerSubject,
        }
    }
}

/// Sleep staging from spectral-temporal and persistent-homology features.
///
/// Exit codes: 0 success, 1 configuration or input error, 2 missing or
/// stale upstream artifact, 3 numerical failure.
#[derive(Debug, Parser)]
#[command(name = "sleeptopo", version, about, long_about)]
pub struct Cli {
    /// Pipeline config (JSON).
    #[arg(short, long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output_dir`.
    #[arg(short, long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed; overrides `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores); overrides `threads`.
    #[arg(short = 'j', long, global = true)]
    pub threads: Option<usize>,
    /// EEG channel label substring; overrides `channel`.
    #[arg(long, global = true)]
    pub channel: Option<String>,
    /// Feature selection over all epochs or per subject.
    #[arg(long, global = true, value_enum)]
    pub select_grouping: Option<GroupingArg>,
    /// Evaluation per subject or over all epochs.
    #[arg(long, global = true, value_enum)]
    pub eval_grouping: Option<GroupingArg>,
    /// Recompute outputs even when their config hash matches.
    #[arg(long, global = true)]
    pub force: bool,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read EDF + hypnogram or CSV epochs into epochs.csv.
    Ingest,
    /// Spectral-temporal and topological feature tables.
    Features,
    /// Persistence diagrams of selected epochs.
    Persistence,
    /// Recursive feature elimination with cross-validated KNN.
    Select,
    /// Two-dimensional embeddings of the selected features.
    Reduce,
    /// KNN cross-validation report (ACC, MF1, kappa, per-class F1).
    Evaluate,
    /// Scatter, density and persistence diagram SVGs.
    Plot,
    /// Every stage in order.
    RunAll,
    /// Write a synthetic dataset and a config that runs on it.
    Synth {
        /// Target directory.
        dir: PathBuf,
        #[arg(long, default_value_t = 2)]
        subjects: usize,
        #[arg(long, default_value_t = 80)]
        epochs: usize,
        #[arg(long, default_value_t = 100.0)]
        sample_rate: f64,
    },
}

impl Cli {
    /// The config file with every flag override applied.
    pub fn load_config(&self) -> Result<PipelineConfig> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| CliError::config("config", "--config <FILE> is required"))?;
        let mut cfg = PipelineConfig::load(path)?;
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(t) = self.threads {
            cfg.threads = t;
        }
        if let Some(c) = &self.channel {
            cfg.channel = c.clone();
        }
        if let Some(g) = self.select_grouping {
            cfg.select.grouping = g.into();
        }
        if let Some(g) = self.eval_grouping {
            cfg.evaluate.grouping = g.into();
        }
        Ok(cfg)
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let stage = match &cli.command {
        Command::Synth {
            dir,
            subjects,
            epochs,
            sample_rate,
        } => {
            let spec = SyntheticSpec {
                subjects: *subjects,
                epochs: *epochs,
                sample_rate_hz: *sample_rate,
                seed: cli.seed.unwrap_or(0),
            };
            let config = write_dataset(dir, &spec)?;
            println!("{}", config.display());
            return Ok(());
        }
        Command::RunAll => None,
        Command::Ingest => Some(Stage::Ingest),
        Command::Features => Some(Stage::Features),
        Command::Persistence => Some(Stage::Persistence),
        Command::Select => Some(Stage::Select),
        Command::Reduce => Some(Stage::Reduce),
        Command::Evaluate => Some(Stage::Evaluate),
        Command::Plot => Some(Stage::Plot),
    };
    let pipeline = Pipeline::new(cli.load_config()?, cli.force)?;
    match stage {
        Some(s) => pipeline.run(s),
        None => pipeline.run_all(),
    }
}
