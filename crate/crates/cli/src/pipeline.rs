//! The staged pipeline. Each stage reads its upstream artifacts, checks
//! their config hash, and skips outputs that are already fresh.
//!
//! Layout under the output directory:
//!
//! ```text
//! epochs.csv
//! features/{spectral,topological}.csv
//! persistence/index.csv, persistence/<subject>_e<epoch>.csv
//! selection/<set>_trace.csv, selection/<set>_kept.csv
//! embeddings/<set>_<method>.csv, embeddings/<set>_<method>.json
//! report.csv, report.txt
//! plots/*.svg, plots/kde_<set>_<method>.csv
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use rayon::prelude::*;
use serde_json::json;
use sha2::{Digest, Sha256};
use sleeptopo_core::dimred::{reduce, LowDimEmbedding, Method};
use sleeptopo_core::eval::{combine_subjects, evaluate, EvalReport, Protocol};
use sleeptopo_core::features::{extract, FEATURE_NAMES};
use sleeptopo_core::ingest::segment;
use sleeptopo_core::rng::derive_seed;
use sleeptopo_core::select::{cross_val_accuracy, rfecv_with, SelectionResult};
use sleeptopo_core::tda::{diagram_for_epoch, features_of_diagram, TOPO_FEATURE_NAMES};
use sleeptopo_core::viz::{diagram_svg, kde_grid, kde_svg, scatter_svg};
use sleeptopo_core::{Epoch, FeatureMatrix, StageLabel};

use crate::artifact;
use crate::config::{canonical, hash_parts, FeatureSet, GroupingChoice, PipelineConfig};
use crate::csvio;
use crate::edf::read_edf;
use crate::error::{CliError, Result};
use crate::parallel::RayonScorer;

const KDE_COLOR: &str = "#4363d8";
const POOLED: &str = "*";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Features,
    Persistence,
    Select,
    Reduce,
    Evaluate,
    Plot,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::Features,
        Stage::Persistence,
        Stage::Select,
        Stage::Reduce,
        Stage::Evaluate,
        Stage::Plot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Features => "features",
            Stage::Persistence => "persistence",
            Stage::Select => "select",
            Stage::Reduce => "reduce",
            Stage::Evaluate => "evaluate",
            Stage::Plot => "plot",
        }
    }
}

/// File-name form of a reducer.
pub fn method_slug(m: Method) -> &'static str {
    match m {
        Method::Pca => "pca",
        Method::Tsne => "tsne",
        Method::Umap => "umap",
    }
}

/// Rows evaluated (or selected) together: one subject, or everything.
struct Unit {
    name: String,
    rows: Vec<usize>,
}

fn units(x: &FeatureMatrix, grouping: GroupingChoice) -> Vec<Unit> {
    match grouping {
        GroupingChoice::Pooled => vec![Unit {
            name: POOLED.into(),
            rows: (0..x.n_rows()).collect(),
        }],
        GroupingChoice::PerSubject => x
            .subject_ids()
            .into_iter()
            .map(|s| Unit {
                rows: x.rows_of_subject(&s),
                name: s,
            })
            .collect(),
    }
}

fn digest(parts: &[(&str, Vec<u8>)]) -> String {
    let refs: Vec<(&str, &[u8])> = parts.iter().map(|(n, b)| (*n, b.as_slice())).collect();
    hash_parts(&refs)
}

fn file_sha(path: &Path) -> Result<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(Sha256::digest(&bytes).to_vec())
}

fn pct(v: f64) -> String {
    format!("{:.1}%", 100.0 * v)
}

/// One report row: a reducer (or none) on one feature set.
pub struct ReportRow {
    pub feature_set: FeatureSet,
    pub report: EvalReport,
}

impl ReportRow {
    /// Row name such as `t-SNE / combined`.
    pub fn tag(&self) -> String {
        format!(
            "{} / {}",
            self.report.method_name(),
            self.feature_set.name()
        )
    }
}

pub struct Pipeline {
    cfg: PipelineConfig,
    out: PathBuf,
    force: bool,
    pool: rayon::ThreadPool,
    ingest_hash: OnceLock<String>,
}

impl Pipeline {
    /// Validates the configuration; nothing is read or written yet.
    pub fn new(cfg: PipelineConfig, force: bool) -> Result<Self> {
        cfg.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| CliError::config("threads", e.to_string()))?;
        Ok(Pipeline {
            out: cfg.output_dir.clone(),
            cfg,
            force,
            pool,
            ingest_hash: OnceLock::new(),
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn output_dir(&self) -> &Path {
        &self.out
    }

    pub fn run(&self, stage: Stage) -> Result<()> {
        log::info!("stage {}", stage.name());
        self.pool.install(|| match stage {
            Stage::Ingest => self.ingest(),
            Stage::Features => self.features(),
            Stage::Persistence => self.persistence(),
            Stage::Select => self.select(),
            Stage::Reduce => self.reduce(),
            Stage::Evaluate => self.evaluate(),
            Stage::Plot => self.plot(),
        })
    }

    pub fn run_all(&self) -> Result<()> {
        Stage::ALL.iter().try_for_each(|s| self.run(*s))
    }

    fn seed(&self) -> Vec<u8> {
        self.cfg.seed.to_le_bytes().to_vec()
    }

    fn needs_spectral(&self) -> bool {
        self.cfg.features.sets.iter().any(|s| s.needs_spectral())
    }

    fn needs_topological(&self) -> bool {
        self.cfg.features.sets.iter().any(|s| s.needs_topological())
    }

    fn up_to_date(&self, outputs: &[(PathBuf, String)]) -> bool {
        let fresh = !self.force && outputs.iter().all(|(p, h)| artifact::is_fresh(p, h));
        if fresh {
            for (p, _) in outputs {
                log::info!("cached {}", p.display());
            }
        }
        fresh
    }

    fn write(&self, path: &Path, hash: &str, body: &str) -> Result<()> {
        artifact::write(path, hash, body)?;
        log::info!("wrote {}", path.display());
        Ok(())
    }

    // ---- paths

    pub fn epochs_path(&self) -> PathBuf {
        self.out.join("epochs.csv")
    }

    pub fn spectral_path(&self) -> PathBuf {
        self.out.join("features").join("spectral.csv")
    }

    pub fn topological_path(&self) -> PathBuf {
        self.out.join("features").join("topological.csv")
    }

    pub fn persistence_index_path(&self) -> PathBuf {
        self.out.join("persistence").join("index.csv")
    }

    pub fn trace_path(&self, set: FeatureSet) -> PathBuf {
        self.out
            .join("selection")
            .join(format!("{}_trace.csv", set.name()))
    }

    pub fn kept_path(&self, set: FeatureSet) -> PathBuf {
        self.out
            .join("selection")
            .join(format!("{}_kept.csv", set.name()))
    }

    pub fn embedding_path(&self, set: FeatureSet, m: Method) -> PathBuf {
        self.out
            .join("embeddings")
            .join(format!("{}_{}.csv", set.name(), method_slug(m)))
    }

    pub fn report_path(&self) -> PathBuf {
        self.out.join("report.csv")
    }

    fn plot_path(&self, name: String) -> PathBuf {
        self.out.join("plots").join(name)
    }

    // ---- hashes

    fn ingest_hash(&self) -> Result<String> {
        if let Some(h) = self.ingest_hash.get() {
            return Ok(h.clone());
        }
        let mut parts = vec![
            ("stage", b"ingest".to_vec()),
            ("channel", self.cfg.channel.as_bytes().to_vec()),
        ];
        for input in &self.cfg.inputs {
            parts.push(("subject", input.subject.as_bytes().to_vec()));
            for (name, path) in [
                ("edf", &input.edf),
                ("hypnogram", &input.hypnogram),
                ("epochs_csv", &input.epochs_csv),
            ] {
                if let Some(p) = path {
                    parts.push((name, file_sha(p)?));
                }
            }
            parts.push(("sample_rate_hz", canonical(&input.sample_rate_hz)));
        }
        let h = digest(&parts);
        Ok(self.ingest_hash.get_or_init(|| h).clone())
    }

    fn spectral_hash(&self) -> Result<String> {
        let f = &self.cfg.features;
        Ok(digest(&[
            ("stage", b"spectral".to_vec()),
            ("ingest", self.ingest_hash()?.into_bytes()),
            ("features", canonical(&(&f.window, f.petrosian_threshold))),
        ]))
    }

    fn tda_core(&self) -> Vec<u8> {
        let t = &self.cfg.tda;
        canonical(&(
            t.dim,
            t.delay,
            t.delay_max_lag,
            t.subsample,
            &t.max_eps,
            &t.essential,
        ))
    }

    fn topological_hash(&self) -> Result<String> {
        Ok(digest(&[
            ("stage", b"topological".to_vec()),
            ("ingest", self.ingest_hash()?.into_bytes()),
            ("tda", self.tda_core()),
            ("seed", self.seed()),
        ]))
    }

    fn persistence_hash(&self) -> Result<String> {
        Ok(digest(&[
            ("stage", b"persistence".to_vec()),
            ("ingest", self.ingest_hash()?.into_bytes()),
            ("tda", self.tda_core()),
            ("diagram_epochs", canonical(&self.cfg.tda.diagram_epochs)),
            ("seed", self.seed()),
        ]))
    }

    fn set_hash(&self, set: FeatureSet) -> Result<String> {
        let mut parts = vec![("set", set.name().as_bytes().to_vec())];
        if set.needs_spectral() {
            parts.push(("spectral", self.spectral_hash()?.into_bytes()));
        }
        if set.needs_topological() {
            parts.push(("topological", self.topological_hash()?.into_bytes()));
        }
        Ok(digest(&parts))
    }

    fn select_hash(&self, set: FeatureSet) -> Result<String> {
        Ok(digest(&[
            ("stage", b"select".to_vec()),
            ("set", self.set_hash(set)?.into_bytes()),
            ("select", canonical(&self.cfg.select)),
            ("seed", self.seed()),
        ]))
    }

    fn reducer_params(&self, m: Method) -> serde_json::Value {
        let r = &self.cfg.reduce;
        match m {
            Method::Pca => json!({ "n_components": r.n_components }),
            Method::Tsne => json!({ "n_components": r.n_components, "tsne": r.tsne }),
            Method::Umap => json!({ "n_components": r.n_components, "umap": r.umap }),
        }
    }

    fn embedding_hash(&self, set: FeatureSet, m: Method) -> Result<String> {
        Ok(digest(&[
            ("stage", b"reduce".to_vec()),
            ("select", self.select_hash(set)?.into_bytes()),
            ("method", method_slug(m).as_bytes().to_vec()),
            ("params", canonical(&self.reducer_params(m))),
            ("grouping", canonical(&self.cfg.evaluate.grouping)),
            ("seed", self.seed()),
        ]))
    }

    fn report_hash(&self) -> Result<String> {
        let mut parts = vec![
            ("stage", b"evaluate".to_vec()),
            ("evaluate", canonical(&self.cfg.evaluate)),
            ("methods", canonical(&self.cfg.reduce.methods)),
            ("seed", self.seed()),
        ];
        let transductive = self.cfg.protocol()? == Protocol::Transductive;
        for set in &self.cfg.features.sets {
            parts.push(("select", self.select_hash(*set)?.into_bytes()));
            for m in self.cfg.methods()? {
                if transductive {
                    parts.push(("embedding", self.embedding_hash(*set, m)?.into_bytes()));
                } else {
                    parts.push(("params", canonical(&self.reducer_params(m))));
                }
            }
        }
        Ok(digest(&parts))
    }

    fn plot_hash(&self, set: FeatureSet, m: Method, subject: &str) -> Result<String> {
        Ok(digest(&[
            ("stage", b"plot".to_vec()),
            ("embedding", self.embedding_hash(set, m)?.into_bytes()),
            ("plot", canonical(&self.cfg.plot.kde_grid)),
            ("subject", subject.as_bytes().to_vec()),
        ]))
    }

    fn diagram_plot_hash(&self) -> Result<String> {
        Ok(digest(&[
            ("stage", b"plot-diagram".to_vec()),
            ("persistence", self.persistence_hash()?.into_bytes()),
            ("display", canonical(&(self.cfg.tda.k0, self.cfg.tda.k1))),
        ]))
    }

    // ---- ingest

    fn load_inputs(&self) -> Result<Vec<Epoch>> {
        let mut all = Vec::new();
        for input in &self.cfg.inputs {
            let epochs = match (&input.edf, &input.hypnogram, &input.epochs_csv) {
                (Some(edf), Some(hyp), _) => {
                    let bytes = fs::read(edf).map_err(|e| CliError::io(edf, e))?;
                    let records = read_edf(&bytes).map_err(|e| CliError::input(edf, e))?;
                    let Some(record) = records.iter().find(|r| r.label.contains(&self.cfg.channel))
                    else {
                        let labels: Vec<&str> = records.iter().map(|r| r.label.as_str()).collect();
                        return Err(CliError::input(
                            edf,
                            format!(
                                "no channel matching `{}` (found: {})",
                                self.cfg.channel,
                                labels.join(", ")
                            ),
                        ));
                    };
                    let file = fs::File::open(hyp).map_err(|e| CliError::io(hyp, e))?;
                    let spans = csvio::read_hypnogram(file).map_err(|e| CliError::input(hyp, e))?;
                    let seg = segment(record, &input.subject, &spans)
                        .map_err(|e| CliError::input(hyp, e))?;
                    if !seg.warnings.is_empty() {
                        log::warn!(
                            "{}: {} hypnogram spans skipped or truncated",
                            input.subject,
                            seg.warnings.len()
                        );
                    }
                    seg.epochs
                }
                (_, _, Some(csv)) => {
                    let rate = input.sample_rate_hz.unwrap_or_default();
                    let file = fs::File::open(csv).map_err(|e| CliError::io(csv, e))?;
                    let epochs =
                        csvio::read_csv_epochs(file, rate).map_err(|e| CliError::input(csv, e))?;
                    if let Some(e) = epochs.iter().find(|e| e.subject_id != input.subject) {
                        return Err(CliError::input(
                            csv,
                            format!(
                                "epoch {} belongs to `{}`, not `{}`",
                                e.index, e.subject_id, input.subject
                            ),
                        ));
                    }
                    epochs
                }
                _ => return Err(CliError::config("inputs", "input without a source")),
            };
            log::info!("{}: {} epochs", input.subject, epochs.len());
            all.extend(epochs);
        }
        if all.is_empty() {
            return Err(CliError::config("inputs", "no epochs found in any input"));
        }
        if all
            .iter()
            .any(|e| e.sample_rate_hz != all[0].sample_rate_hz)
        {
            return Err(CliError::config(
                "inputs",
                "all inputs must share one sample rate",
            ));
        }
        Ok(all)
    }

    fn ingest(&self) -> Result<()> {
        let hash = self.ingest_hash()?;
        let path = self.epochs_path();
        if self.up_to_date(&[(path.clone(), hash.clone())]) {
            return Ok(());
        }
        let epochs = self.load_inputs()?;
        let body = format!(
            "# sample_rate_hz: {}\n{}",
            epochs[0].sample_rate_hz,
            csvio::write_csv_epochs(&epochs)
        );
        self.write(&path, &hash, &body)
    }

    pub fn load_epochs(&self) -> Result<Vec<Epoch>> {
        let path = self.epochs_path();
        let body = artifact::read(&path, &self.ingest_hash()?, "ingest")?;
        let rate = body
            .lines()
            .next()
            .and_then(|l| l.strip_prefix("# sample_rate_hz: "))
            .and_then(|v| v.trim().parse::<f64>().ok())
            .ok_or_else(|| CliError::input(&path, "missing sample rate line"))?;
        csvio::read_csv_epochs(body.as_bytes(), rate).map_err(|e| CliError::input(&path, e))
    }

    // ---- features

    fn tda_seed(&self, row: usize) -> u64 {
        derive_seed(self.cfg.seed, "tda", row as u64)
    }

    fn matrix(names: &[&str], epochs: &[Epoch], data: Vec<f64>) -> Result<FeatureMatrix> {
        FeatureMatrix::new(
            names.iter().map(|s| s.to_string()).collect(),
            data,
            epochs.iter().map(|e| e.label).collect(),
            epochs.iter().map(|e| e.subject_id.clone()).collect(),
            epochs.iter().map(|e| e.index).collect(),
        )
        .map_err(|e| CliError::core("building the feature table", e))
    }

    fn features(&self) -> Result<()> {
        let mut todo = Vec::new();
        if self.needs_spectral() {
            todo.push((self.spectral_path(), self.spectral_hash()?, true));
        }
        if self.needs_topological() {
            todo.push((self.topological_path(), self.topological_hash()?, false));
        }
        todo.retain(|(p, h, _)| !self.up_to_date(&[(p.clone(), h.clone())]));
        if todo.is_empty() {
            return Ok(());
        }
        let epochs = self.load_epochs()?;
        for (path, hash, spectral) in todo {
            let x = if spectral {
                let fc = self.cfg.feature_config()?;
                let rows = epochs
                    .par_iter()
                    .map(|e| {
                        extract(&e.samples, e.sample_rate_hz, &fc).map_err(|err| {
                            CliError::core(
                                format!("features of {} epoch {}", e.subject_id, e.index),
                                err,
                            )
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let degenerate = rows.iter().filter(|r| !r.degenerate.is_empty()).count();
                if degenerate > 0 {
                    log::warn!("{degenerate} epochs have degenerate spectral-temporal features");
                }
                Self::matrix(
                    &FEATURE_NAMES,
                    &epochs,
                    rows.iter().flat_map(|r| r.values).collect(),
                )?
            } else {
                let params = self.cfg.tda_params()?;
                let rows = epochs
                    .par_iter()
                    .enumerate()
                    .map(|(i, e)| {
                        diagram_for_epoch(&e.samples, &params, self.tda_seed(i))
                            .map(|d| features_of_diagram(&d))
                            .map_err(|err| {
                                CliError::core(
                                    format!("persistence of {} epoch {}", e.subject_id, e.index),
                                    err,
                                )
                            })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let degenerate = rows.iter().filter(|r| !r.degenerate.is_empty()).count();
                if degenerate > 0 {
                    log::warn!("{degenerate} epochs have degenerate persistence statistics");
                }
                Self::matrix(
                    &TOPO_FEATURE_NAMES,
                    &epochs,
                    rows.iter().flat_map(|r| r.values).collect(),
                )?
            };
            self.write(&path, &hash, &csvio::write_feature_matrix(&x))?;
        }
        Ok(())
    }

    fn load_block(&self, path: &Path, hash: &str) -> Result<FeatureMatrix> {
        let body = artifact::read(path, hash, "features")?;
        csvio::read_feature_matrix(body.as_bytes()).map_err(|e| CliError::input(path, e))
    }

    /// All rows of one feature set, spectral columns first.
    pub fn load_set(&self, set: FeatureSet) -> Result<FeatureMatrix> {
        let spectral = if set.needs_spectral() {
            Some(self.load_block(&self.spectral_path(), &self.spectral_hash()?)?)
        } else {
            None
        };
        let topo = if set.needs_topological() {
            Some(self.load_block(&self.topological_path(), &self.topological_hash()?)?)
        } else {
            None
        };
        match (spectral, topo) {
            (Some(a), Some(b)) => a
                .hconcat(&b)
                .map_err(|e| CliError::core("combined features", e)),
            (Some(a), None) | (None, Some(a)) => Ok(a),
            (None, None) => unreachable!("every set uses at least one block"),
        }
    }

    // ---- persistence

    fn diagram_path(&self, subject: &str, epoch: usize) -> PathBuf {
        self.out
            .join("persistence")
            .join(format!("{subject}_e{epoch}.csv"))
    }

    /// Rows whose diagrams are exported: the listed epoch indices, or the
    /// first epoch of each stage per subject.
    fn diagram_rows(&self, epochs: &[Epoch]) -> Vec<usize> {
        let mut rows = Vec::new();
        for input in &self.cfg.inputs {
            let mine: Vec<usize> = (0..epochs.len())
                .filter(|&i| epochs[i].subject_id == input.subject)
                .collect();
            match &self.cfg.tda.diagram_epochs {
                Some(list) => {
                    rows.extend(mine.iter().filter(|&&i| list.contains(&epochs[i].index)))
                }
                None => {
                    let mut firsts: Vec<usize> = StageLabel::ALL
                        .iter()
                        .filter_map(|s| mine.iter().copied().find(|&i| epochs[i].label == Some(*s)))
                        .collect();
                    firsts.sort_unstable();
                    rows.extend(firsts);
                }
            }
        }
        rows
    }

    fn persistence(&self) -> Result<()> {
        let hash = self.persistence_hash()?;
        let index = self.persistence_index_path();
        if !self.force && artifact::is_fresh(&index, &hash) {
            let body = artifact::read(&index, &hash, "persistence")?;
            let files: Vec<(PathBuf, String)> = body
                .lines()
                .skip(1)
                .filter_map(|l| l.rsplit(',').next())
                .map(|f| (self.out.join("persistence").join(f), hash.clone()))
                .collect();
            if self.up_to_date(&files) {
                return Ok(());
            }
        }
        let epochs = self.load_epochs()?;
        let params = self.cfg.tda_params()?;
        let rows = self.diagram_rows(&epochs);
        let diagrams = rows
            .par_iter()
            .map(|&i| {
                let e = &epochs[i];
                diagram_for_epoch(&e.samples, &params, self.tda_seed(i)).map_err(|err| {
                    CliError::core(
                        format!("persistence of {} epoch {}", e.subject_id, e.index),
                        err,
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut listing = String::from("subject_id,epoch,label,file\n");
        for (&i, d) in rows.iter().zip(&diagrams) {
            let e = &epochs[i];
            let path = self.diagram_path(&e.subject_id, e.index);
            self.write(&path, &hash, &csvio::write_diagram(d))?;
            let file = path
                .file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            let label = e.label.map_or("", StageLabel::name);
            let _ = writeln!(listing, "{},{},{},{}", e.subject_id, e.index, label, file);
        }
        self.write(&index, &hash, &listing)
    }

    // ---- select

    fn select(&self) -> Result<()> {
        for &set in &self.cfg.features.sets {
            let hash = self.select_hash(set)?;
            let (trace_path, kept_path) = (self.trace_path(set), self.kept_path(set));
            if self.up_to_date(&[
                (trace_path.clone(), hash.clone()),
                (kept_path.clone(), hash.clone()),
            ]) {
                continue;
            }
            let x = self.load_set(set)?.labelled();
            let mut trace = String::from("subject_id,step,removed,accuracy\n");
            let mut kept = String::from("subject_id,feature\n");
            for (ui, unit) in units(&x, self.cfg.select.grouping).iter().enumerate() {
                let xu = x.select_rows(&unit.rows);
                let seed = derive_seed(self.cfg.seed, "select", ui as u64);
                let result = self.select_unit(&xu, seed).map_err(|e| {
                    CliError::core(
                        format!(
                            "feature selection on {} features, unit `{}`",
                            set.name(),
                            unit.name
                        ),
                        e,
                    )
                })?;
                log::info!(
                    "{} / {}: kept {} of {} features, accuracy {:.4} -> {:.4}",
                    set.name(),
                    unit.name,
                    result.kept.len(),
                    xu.n_cols(),
                    result.baseline,
                    result.trace.last().map_or(result.baseline, |t| t.1)
                );
                let _ = writeln!(trace, "{},0,,{}", unit.name, result.baseline);
                for (k, (name, acc)) in result.trace.iter().enumerate() {
                    let _ = writeln!(trace, "{},{},{},{}", unit.name, k + 1, name, acc);
                }
                for name in &result.kept_names {
                    let _ = writeln!(kept, "{},{}", unit.name, name);
                }
            }
            self.write(&trace_path, &hash, &trace)?;
            self.write(&kept_path, &hash, &kept)?;
        }
        Ok(())
    }

    fn select_unit(&self, x: &FeatureMatrix, seed: u64) -> sleeptopo_core::Result<SelectionResult> {
        let params = self.cfg.rfecv_params(seed);
        if self.cfg.select.enabled {
            return rfecv_with(x, &params, &RayonScorer);
        }
        let all: Vec<usize> = (0..x.n_cols()).collect();
        Ok(SelectionResult {
            baseline: cross_val_accuracy(x, &all, params.k_folds, params.knn_k, seed)?,
            kept: all,
            kept_names: x.names.clone(),
            trace: Vec::new(),
        })
    }

    /// Kept feature names per selection unit.
    fn load_kept(&self, set: FeatureSet) -> Result<Vec<(String, Vec<String>)>> {
        let path = self.kept_path(set);
        let body = artifact::read(&path, &self.select_hash(set)?, "select")?;
        let mut out: Vec<(String, Vec<String>)> = Vec::new();
        for line in body.lines().skip(1) {
            let (unit, name) = line
                .split_once(',')
                .ok_or_else(|| CliError::input(&path, format!("malformed line `{line}`")))?;
            match out.last_mut() {
                Some((u, names)) if u == unit => names.push(name.to_string()),
                _ => out.push((unit.to_string(), vec![name.to_string()])),
            }
        }
        Ok(out)
    }

    /// Columns of `x` kept for `subject`.
    fn kept_columns(
        &self,
        set: FeatureSet,
        kept: &[(String, Vec<String>)],
        x: &FeatureMatrix,
        subject: &str,
    ) -> Result<Vec<usize>> {
        let names = kept
            .iter()
            .find(|(u, _)| u == subject || u == POOLED)
            .map(|(_, n)| n)
            .ok_or_else(|| {
                CliError::input(self.kept_path(set), format!("no selection for `{subject}`"))
            })?;
        names
            .iter()
            .map(|n| {
                x.column_index(n).ok_or_else(|| {
                    CliError::input(self.kept_path(set), format!("unknown feature `{n}`"))
                })
            })
            .collect()
    }

    // ---- reduce

    fn reduce(&self) -> Result<()> {
        let methods = self.cfg.methods()?;
        for &set in &self.cfg.features.sets {
            let todo: Vec<(Method, String)> = methods
                .iter()
                .map(|&m| Ok((m, self.embedding_hash(set, m)?)))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .filter(|(m, h)| {
                    let csv = self.embedding_path(set, *m);
                    !self.up_to_date(&[(csv.with_extension("json"), h.clone()), (csv, h.clone())])
                })
                .collect();
            if todo.is_empty() {
                continue;
            }
            let x = self.load_set(set)?;
            let kept = self.load_kept(set)?;
            let groups = units(&x, self.cfg.evaluate.grouping);
            let blocks = groups
                .iter()
                .map(|u| {
                    let subject = if u.name == POOLED { POOLED } else { &u.name };
                    let cols = self.kept_columns(set, &kept, &x, subject)?;
                    Ok(x.select_rows(&u.rows).select_columns(&cols))
                })
                .collect::<Result<Vec<_>>>()?;
            for (m, hash) in todo {
                self.reduce_one(set, m, &hash, &groups, &blocks)?;
            }
        }
        Ok(())
    }

    fn reduce_one(
        &self,
        set: FeatureSet,
        m: Method,
        hash: &str,
        groups: &[Unit],
        blocks: &[FeatureMatrix],
    ) -> Result<()> {
        let stage = format!("reduce/{}/{}", set.name(), method_slug(m));
        let embeddings = blocks
            .par_iter()
            .enumerate()
            .map(|(ui, xu)| {
                let reducer = self
                    .cfg
                    .reducer(m, derive_seed(self.cfg.seed, &stage, ui as u64));
                reduce(xu, &reducer).map_err(|e| {
                    CliError::core(
                        format!(
                            "{} on {} features, unit `{}`",
                            m.name(),
                            set.name(),
                            groups[ui].name
                        ),
                        e,
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut csv = String::new();
        let mut sidecar_units = Vec::new();
        for (ui, (emb, xu)) in embeddings.iter().zip(blocks).enumerate() {
            let text = csvio::write_embedding(emb, xu);
            let body = if ui == 0 {
                text.as_str()
            } else {
                text.split_once('\n').map_or("", |(_, b)| b)
            };
            csv.push_str(body);
            let diagnostics: serde_json::Map<String, serde_json::Value> = emb
                .diagnostics
                .iter()
                .map(|(k, v)| (k.to_string(), json!(v)))
                .collect();
            sidecar_units.push(json!({
                "unit": groups[ui].name,
                "seed": derive_seed(self.cfg.seed, &stage, ui as u64),
                "rows": xu.n_rows(),
                "features": xu.names,
                "diagnostics": diagnostics,
            }));
        }
        let path = self.embedding_path(set, m);
        let sidecar = json!({
            "config_hash": hash,
            "feature_set": set.name(),
            "method": m.name(),
            "params": self.reducer_params(m),
            "master_seed": self.cfg.seed,
            "units": sidecar_units,
        });
        let text =
            serde_json::to_string_pretty(&sidecar).map_err(|e| CliError::input(&path, e))? + "\n";
        self.write(&path, hash, &csv)?;
        self.write(&path.with_extension("json"), hash, &text)
    }

    fn load_embedding(&self, set: FeatureSet, m: Method) -> Result<FeatureMatrix> {
        let path = self.embedding_path(set, m);
        let body = artifact::read(&path, &self.embedding_hash(set, m)?, "reduce")?;
        csvio::read_embedding(body.as_bytes()).map_err(|e| CliError::input(&path, e))
    }

    // ---- evaluate

    fn combine(&self, reports: Vec<EvalReport>, names: Vec<String>) -> Result<EvalReport> {
        match self.cfg.evaluate.grouping {
            GroupingChoice::Pooled => Ok(reports.into_iter().next().expect("one pooled unit")),
            GroupingChoice::PerSubject => combine_subjects(&reports, names)
                .map_err(|e| CliError::core("combining subjects", e)),
        }
    }

    fn evaluate(&self) -> Result<()> {
        let hash = self.report_hash()?;
        let (csv_path, txt_path) = (self.report_path(), self.out.join("report.txt"));
        if self.up_to_date(&[
            (csv_path.clone(), hash.clone()),
            (txt_path.clone(), hash.clone()),
        ]) {
            return Ok(());
        }
        let rows = self.report_rows()?;
        self.write(&csv_path, &hash, &report_csv(&rows))?;
        self.write(&txt_path, &hash, &report_text(&rows, self.cfg.protocol()?))
    }

    /// Every configured report row: the unreduced selected features when
    /// `none` is listed, then each reducer, for each feature set.
    pub fn report_rows(&self) -> Result<Vec<ReportRow>> {
        let methods = self.cfg.methods()?;
        let protocol = self.cfg.protocol()?;
        let mut rows = Vec::new();
        for &set in &self.cfg.features.sets {
            let x = self.load_set(set)?.labelled();
            let kept = self.load_kept(set)?;
            let groups = units(&x, self.cfg.evaluate.grouping);
            let names: Vec<String> = groups.iter().map(|u| u.name.clone()).collect();
            let blocks = groups
                .iter()
                .map(|u| {
                    Ok(x.select_rows(&u.rows)
                        .select_columns(&self.kept_columns(set, &kept, &x, &u.name)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let params = |ui: usize| {
                self.cfg
                    .eval_params(derive_seed(self.cfg.seed, "evaluate", ui as u64))
            };
            let context = |what: &str, ui: usize| {
                format!(
                    "evaluating {what} on {} features, unit `{}`",
                    set.name(),
                    names[ui]
                )
            };

            if self.cfg.include_original() {
                let reports = blocks
                    .iter()
                    .enumerate()
                    .map(|(ui, xu)| {
                        evaluate(xu, None, &params(ui)?)
                            .map_err(|e| CliError::core(context("Original", ui), e))
                    })
                    .collect::<Result<Vec<_>>>()?;
                rows.push(ReportRow {
                    feature_set: set,
                    report: self.combine(reports, names.clone())?,
                });
            }
            for &m in &methods {
                let reports = match protocol {
                    Protocol::Transductive => {
                        let emb = self.load_embedding(set, m)?.labelled();
                        units(&emb, self.cfg.evaluate.grouping)
                            .iter()
                            .enumerate()
                            .map(|(ui, u)| {
                                let mut r = evaluate(&emb.select_rows(&u.rows), None, &params(ui)?)
                                    .map_err(|e| CliError::core(context(m.name(), ui), e))?;
                                r.method = Some(m);
                                Ok(r)
                            })
                            .collect::<Result<Vec<_>>>()?
                    }
                    Protocol::Inductive => blocks
                        .iter()
                        .enumerate()
                        .map(|(ui, xu)| {
                            let reducer = self.cfg.reducer(m, 0);
                            evaluate(xu, Some(&reducer), &params(ui)?)
                                .map_err(|e| CliError::core(context(m.name(), ui), e))
                        })
                        .collect::<Result<Vec<_>>>()?,
                };
                rows.push(ReportRow {
                    feature_set: set,
                    report: self.combine(reports, names.clone())?,
                });
            }
        }
        Ok(rows)
    }

    // ---- plot

    fn plot(&self) -> Result<()> {
        let subject = self
            .cfg
            .plot
            .subject
            .clone()
            .unwrap_or_else(|| self.cfg.inputs[0].subject.clone());
        if self.cfg.reduce.n_components != 2 {
            log::warn!("scatter and density plots need 2 components; skipped");
        } else {
            for &set in &self.cfg.features.sets {
                for m in self.cfg.methods()? {
                    self.plot_embedding(set, m, &subject)?;
                }
            }
        }
        self.plot_diagrams()
    }

    fn plot_embedding(&self, set: FeatureSet, m: Method, subject: &str) -> Result<()> {
        let hash = self.plot_hash(set, m, subject)?;
        let stem = format!("{}_{}", set.name(), method_slug(m));
        let scatter_path = self.plot_path(format!("scatter_{stem}.svg"));
        let kde_path = self.plot_path(format!("kde_{stem}.svg"));
        let grid_path = self.plot_path(format!("kde_{stem}.csv"));
        if self.up_to_date(&[
            (scatter_path.clone(), hash.clone()),
            (kde_path.clone(), hash.clone()),
            (grid_path.clone(), hash.clone()),
        ]) {
            return Ok(());
        }
        let all = self.load_embedding(set, m)?;
        let x = all.select_rows(&all.rows_of_subject(subject));
        if x.n_rows() == 0 {
            return Err(CliError::config(
                "plot.subject",
                format!("no embedded epochs for `{subject}`"),
            ));
        }
        let emb = LowDimEmbedding {
            coords: x.data.clone(),
            n_components: 2,
            method: m,
            reducer: self.cfg.reducer(m, 0),
            diagnostics: Vec::new(),
        };
        let title = format!("{} of {} features, {subject}", m.name(), set.name());
        let svg =
            scatter_svg(&emb, &x.labels, &title).map_err(|e| CliError::core("scatter plot", e))?;
        self.write(&scatter_path, &hash, &svg)?;
        match kde_grid(&x.data, self.cfg.plot.kde_grid) {
            Ok(grid) => {
                self.write(
                    &kde_path,
                    &hash,
                    &kde_svg(&grid, KDE_COLOR, &format!("Density, {title}")),
                )?;
                self.write(&grid_path, &hash, &csvio::write_kde(&grid))?;
            }
            Err(e) => log::warn!("density of {stem} skipped: {e}"),
        }
        Ok(())
    }

    fn plot_diagrams(&self) -> Result<()> {
        let pers = self.persistence_hash()?;
        let hash = self.diagram_plot_hash()?;
        let index_path = self.persistence_index_path();
        let index = artifact::read(&index_path, &pers, "persistence")?;
        for line in index.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            let [subject, epoch, label, file] = fields[..] else {
                return Err(CliError::input(
                    &index_path,
                    format!("malformed line `{line}`"),
                ));
            };
            let out = self.plot_path(format!("diagram_{}.svg", file.trim_end_matches(".csv")));
            if self.up_to_date(&[(out.clone(), hash.clone())]) {
                continue;
            }
            let path = self.out.join("persistence").join(file);
            let body = artifact::read(&path, &pers, "persistence")?;
            let diagram = csvio::read_diagram(&body).map_err(|e| CliError::input(&path, e))?;
            let stage = if label.is_empty() {
                String::new()
            } else {
                format!(" ({label})")
            };
            let title = format!("Persistence diagram, {subject} epoch {epoch}{stage}");
            self.write(
                &out,
                &hash,
                &diagram_svg(&diagram, self.cfg.tda.k0, self.cfg.tda.k1, &title),
            )?;
        }
        Ok(())
    }
}

/// Report rows in the column order ACC, MF1, kappa, per-class F1, then the
/// spreads.
pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(
        "method,feature_set,ACC,MF1,kappa,W,N1,N2,N3,REM,ACC_std,MF1_std,kappa_std,variance_source,units,excluded\n",
    );
    for row in rows {
        let r = &row.report;
        let _ = write!(
            out,
            "{},{},{},{},{}",
            r.method_name(),
            row.feature_set.name(),
            r.acc_mean,
            r.mf1,
            r.kappa
        );
        for f in r.per_class_f1 {
            let _ = write!(out, ",{f}");
        }
        let excluded: Vec<&str> = r.excluded.iter().map(|s| s.name()).collect();
        let n_units = r.subjects.len().max(1);
        let _ = writeln!(
            out,
            ",{},{},{},{},{},{}",
            r.acc_std,
            r.mf1_std,
            r.kappa_std,
            r.variance_source,
            n_units,
            excluded.join(";")
        );
    }
    out
}

pub fn report_text(rows: &[ReportRow], protocol: Protocol) -> String {
    let mut out = format!(
        "Evaluation ({} protocol)\n\n{:<26}{:>16}{:>16}{:>16}   F1 W / N1 / N2 / N3 / REM\n",
        match protocol {
            Protocol::Transductive => "transductive",
            Protocol::Inductive => "inductive",
        },
        "",
        "ACC",
        "MF1",
        "kappa"
    );
    for row in rows {
        let r = &row.report;
        let f1: Vec<String> = r.per_class_f1.iter().map(|f| pct(*f)).collect();
        let _ = writeln!(
            out,
            "{:<26}{:>16}{:>16}{:>16}   {}",
            row.tag(),
            format!("{} ± {}", pct(r.acc_mean), pct(r.acc_std)),
            format!("{} ± {}", pct(r.mf1), pct(r.mf1_std)),
            format!("{:.3} ± {:.3}", r.kappa, r.kappa_std),
            f1.join(" / ")
        );
    }
    out.push_str("\nSpreads run over ");
    out.push_str(rows.first().map_or("folds", |r| r.report.variance_source));
    out.push_str(".\n");
    for row in rows {
        let _ = writeln!(
            out,
            "\n{} confusion (rows true, columns predicted; W N1 N2 N3 REM)",
            row.tag()
        );
        for line in &row.report.confusion.counts {
            let cells: Vec<String> = line.iter().map(|c| format!("{c:>6}")).collect();
            let _ = writeln!(out, "{}", cells.join(""));
        }
        if !row.report.excluded.is_empty() {
            let names: Vec<&str> = row.report.excluded.iter().map(|s| s.name()).collect();
            let _ = writeln!(
                out,
                "absent classes excluded from MF1: {}",
                names.join(", ")
            );
        }
    }
    out
}
