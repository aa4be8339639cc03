//! Pipeline configuration: a JSON tree with defaults for every field.
//! Unknown keys are rejected and every field is validated before any stage
//! runs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sleeptopo_core::dimred::{Method, Reducer, TsneConfig, UmapConfig};
use sleeptopo_core::eval::{EvalParams, Grouping, Protocol};
use sleeptopo_core::features::{FeatureConfig, PetrosianMode, Window};
use sleeptopo_core::select::RfecvParams;
use sleeptopo_core::tda::{Delay, EssentialPolicy, MaxEps, TdaParams};

use crate::error::{CliError, Result};

/// Which feature blocks feed selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSet {
    Spectral,
    Topological,
    Combined,
}

impl FeatureSet {
    pub fn name(self) -> &'static str {
        match self {
            FeatureSet::Spectral => "spectral",
            FeatureSet::Topological => "topological",
            FeatureSet::Combined => "combined",
        }
    }

    pub fn needs_spectral(self) -> bool {
        self != FeatureSet::Topological
    }

    pub fn needs_topological(self) -> bool {
        self != FeatureSet::Spectral
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupingChoice {
    Pooled,
    PerSubject,
}

impl GroupingChoice {
    pub fn core(self) -> Grouping {
        match self {
            GroupingChoice::Pooled => Grouping::Pooled,
            GroupingChoice::PerSubject => Grouping::PerSubject,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub subject: String,
    /// EDF recording; needs `hypnogram`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edf: Option<PathBuf>,
    /// CSV `onset,duration,label` sidecar for `edf`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypnogram: Option<PathBuf>,
    /// Pre-cut epochs in the CSV epoch format.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs_csv: Option<PathBuf>,
    /// Sample rate of `epochs_csv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_rate_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureSection {
    pub sets: Vec<FeatureSet>,
    /// `hann` or `raw` periodogram.
    pub window: String,
    /// Petrosian first-difference threshold; absent means sign changes.
    pub petrosian_threshold: Option<f64>,
}

impl Default for FeatureSection {
    fn default() -> Self {
        FeatureSection {
            sets: vec![
                FeatureSet::Spectral,
                FeatureSet::Topological,
                FeatureSet::Combined,
            ],
            window: "hann".into(),
            petrosian_threshold: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TdaSection {
    pub dim: usize,
    /// Fixed delay in samples; ignored when `delay_max_lag` is set.
    pub delay: usize,
    /// Use the first autocorrelation zero within this lag, else `delay`.
    pub delay_max_lag: Option<usize>,
    pub subsample: usize,
    /// `enclosing`, `full`, or a positive number.
    pub max_eps: serde_json::Value,
    /// `cap` or `drop`.
    pub essential: String,
    pub k0: usize,
    pub k1: usize,
    /// Epoch indices whose diagrams are exported; default one per stage.
    pub diagram_epochs: Option<Vec<usize>>,
}

impl Default for TdaSection {
    fn default() -> Self {
        let d = TdaParams::default();
        TdaSection {
            dim: d.dim,
            delay: 10,
            delay_max_lag: None,
            subsample: d.subsample,
            max_eps: serde_json::Value::String("enclosing".into()),
            essential: "cap".into(),
            k0: d.k0,
            k1: d.k1,
            diagram_epochs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectSection {
    pub enabled: bool,
    pub knn_k: usize,
    pub k_folds: usize,
    pub grouping: GroupingChoice,
    /// Start elimination from accuracy 0 instead of the full-set accuracy.
    pub strict_paper: bool,
}

impl Default for SelectSection {
    fn default() -> Self {
        SelectSection {
            enabled: true,
            knn_k: 5,
            k_folds: 5,
            grouping: GroupingChoice::Pooled,
            strict_paper: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TsneSection {
    pub perplexity: f64,
    pub n_iter: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
}

impl Default for TsneSection {
    fn default() -> Self {
        let d = TsneConfig::default();
        TsneSection {
            perplexity: d.perplexity,
            n_iter: d.n_iter,
            learning_rate: d.learning_rate,
            early_exaggeration: d.early_exaggeration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UmapSection {
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub spread: f64,
    pub n_iter: usize,
    pub learning_rate: f64,
    pub negative_samples: usize,
    pub symmetrize: bool,
}

impl Default for UmapSection {
    fn default() -> Self {
        let d = UmapConfig::default();
        UmapSection {
            n_neighbors: d.n_neighbors,
            min_dist: d.min_dist,
            spread: d.spread,
            n_iter: d.n_iter,
            learning_rate: d.learning_rate,
            negative_samples: d.negative_samples,
            symmetrize: d.symmetrize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReduceSection {
    /// Any of `none` (the selected features as they are), `pca`, `tsne`,
    /// `umap`.
    pub methods: Vec<String>,
    pub n_components: usize,
    pub tsne: TsneSection,
    pub umap: UmapSection,
}

impl Default for ReduceSection {
    fn default() -> Self {
        ReduceSection {
            methods: vec!["none".into(), "pca".into(), "tsne".into(), "umap".into()],
            n_components: 2,
            tsne: TsneSection::default(),
            umap: UmapSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluateSection {
    pub knn_k: usize,
    pub k_folds: usize,
    pub grouping: GroupingChoice,
    /// `transductive` or `inductive` (PCA only).
    pub protocol: String,
}

impl Default for EvaluateSection {
    fn default() -> Self {
        EvaluateSection {
            knn_k: 5,
            k_folds: 5,
            grouping: GroupingChoice::PerSubject,
            protocol: "transductive".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlotSection {
    pub kde_grid: usize,
    /// Subject whose embedding is plotted; default the first one.
    pub subject: Option<String>,
}

impl Default for PlotSection {
    fn default() -> Self {
        PlotSection {
            kde_grid: 80,
            subject: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub inputs: Vec<InputSpec>,
    /// Substring of the EDF channel label to use.
    pub channel: String,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    pub threads: usize,
    pub features: FeatureSection,
    pub tda: TdaSection,
    pub select: SelectSection,
    pub reduce: ReduceSection,
    pub evaluate: EvaluateSection,
    pub plot: PlotSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            inputs: Vec::new(),
            channel: "Fpz-Cz".into(),
            output_dir: PathBuf::from("out"),
            seed: 0,
            threads: 0,
            features: FeatureSection::default(),
            tda: TdaSection::default(),
            select: SelectSection::default(),
            reduce: ReduceSection::default(),
            evaluate: EvaluateSection::default(),
            plot: PlotSection::default(),
        }
    }
}

fn check(ok: bool, field: &str, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::config(field, reason))
    }
}

impl PipelineConfig {
    /// Parse a config file; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let field = msg
                .split('`')
                .nth(1)
                .map(String::from)
                .unwrap_or_else(|| format!("line {}", e.line()));
            CliError::config(field, msg)
        })
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for i in &mut self.inputs {
            i.edf.as_mut().map(fix);
            i.hypnogram.as_mut().map(fix);
            i.epochs_csv.as_mut().map(fix);
        }
        fix(&mut self.output_dir);
    }

    pub fn validate(&self) -> Result<()> {
        check(
            !self.inputs.is_empty(),
            "inputs",
            "at least one input is required",
        )?;
        let mut seen = std::collections::BTreeSet::new();
        for (k, i) in self.inputs.iter().enumerate() {
            let f = |name: &str| format!("inputs[{k}].{name}");
            check(
                !i.subject.is_empty() && !i.subject.contains([',', '/', '\\']),
                &f("subject"),
                "must be a plain non-empty name",
            )?;
            check(seen.insert(&i.subject), &f("subject"), "duplicate subject")?;
            match (&i.edf, &i.hypnogram, &i.epochs_csv) {
                (Some(_), Some(_), None) => check(
                    i.sample_rate_hz.is_none(),
                    &f("sample_rate_hz"),
                    "only used with epochs_csv",
                )?,
                (None, None, Some(_)) => check(
                    i.sample_rate_hz.is_some_and(|r| r > 0.0 && r.is_finite()),
                    &f("sample_rate_hz"),
                    "epochs_csv needs a positive sample rate",
                )?,
                _ => {
                    return Err(CliError::config(
                        f("edf"),
                        "give either edf + hypnogram or epochs_csv",
                    ))
                }
            }
        }
        check(!self.channel.is_empty(), "channel", "must not be empty")?;
        check(
            !self.features.sets.is_empty(),
            "features.sets",
            "at least one feature set",
        )?;
        let mut sets = self.features.sets.clone();
        sets.sort();
        sets.dedup();
        check(
            sets.len() == self.features.sets.len(),
            "features.sets",
            "duplicate feature set",
        )?;
        self.feature_config()?;
        self.tda_params()?;
        check(
            self.tda.k0 > 0 && self.tda.k1 > 0,
            "tda.k0",
            "display sizes must be positive",
        )?;
        check(self.select.knn_k >= 1, "select.knn_k", "must be at least 1")?;
        check(
            self.select.k_folds >= 2,
            "select.k_folds",
            "must be at least 2",
        )?;
        check(
            self.evaluate.knn_k >= 1,
            "evaluate.knn_k",
            "must be at least 1",
        )?;
        check(
            self.evaluate.k_folds >= 2,
            "evaluate.k_folds",
            "must be at least 2",
        )?;
        check(
            !(self.select.grouping == GroupingChoice::PerSubject
                && self.evaluate.grouping == GroupingChoice::Pooled),
            "select.grouping",
            "per-subject selection needs per-subject evaluation",
        )?;
        let methods = self.methods()?;
        check(
            !self.reduce.methods.is_empty(),
            "reduce.methods",
            "at least one method",
        )?;
        let protocol = self.protocol()?;
        check(
            protocol == Protocol::Transductive || methods.iter().all(|m| *m == Method::Pca),
            "evaluate.protocol",
            "inductive evaluation only supports pca",
        )?;
        check(
            self.reduce.n_components >= 1,
            "reduce.n_components",
            "must be at least 1",
        )?;
        for m in &methods {
            validate_reducer(&self.reducer(*m, 0))?;
        }
        check(
            self.plot.kde_grid >= 2,
            "plot.kde_grid",
            "must be at least 2",
        )?;
        if let Some(s) = &self.plot.subject {
            check(
                self.inputs.iter().any(|i| &i.subject == s),
                "plot.subject",
                "not one of the inputs",
            )?;
        }
        Ok(())
    }

    pub fn feature_config(&self) -> Result<FeatureConfig> {
        let window = match self.features.window.as_str() {
            "hann" => Window::Hann,
            "raw" => Window::Raw,
            _ => {
                return Err(CliError::config(
                    "features.window",
                    "expected `hann` or `raw`",
                ))
            }
        };
        let petrosian = match self.features.petrosian_threshold {
            None => PetrosianMode::SignChange,
            Some(d) if d >= 0.0 && d.is_finite() => PetrosianMode::Threshold(d),
            Some(_) => {
                return Err(CliError::config(
                    "features.petrosian_threshold",
                    "must be non-negative",
                ))
            }
        };
        Ok(FeatureConfig { window, petrosian })
    }

    pub fn tda_params(&self) -> Result<TdaParams> {
        let t = &self.tda;
        check(t.dim >= 1, "tda.dim", "must be at least 1")?;
        check(t.delay >= 1, "tda.delay", "must be at least 1")?;
        check(t.subsample >= 2, "tda.subsample", "must be at least 2")?;
        let max_eps = match &t.max_eps {
            serde_json::Value::String(s) if s == "enclosing" => MaxEps::EnclosingRadius,
            serde_json::Value::String(s) if s == "full" => MaxEps::Full,
            serde_json::Value::Number(n) => match n.as_f64() {
                Some(v) if v > 0.0 => MaxEps::Fixed(v),
                _ => return Err(CliError::config("tda.max_eps", "must be positive")),
            },
            _ => {
                return Err(CliError::config(
                    "tda.max_eps",
                    "expected `enclosing`, `full` or a number",
                ))
            }
        };
        let essential = match t.essential.as_str() {
            "cap" => EssentialPolicy::Cap,
            "drop" => EssentialPolicy::Drop,
            _ => {
                return Err(CliError::config(
                    "tda.essential",
                    "expected `cap` or `drop`",
                ))
            }
        };
        let delay = match t.delay_max_lag {
            Some(max_lag) => Delay::AutocorrZero {
                max_lag,
                fallback: t.delay,
            },
            None => Delay::Fixed(t.delay),
        };
        Ok(TdaParams {
            dim: t.dim,
            delay,
            subsample: t.subsample,
            max_eps,
            essential,
            k0: t.k0,
            k1: t.k1,
        })
    }

    pub fn rfecv_params(&self, seed: u64) -> RfecvParams {
        RfecvParams {
            knn_k: self.select.knn_k,
            k_folds: self.select.k_folds,
            seed,
            strict_paper: self.select.strict_paper,
        }
    }

    /// Reducers to run, without `none`.
    pub fn methods(&self) -> Result<Vec<Method>> {
        let mut out = Vec::new();
        let mut none = 0;
        for m in &self.reduce.methods {
            if m == "none" {
                none += 1;
                check(none == 1, "reduce.methods", "duplicate method")?;
                continue;
            }
            let method = Method::parse(m).ok_or_else(|| {
                CliError::config("reduce.methods", format!("unknown method `{m}`"))
            })?;
            check(!out.contains(&method), "reduce.methods", "duplicate method")?;
            out.push(method);
        }
        Ok(out)
    }

    /// Whether the unreduced selected features are evaluated too.
    pub fn include_original(&self) -> bool {
        self.reduce.methods.iter().any(|m| m == "none")
    }

    pub fn protocol(&self) -> Result<Protocol> {
        match self.evaluate.protocol.as_str() {
            "transductive" => Ok(Protocol::Transductive),
            "inductive" => Ok(Protocol::Inductive),
            _ => Err(CliError::config(
                "evaluate.protocol",
                "expected `transductive` or `inductive`",
            )),
        }
    }

    pub fn reducer(&self, method: Method, seed: u64) -> Reducer {
        let c = self.reduce.n_components;
        match method {
            Method::Pca => Reducer::Pca { n_components: c },
            Method::Tsne => {
                let t = &self.reduce.tsne;
                Reducer::Tsne(TsneConfig {
                    n_components: c,
                    perplexity: t.perplexity,
                    n_iter: t.n_iter,
                    learning_rate: t.learning_rate,
                    early_exaggeration: t.early_exaggeration,
                    seed,
                    ..TsneConfig::default()
                })
            }
            Method::Umap => {
                let u = &self.reduce.umap;
                Reducer::Umap(UmapConfig {
                    n_components: c,
                    n_neighbors: u.n_neighbors,
                    min_dist: u.min_dist,
                    spread: u.spread,
                    n_iter: u.n_iter,
                    learning_rate: u.learning_rate,
                    negative_samples: u.negative_samples,
                    symmetrize: u.symmetrize,
                    seed,
                })
            }
        }
    }

    pub fn eval_params(&self, seed: u64) -> Result<EvalParams> {
        Ok(EvalParams {
            knn_k: self.evaluate.knn_k,
            k_folds: self.evaluate.k_folds,
            seed,
            protocol: self.protocol()?,
        })
    }
}

fn validate_reducer(r: &Reducer) -> Result<()> {
    match r {
        Reducer::Pca { .. } => Ok(()),
        Reducer::Tsne(t) => {
            check(
                t.perplexity > 0.0,
                "reduce.tsne.perplexity",
                "must be positive",
            )?;
            check(t.n_iter >= 1, "reduce.tsne.n_iter", "must be at least 1")?;
            check(
                t.learning_rate > 0.0,
                "reduce.tsne.learning_rate",
                "must be positive",
            )?;
            check(
                t.early_exaggeration >= 1.0,
                "reduce.tsne.early_exaggeration",
                "must be at least 1",
            )
        }
        Reducer::Umap(u) => {
            check(
                u.n_neighbors >= 2,
                "reduce.umap.n_neighbors",
                "must be at least 2",
            )?;
            check(u.spread > 0.0, "reduce.umap.spread", "must be positive")?;
            check(
                u.min_dist >= 0.0 && u.min_dist <= u.spread,
                "reduce.umap.min_dist",
                "must be in [0, spread]",
            )?;
            check(u.n_iter >= 1, "reduce.umap.n_iter", "must be at least 1")?;
            check(
                u.learning_rate > 0.0,
                "reduce.umap.learning_rate",
                "must be positive",
            )
        }
    }
}

/// Hex SHA-256 over labelled parts, each length-prefixed so that part
/// boundaries cannot shift.
pub fn hash_parts(parts: &[(&str, &[u8])]) -> String {
    let mut h = Sha256::new();
    for (name, bytes) in parts {
        h.update((name.len() as u64).to_le_bytes());
        h.update(name.as_bytes());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    hex::encode(h.finalize())
}

/// Canonical JSON bytes of any config fragment.
pub fn canonical<T: Serialize>(value: &T) -> Vec<u8> {
    serde_json::to_vec(value).expect("config fragments serialize")
}
