//! Confusion matrices, ACC / macro-F1 / Cohen's kappa, and the
//! cross-validated KNN evaluation of an embedding.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dimred::{reduce, Method, Pca, Reducer};
use crate::error::{Error, Result};
use crate::ingest::StageLabel;
use crate::math;
use crate::matrix::FeatureMatrix;
use crate::select::cv::{stratified_folds, CvContext};
use crate::select::knn::{nearest, vote, Standardizer};

const K: usize = StageLabel::COUNT;

/// Rows are true stages, columns predicted stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub counts: [[u64; K]; K],
}

impl ConfusionMatrix {
    pub fn from_pairs(truth: &[usize], pred: &[usize]) -> Self {
        let mut cm = ConfusionMatrix::default();
        for (&t, &p) in truth.iter().zip(pred) {
            cm.counts[t][p] += 1;
        }
        cm
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for i in 0..K {
            for j in 0..K {
                self.counts[i][j] += other.counts[i][j];
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub acc: f64,
    pub mf1: f64,
    pub kappa: f64,
    pub per_class_f1: [f64; K],
    /// Classes neither present nor predicted; left out of the macro mean.
    pub excluded: Vec<StageLabel>,
}

/// Accuracy, per-class F1, macro-F1 over the classes that occur in truth or
/// prediction, and Cohen's kappa. Perfect agreement on a single class has
/// chance agreement 1; kappa is reported as 1 there.
pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::param("confusion matrix", "no evaluated epochs"));
    }
    let n = total as f64;
    let row: Vec<f64> = (0..K)
        .map(|i| cm.counts[i].iter().sum::<u64>() as f64)
        .collect();
    let col: Vec<f64> = (0..K)
        .map(|j| (0..K).map(|i| cm.counts[i][j]).sum::<u64>() as f64)
        .collect();
    let trace: f64 = (0..K).map(|i| cm.counts[i][i] as f64).sum();
    let mut per_class_f1 = [0.0; K];
    let mut excluded = Vec::new();
    let mut sum_f1 = 0.0;
    let mut used = 0;
    for c in 0..K {
        let tp = cm.counts[c][c] as f64;
        let precision = if col[c] > 0.0 { tp / col[c] } else { 0.0 };
        let recall = if row[c] > 0.0 { tp / row[c] } else { 0.0 };
        per_class_f1[c] = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        if row[c] == 0.0 && col[c] == 0.0 {
            excluded.push(StageLabel::ALL[c]);
        } else {
            sum_f1 += per_class_f1[c];
            used += 1;
        }
    }
    let p_o = trace / n;
    let p_e: f64 = (0..K).map(|c| row[c] * col[c]).sum::<f64>() / (n * n);
    let kappa = if p_e >= 1.0 {
        1.0
    } else {
        (p_o - p_e) / (1.0 - p_e)
    };
    Ok(Metrics {
        acc: p_o,
        mf1: sum_f1 / used as f64,
        kappa,
        per_class_f1,
        excluded,
    })
}

/// How the reducer sees the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Protocol {
    /// Fit the embedding on all rows, then cross-validate only the classifier.
    #[default]
    Transductive,
    /// Fit the embedding on each fold's training rows (PCA only).
    Inductive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Grouping {
    #[default]
    PerSubject,
    Pooled,
}

impl Grouping {
    pub fn name(self) -> &'static str {
        match self {
            Grouping::PerSubject => "subjects",
            Grouping::Pooled => "folds",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalParams {
    pub knn_k: usize,
    pub k_folds: usize,
    pub seed: u64,
    pub protocol: Protocol,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            knn_k: 5,
            k_folds: 5,
            seed: 0,
            protocol: Protocol::Transductive,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// `None` means the features went straight into the classifier.
    pub method: Option<Method>,
    pub acc_mean: f64,
    pub acc_std: f64,
    pub mf1: f64,
    pub mf1_std: f64,
    pub kappa: f64,
    pub kappa_std: f64,
    pub per_class_f1: [f64; K],
    /// `folds` or `subjects`: what the standard deviations run over.
    pub variance_source: &'static str,
    pub confusion: ConfusionMatrix,
    pub excluded: Vec<StageLabel>,
    /// Per-unit accuracy (fold or subject), in order.
    pub unit_accuracy: Vec<f64>,
    /// Subjects evaluated, in order (empty for pooled runs).
    pub subjects: Vec<String>,
}

impl EvalReport {
    pub fn method_name(&self) -> &'static str {
        self.method.map_or("Original", Method::name)
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    (math::mean(v), math::pop_std(v))
}

fn embedded_matrix(x: &FeatureMatrix, coords: Vec<f64>, c: usize) -> Result<FeatureMatrix> {
    FeatureMatrix::new(
        (1..=c).map(|k| alloc::format!("c{k}")).collect(),
        coords,
        x.labels.clone(),
        x.subjects.clone(),
        x.epochs.clone(),
    )
}

/// Per-fold confusion matrices of a cross-validated KNN run.
fn transductive_folds(
    x: &FeatureMatrix,
    reducer: Option<&Reducer>,
    p: &EvalParams,
) -> Result<Vec<ConfusionMatrix>> {
    let space = match reducer {
        None => x.clone(),
        Some(r) => {
            let emb = reduce(x, r)?;
            embedded_matrix(x, emb.coords, emb.n_components)?
        }
    };
    let ctx = CvContext::new(&space, p.k_folds, p.knn_k, p.seed)?;
    let (_, preds) = ctx.evaluate_all();
    let truth = space.class_indices()?;
    let mut cms = vec![ConfusionMatrix::default(); p.k_folds];
    for (i, &f) in ctx.assignment().iter().enumerate() {
        cms[f].counts[truth[i]][preds[i]] += 1;
    }
    Ok(cms)
}

fn inductive_folds(
    x: &FeatureMatrix,
    reducer: &Reducer,
    p: &EvalParams,
) -> Result<Vec<ConfusionMatrix>> {
    let c = match reducer {
        Reducer::Pca { n_components } => *n_components,
        _ => {
            return Err(Error::param(
                "protocol",
                "the inductive protocol needs an out-of-sample map; only PCA has one",
            ))
        }
    };
    let truth = x.class_indices()?;
    let assignment = stratified_folds(&truth, p.k_folds, p.seed)?;
    let cols = x.n_cols();
    let mut cms = Vec::with_capacity(p.k_folds);
    for f in 0..p.k_folds {
        let train: Vec<usize> = (0..truth.len()).filter(|&i| assignment[i] != f).collect();
        let test: Vec<usize> = (0..truth.len()).filter(|&i| assignment[i] == f).collect();
        if p.knn_k == 0 || p.knn_k > train.len() {
            return Err(Error::param("knn_k", "larger than a training fold"));
        }
        let train_data: Vec<f64> = train
            .iter()
            .flat_map(|&i| x.row(i).iter().copied())
            .collect();
        let pca = Pca::fit(&train_data, cols, c)?;
        let y = pca.transform(&x.data);
        let st = Standardizer::fit(&y, c, &train);
        let z = st.apply_all(&y, c);
        let mut cm = ConfusionMatrix::default();
        for &q in &test {
            let zq = &z[q * c..(q + 1) * c];
            let nn = nearest(p.knn_k, train.len(), |t| {
                math::sq_dist(zq, &z[train[t] * c..(train[t] + 1) * c])
            });
            cm.counts[truth[q]][vote(&nn, |t| truth[train[t]])] += 1;
        }
        cms.push(cm);
    }
    Ok(cms)
}

fn fold_confusions(
    x: &FeatureMatrix,
    reducer: Option<&Reducer>,
    p: &EvalParams,
) -> Result<Vec<ConfusionMatrix>> {
    match (p.protocol, reducer) {
        (Protocol::Inductive, Some(r)) => inductive_folds(x, r, p),
        _ => transductive_folds(x, reducer, p),
    }
}

/// Cross-validated evaluation of one labelled set, spread over folds.
pub fn evaluate(
    x: &FeatureMatrix,
    reducer: Option<&Reducer>,
    p: &EvalParams,
) -> Result<EvalReport> {
    let cms = fold_confusions(x, reducer, p)?;
    let mut pooled = ConfusionMatrix::default();
    let mut accs = Vec::new();
    let mut mf1s = Vec::new();
    let mut kappas = Vec::new();
    for cm in &cms {
        pooled.add(cm);
        let m = metrics(cm)?;
        accs.push(m.acc);
        mf1s.push(m.mf1);
        kappas.push(m.kappa);
    }
    let m = metrics(&pooled)?;
    let (acc_mean, acc_std) = mean_std(&accs);
    Ok(EvalReport {
        method: reducer.map(Reducer::method),
        acc_mean,
        acc_std,
        mf1: m.mf1,
        mf1_std: math::pop_std(&mf1s),
        kappa: m.kappa,
        kappa_std: math::pop_std(&kappas),
        per_class_f1: m.per_class_f1,
        variance_source: Grouping::Pooled.name(),
        confusion: pooled,
        excluded: m.excluded,
        unit_accuracy: accs,
        subjects: Vec::new(),
    })
}

/// Evaluate each subject separately and summarize across subjects, or
/// evaluate all rows together.
pub fn evaluate_grouped(
    x: &FeatureMatrix,
    reducer: Option<&Reducer>,
    p: &EvalParams,
    grouping: Grouping,
) -> Result<EvalReport> {
    let x = x.labelled();
    if grouping == Grouping::Pooled {
        return evaluate(&x, reducer, p);
    }
    let subjects = x.subject_ids();
    if subjects.is_empty() {
        return Err(Error::param("subjects", "no labelled epochs to evaluate"));
    }
    let mut reports = Vec::with_capacity(subjects.len());
    for s in &subjects {
        reports.push(evaluate(&x.select_rows(&x.rows_of_subject(s)), reducer, p)?);
    }
    combine_subjects(&reports, subjects)
}

/// Summary across per-subject reports: metrics are averaged over subjects,
/// standard deviations run over subjects, confusion matrices are pooled.
pub fn combine_subjects(reports: &[EvalReport], subjects: Vec<String>) -> Result<EvalReport> {
    if reports.is_empty() || reports.len() != subjects.len() {
        return Err(Error::param("subjects", "need one report per subject"));
    }
    let pick = |f: fn(&EvalReport) -> f64| reports.iter().map(f).collect::<Vec<f64>>();
    let (acc_mean, acc_std) = mean_std(&pick(|r| r.acc_mean));
    let (mf1, mf1_std) = mean_std(&pick(|r| r.mf1));
    let (kappa, kappa_std) = mean_std(&pick(|r| r.kappa));
    let mut per_class_f1 = [0.0; K];
    for (c, f) in per_class_f1.iter_mut().enumerate() {
        *f = math::mean(
            &reports
                .iter()
                .map(|r| r.per_class_f1[c])
                .collect::<Vec<_>>(),
        );
    }
    let mut confusion = ConfusionMatrix::default();
    let mut excluded: Vec<StageLabel> = Vec::new();
    for r in reports {
        confusion.add(&r.confusion);
        for e in &r.excluded {
            if !excluded.contains(e) {
                excluded.push(*e);
            }
        }
    }
    excluded.sort();
    Ok(EvalReport {
        method: reports[0].method,
        acc_mean,
        acc_std,
        mf1,
        mf1_std,
        kappa,
        kappa_std,
        per_class_f1,
        variance_source: Grouping::PerSubject.name(),
        confusion,
        excluded,
        unit_accuracy: pick(|r| r.acc_mean),
        subjects,
    })
}
