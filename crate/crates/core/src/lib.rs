//! Core algorithms for two-stage hierarchical feature selection and
//! dimensionality reduction of sleep EEG.
//!
//! The crate is `no_std` and only needs an allocator. Everything here is a
//! pure function of its inputs (plus an explicit seed where randomness is
//! involved); file formats, configuration and the command-line pipeline live
//! in the `sleeptopo` companion crate.
//!
//! Module map:
//!
//! * [`ingest`] - signal records, epochs, stage labels and segmentation.
//! * [`features`] - the 53 spectral-temporal features of one epoch.
//! * [`tda`] - Takens embedding, Vietoris-Rips persistence (H0/H1) and
//!   persistence statistics.
//! * [`select`] - KNN, stratified cross-validation and RFECV.
//! * [`dimred`] - PCA, t-SNE and UMAP.
//! * [`synth`] - seeded synthetic fixtures and a synthetic EEG night.
//! * [`eval`] - confusion matrices, ACC / MF1 / kappa and the evaluation protocol.
//! * [`viz`] - persistence diagrams, scatter plots and KDE plots as SVG text.
#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dimred;
pub mod error;
pub mod eval;
pub mod features;
pub mod ingest;
pub mod math;
pub mod matrix;
pub mod rng;
pub mod select;
pub mod synth;
pub mod tda;
pub mod viz;

pub use error::{Error, Result};
pub use ingest::{Epoch, SignalRecord, StageLabel};
pub use matrix::FeatureMatrix;
