//! Wrapper feature selection: KNN, stratified cross-validation and
//! recursive feature elimination.

pub mod cv;
pub mod knn;
pub mod rfecv;

pub use cv::{cross_val_accuracy, stratified_folds, CvContext};
pub use knn::{knn_predict, Standardizer};
pub use rfecv::{rfecv, rfecv_with, BatchScorer, RfecvParams, SelectionResult, Sequential};
