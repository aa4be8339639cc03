//! Labelled epoch-by-feature table shared by selection, reduction and
//! evaluation.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ingest::StageLabel;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    /// Row-major values, `rows x names.len()`.
    pub data: Vec<f64>,
    pub labels: Vec<Option<StageLabel>>,
    pub subjects: Vec<String>,
    pub epochs: Vec<usize>,
}

impl FeatureMatrix {
    /// Validates shape and finiteness.
    pub fn new(
        names: Vec<String>,
        data: Vec<f64>,
        labels: Vec<Option<StageLabel>>,
        subjects: Vec<String>,
        epochs: Vec<usize>,
    ) -> Result<Self> {
        let rows = labels.len();
        if data.len() != rows * names.len() || subjects.len() != rows || epochs.len() != rows {
            return Err(Error::Shape(alloc::format!(
                "{} values, {} labels, {} subjects, {} epoch indices for {} columns",
                data.len(),
                rows,
                subjects.len(),
                epochs.len(),
                names.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            let c = names.len().max(1);
            return Err(Error::numerical(
                "feature matrix",
                alloc::format!(
                    "non-finite value at row {}, column `{}`",
                    pos / c,
                    names[pos % c]
                ),
            ));
        }
        Ok(FeatureMatrix {
            names,
            data,
            labels,
            subjects,
            epochs,
        })
    }

    /// Unlabelled matrix with a single anonymous subject.
    pub fn from_rows(
        names: Vec<String>,
        rows: &[Vec<f64>],
        labels: Vec<Option<StageLabel>>,
    ) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != names.len()) {
            return Err(Error::Shape("ragged feature rows".into()));
        }
        FeatureMatrix::new(
            names,
            rows.concat(),
            labels,
            alloc::vec![String::new(); n],
            (0..n).collect(),
        )
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.n_cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols() + j]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(self.n_rows() * cols.len());
        for i in 0..self.n_rows() {
            let r = self.row(i);
            data.extend(cols.iter().map(|&j| r[j]));
        }
        FeatureMatrix {
            names: cols.iter().map(|&j| self.names[j].clone()).collect(),
            data,
            labels: self.labels.clone(),
            subjects: self.subjects.clone(),
            epochs: self.epochs.clone(),
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.n_cols());
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            names: self.names.clone(),
            data,
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            subjects: rows.iter().map(|&i| self.subjects[i].clone()).collect(),
            epochs: rows.iter().map(|&i| self.epochs[i]).collect(),
        }
    }

    /// Side-by-side join of two matrices describing the same rows.
    pub fn hconcat(&self, other: &FeatureMatrix) -> Result<FeatureMatrix> {
        if self.n_rows() != other.n_rows()
            || self.subjects != other.subjects
            || self.epochs != other.epochs
        {
            return Err(Error::Shape(
                "joined matrices describe different epochs".into(),
            ));
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        for i in 0..self.n_rows() {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        let mut names = self.names.clone();
        names.extend(other.names.iter().cloned());
        Ok(FeatureMatrix {
            names,
            data,
            labels: self.labels.clone(),
            subjects: self.subjects.clone(),
            epochs: self.epochs.clone(),
        })
    }

    /// Rows carrying a stage label.
    pub fn labelled(&self) -> FeatureMatrix {
        let keep: Vec<usize> = (0..self.n_rows())
            .filter(|&i| self.labels[i].is_some())
            .collect();
        self.select_rows(&keep)
    }

    /// Class index of every row; errors on the first unlabelled row.
    pub fn class_indices(&self) -> Result<Vec<usize>> {
        self.labels
            .iter()
            .enumerate()
            .map(|(row, l)| l.map(StageLabel::index).ok_or(Error::MissingLabel { row }))
            .collect()
    }

    /// Distinct subject ids in first-appearance order.
    pub fn subject_ids(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for s in &self.subjects {
            if !out.contains(s) {
                out.push(s.clone());
            }
        }
        out
    }

    pub fn rows_of_subject(&self, subject: &str) -> Vec<usize> {
        (0..self.n_rows())
            .filter(|&i| self.subjects[i] == subject)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| alloc::format!("f{i}")).collect()
    }

    #[test]
    fn rejects_non_finite_and_bad_shape() {
        let err =
            FeatureMatrix::from_rows(names(2), &[vec![1.0, f64::NAN]], vec![None]).unwrap_err();
        assert!(err.to_string().contains("f1"));
        assert!(FeatureMatrix::new(
            names(2),
            vec![1.0; 3],
            vec![None],
            vec!["a".into()],
            vec![0]
        )
        .is_err());
    }

    #[test]
    fn selection_and_join() {
        let m = FeatureMatrix::from_rows(
            names(3),
            &[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]],
            vec![Some(StageLabel::W), None],
        )
        .unwrap();
        let c = m.select_columns(&[2, 0]);
        assert_eq!(c.row(1), &[6.0, 4.0]);
        assert_eq!(c.names, vec!["f2".to_string(), "f0".to_string()]);
        let j = m.hconcat(&c).unwrap();
        assert_eq!(j.n_cols(), 5);
        assert_eq!(j.row(0), &[1.0, 2.0, 3.0, 3.0, 1.0]);
        assert_eq!(m.labelled().n_rows(), 1);
        assert_eq!(m.class_indices(), Err(Error::MissingLabel { row: 1 }));
    }
}
