//! Plain CSV formats: epochs, hypnogram spans, feature matrices,
//! embeddings, persistence diagrams, selection traces and KDE grids.
//!
//! Writers use Rust's shortest round-trip float formatting, so a value
//! written and read back is bit-identical.

use std::io::Read;

use sleeptopo_core::dimred::LowDimEmbedding;
use sleeptopo_core::ingest::{epoch_len, LabelSpan};
use sleeptopo_core::tda::{PersistenceDiagram, PersistencePair};
use sleeptopo_core::viz::KdeGrid;
use sleeptopo_core::{Epoch, FeatureMatrix, StageLabel};

/// Errors carry a 1-based row number (counting data rows after any header).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("row {row}: {reason}")]
pub struct CsvError {
    pub row: usize,
    pub reason: String,
}

fn err(row: usize, reason: impl Into<String>) -> CsvError {
    CsvError {
        row,
        reason: reason.into(),
    }
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input)
}

fn records<R: Read>(input: R) -> Result<Vec<csv::StringRecord>, CsvError> {
    reader(input)
        .records()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| err(i + 1, e.to_string())))
        .collect()
}

fn number(text: &str, row: usize, what: &str) -> Result<f64, CsvError> {
    let v: f64 = text
        .parse()
        .map_err(|_| err(row, format!("{what}: `{text}` is not a number")))?;
    if !v.is_finite() {
        return Err(err(row, format!("{what}: non-finite value")));
    }
    Ok(v)
}

fn label(text: &str, row: usize) -> Result<Option<StageLabel>, CsvError> {
    if text.is_empty() {
        return Ok(None);
    }
    StageLabel::parse(text)
        .map(Some)
        .map_err(|e| err(row, e.to_string()))
}

fn label_text(l: Option<StageLabel>) -> &'static str {
    l.map_or("", StageLabel::name)
}

/// `subject_id,index,label,s0..s{n-1}` rows; a header row is detected by a
/// non-integer index field and skipped.
pub fn read_csv_epochs<R: Read>(input: R, sample_rate_hz: f64) -> Result<Vec<Epoch>, CsvError> {
    let n = epoch_len(sample_rate_hz);
    let mut rows = records(input)?;
    if rows
        .first()
        .is_some_and(|r| r.get(1).is_some_and(|f| f.parse::<usize>().is_err()))
    {
        rows.remove(0);
    }
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let row = i + 1;
            if r.len() != n + 3 {
                return Err(err(
                    row,
                    format!(
                        "expected {} columns ({n} samples), found {}",
                        n + 3,
                        r.len()
                    ),
                ));
            }
            let index: usize = r[1]
                .parse()
                .map_err(|_| err(row, format!("epoch index `{}` is not an integer", &r[1])))?;
            let samples = (3..r.len())
                .map(|j| number(&r[j], row, "sample"))
                .collect::<Result<Vec<_>, _>>()?;
            Epoch::new(&r[0], index, samples, sample_rate_hz, label(&r[2], row)?)
                .map_err(|e| err(row, e.to_string()))
        })
        .collect()
}

pub fn write_csv_epochs(epochs: &[Epoch]) -> String {
    let n = epochs.first().map_or(0, |e| e.samples.len());
    let mut out = String::from("subject_id,index,label");
    for k in 0..n {
        out.push_str(&format!(",s{k}"));
    }
    out.push('\n');
    for e in epochs {
        out.push_str(&format!(
            "{},{},{}",
            e.subject_id,
            e.index,
            label_text(e.label)
        ));
        for v in &e.samples {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

/// `onset,duration,label` rows in seconds; a header row is skipped.
pub fn read_hypnogram<R: Read>(input: R) -> Result<Vec<LabelSpan>, CsvError> {
    let mut rows = records(input)?;
    if rows
        .first()
        .is_some_and(|r| r.get(0).is_some_and(|f| f.parse::<f64>().is_err()))
    {
        rows.remove(0);
    }
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let row = i + 1;
            if r.len() != 3 {
                return Err(err(row, format!("expected 3 columns, found {}", r.len())));
            }
            Ok(LabelSpan::new(
                number(&r[0], row, "onset")?,
                number(&r[1], row, "duration")?,
                &r[2],
            ))
        })
        .collect()
}

pub fn write_hypnogram(spans: &[LabelSpan]) -> String {
    let mut out = String::from("onset,duration,label\n");
    for s in spans {
        out.push_str(&format!("{},{},{}\n", s.onset_s, s.duration_s, s.label));
    }
    out
}

const MATRIX_LEAD: [&str; 3] = ["subject_id", "label", "epoch"];

/// Header `subject_id,label,epoch,<feature names>`, one row per epoch.
pub fn write_feature_matrix(x: &FeatureMatrix) -> String {
    let mut out = MATRIX_LEAD.join(",");
    for n in &x.names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for i in 0..x.n_rows() {
        out.push_str(&format!(
            "{},{},{}",
            x.subjects[i],
            label_text(x.labels[i]),
            x.epochs[i]
        ));
        for v in x.row(i) {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn read_feature_matrix<R: Read>(input: R) -> Result<FeatureMatrix, CsvError> {
    let rows = records(input)?;
    let Some(header) = rows.first() else {
        return Err(err(0, "empty feature file"));
    };
    if header.len() < 3 || (0..3).any(|j| header[j] != *MATRIX_LEAD[j]) {
        return Err(err(0, "header must start with subject_id,label,epoch"));
    }
    let names: Vec<String> = header.iter().skip(3).map(String::from).collect();
    let p = names.len();
    let mut data = Vec::with_capacity((rows.len() - 1) * p);
    let mut labels = Vec::new();
    let mut subjects = Vec::new();
    let mut epochs = Vec::new();
    for (i, r) in rows.iter().enumerate().skip(1) {
        if r.len() != p + 3 {
            return Err(err(
                i,
                format!("expected {} columns, found {}", p + 3, r.len()),
            ));
        }
        subjects.push(r[0].to_string());
        labels.push(label(&r[1], i)?);
        epochs.push(
            r[2].parse()
                .map_err(|_| err(i, "epoch index is not an integer"))?,
        );
        for j in 3..r.len() {
            data.push(number(&r[j], i, &names[j - 3])?);
        }
    }
    FeatureMatrix::new(names, data, labels, subjects, epochs).map_err(|e| err(0, e.to_string()))
}

/// Header `subject_id,epoch,label,c1..cc`.
pub fn write_embedding(e: &LowDimEmbedding, rows: &FeatureMatrix) -> String {
    let mut out = String::from("subject_id,epoch,label");
    for k in 1..=e.n_components {
        out.push_str(&format!(",c{k}"));
    }
    out.push('\n');
    for i in 0..e.n_rows() {
        out.push_str(&format!(
            "{},{},{}",
            rows.subjects[i],
            rows.epochs[i],
            label_text(rows.labels[i])
        ));
        for v in e.point(i) {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

/// Embedding coordinates as a feature matrix (columns `c1..cc`).
pub fn read_embedding<R: Read>(input: R) -> Result<FeatureMatrix, CsvError> {
    let rows = records(input)?;
    let Some(header) = rows.first() else {
        return Err(err(0, "empty embedding file"));
    };
    if header.len() < 4
        || &header[0] != "subject_id"
        || &header[1] != "epoch"
        || &header[2] != "label"
    {
        return Err(err(0, "header must start with subject_id,epoch,label"));
    }
    let names: Vec<String> = header.iter().skip(3).map(String::from).collect();
    let c = names.len();
    let (mut data, mut labels, mut subjects, mut epochs) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, r) in rows.iter().enumerate().skip(1) {
        if r.len() != c + 3 {
            return Err(err(
                i,
                format!("expected {} columns, found {}", c + 3, r.len()),
            ));
        }
        subjects.push(r[0].to_string());
        epochs.push(
            r[1].parse()
                .map_err(|_| err(i, "epoch index is not an integer"))?,
        );
        labels.push(label(&r[2], i)?);
        for j in 3..r.len() {
            data.push(number(&r[j], i, "coordinate")?);
        }
    }
    FeatureMatrix::new(names, data, labels, subjects, epochs).map_err(|e| err(0, e.to_string()))
}

/// `dim,birth,death,essential` rows.
pub fn write_diagram(d: &PersistenceDiagram) -> String {
    let mut out = format!(
        "# filtration_cap: {}\ndim,birth,death,essential\n",
        d.filtration_cap
    );
    for p in &d.pairs {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.dim,
            p.birth,
            p.death,
            u8::from(p.essential)
        ));
    }
    out
}

pub fn read_diagram(text: &str) -> Result<PersistenceDiagram, CsvError> {
    let cap = text
        .lines()
        .find_map(|l| l.strip_prefix("# filtration_cap: "))
        .map(|v| number(v.trim(), 0, "filtration_cap"))
        .transpose()?
        .unwrap_or(0.0);
    let rows = records(text.as_bytes())?;
    let mut pairs = Vec::new();
    for (i, r) in rows.iter().enumerate().skip(1) {
        if r.len() != 4 {
            return Err(err(i, "expected dim,birth,death,essential"));
        }
        let dim: u8 = r[0].parse().map_err(|_| err(i, "dim is not an integer"))?;
        let (birth, death) = (number(&r[1], i, "birth")?, number(&r[2], i, "death")?);
        pairs.push(match &r[3] {
            "1" | "true" => PersistencePair::essential(dim, birth, death),
            "0" | "false" => PersistencePair::finite(dim, birth, death),
            other => return Err(err(i, format!("essential flag `{other}`"))),
        });
    }
    Ok(PersistenceDiagram {
        pairs,
        filtration_cap: cap,
    })
}

/// `x,y,density` rows, `x` varying fastest.
pub fn write_kde(grid: &KdeGrid) -> String {
    let mut out = format!(
        "# bandwidth: {},{}\nx,y,density\n",
        grid.bandwidth.0, grid.bandwidth.1
    );
    for iy in 0..grid.g {
        for ix in 0..grid.g {
            out.push_str(&format!(
                "{},{},{}\n",
                grid.x_at(ix),
                grid.y_at(iy),
                grid.density[iy * grid.g + ix]
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_epoch_row() {
        let mut row = String::from("s1,0,W");
        row.push_str(&",0".repeat(3000));
        let e = read_csv_epochs(row.as_bytes(), 100.0).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].label, Some(StageLabel::W));
        assert!(e[0].samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn short_row_names_its_row() {
        let mut text = String::from("subject_id,index,label\n");
        text.push_str("s1,0,N2");
        text.push_str(&",1".repeat(3000));
        text.push_str("\ns1,1,N2");
        text.push_str(&",1".repeat(2999));
        let e = read_csv_epochs(text.as_bytes(), 100.0).unwrap_err();
        assert_eq!(e.row, 2);
        assert!(e.reason.contains("3000 samples"));
    }

    #[test]
    fn empty_label_means_unlabelled() {
        let mut row = String::from("s1,4,");
        row.push_str(&",0.5".repeat(3000));
        let e = read_csv_epochs(row.as_bytes(), 100.0).unwrap();
        assert_eq!((e[0].label, e[0].index), (None, 4));
    }

    #[test]
    fn unknown_label_is_rejected() {
        let mut row = String::from("s1,0,N4");
        row.push_str(&",0".repeat(3000));
        assert!(read_csv_epochs(row.as_bytes(), 100.0).is_err());
    }

    #[test]
    fn feature_matrix_round_trip() {
        let x = FeatureMatrix::new(
            vec!["a".into(), "b".into()],
            vec![0.1, 1e-300, -2.5, std::f64::consts::PI],
            vec![Some(StageLabel::Rem), None],
            vec!["s1".into(), "s2".into()],
            vec![3, 9],
        )
        .unwrap();
        let back = read_feature_matrix(write_feature_matrix(&x).as_bytes()).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn diagram_round_trip() {
        let d = PersistenceDiagram {
            pairs: vec![
                PersistencePair::essential(0, 0.0, 3.5),
                PersistencePair::finite(1, 0.25, 0.75),
            ],
            filtration_cap: 3.5,
        };
        assert_eq!(read_diagram(&write_diagram(&d)).unwrap(), d);
    }

    #[test]
    fn hypnogram_with_header() {
        let spans =
            read_hypnogram("onset,duration,label\n0,90,Sleep stage W\n90,30,4\n".as_bytes())
                .unwrap();
        assert_eq!(spans.len(), 2);
        assert_eq!(spans[1].label, "4");
        assert_eq!(
            read_hypnogram(write_hypnogram(&spans).as_bytes()).unwrap(),
            spans
        );
    }
}
