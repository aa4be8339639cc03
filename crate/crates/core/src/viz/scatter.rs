use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::{axes, close, legend, num, open, stage_color, Frame, STAGE_COLORS, UNLABELLED_COLOR};
use crate::dimred::LowDimEmbedding;
use crate::error::{Error, Result};
use crate::ingest::StageLabel;

/// Data range of a 2-D embedding padded 5% on every side.
pub fn scatter_frame(embedding: &LowDimEmbedding) -> Result<Frame> {
    if embedding.n_components != 2 {
        return Err(Error::param(
            "n_components",
            "scatter plots need a 2-D embedding",
        ));
    }
    let xs: Vec<f64> = embedding.coords.iter().step_by(2).copied().collect();
    let ys: Vec<f64> = embedding
        .coords
        .iter()
        .skip(1)
        .step_by(2)
        .copied()
        .collect();
    let lo = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if xs.is_empty() {
        return Ok(Frame::new(0.0, 1.0, 0.0, 1.0));
    }
    Ok(Frame::padded(lo(&xs), hi(&xs), lo(&ys), hi(&ys), 0.05))
}

/// One marker per row colored by stage, unlabelled rows in gray.
pub fn scatter_svg(
    embedding: &LowDimEmbedding,
    labels: &[Option<StageLabel>],
    title: &str,
) -> Result<String> {
    let f = scatter_frame(embedding)?;
    if labels.len() != embedding.n_rows() {
        return Err(Error::Shape(alloc::format!(
            "{} labels for {} points",
            labels.len(),
            embedding.n_rows()
        )));
    }
    let name = embedding.method.name();
    let mut out = String::new();
    open(&mut out, title);
    axes(
        &mut out,
        &f,
        &alloc::format!("{name} 1"),
        &alloc::format!("{name} 2"),
    );
    out.push_str("<g class=\"points\">\n");
    for (i, label) in labels.iter().enumerate() {
        let p = embedding.point(i);
        let _ = writeln!(
            out,
            r#"<circle class="point" cx="{}" cy="{}" r="2.5" fill="{}" fill-opacity="0.8"/>"#,
            num(f.px(p[0])),
            num(f.py(p[1])),
            stage_color(*label)
        );
    }
    out.push_str("</g>\n");
    let mut entries: Vec<(&str, &str)> = StageLabel::ALL
        .iter()
        .map(|s| (s.name(), STAGE_COLORS[s.index()]))
        .collect();
    if labels.iter().any(Option::is_none) {
        entries.push(("unlabelled", UNLABELLED_COLOR));
    }
    legend(&mut out, &entries);
    close(&mut out);
    Ok(out)
}
