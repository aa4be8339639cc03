//! Static SVG figures: persistence diagrams, 2-D scatter plots of an
//! embedding, and KDE density plots.
//!
//! Output is plain SVG 1.1 text with fixed number formatting, so identical
//! inputs give byte-identical files.

mod diagram;
mod kde;
mod scatter;

use alloc::string::String;
use core::fmt::Write;

use crate::ingest::StageLabel;

pub use diagram::{diagram_frame, diagram_svg};
pub use kde::{kde_grid, kde_svg, KdeGrid, KDE_LEVELS};
pub use scatter::{scatter_frame, scatter_svg};

/// Stage colors, in stage order W, N1, N2, N3, REM.
pub const STAGE_COLORS: [&str; StageLabel::COUNT] =
    ["#e6194b", "#f58231", "#3cb44b", "#4363d8", "#911eb4"];
pub const UNLABELLED_COLOR: &str = "#999999";
pub const H0_COLOR: &str = "#1f77b4";
pub const H1_COLOR: &str = "#d62728";

pub fn stage_color(label: Option<StageLabel>) -> &'static str {
    label.map_or(UNLABELLED_COLOR, |s| STAGE_COLORS[s.index()])
}

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

/// Data range to pixel mapping of a square plot area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Frame {
    /// Widen degenerate ranges so the mapping stays finite.
    fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        let fix = |lo: f64, hi: f64| {
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        };
        let (x_min, x_max) = fix(x_min, x_max);
        let (y_min, y_max) = fix(y_min, y_max);
        Frame {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    /// Both ranges widened by `frac` of their span on each side.
    fn padded(x_min: f64, x_max: f64, y_min: f64, y_max: f64, frac: f64) -> Self {
        let f = Frame::new(x_min, x_max, y_min, y_max);
        let (dx, dy) = ((f.x_max - f.x_min) * frac, (f.y_max - f.y_min) * frac);
        Frame::new(f.x_min - dx, f.x_max + dx, f.y_min - dy, f.y_max + dy)
    }

    pub fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - 2.0 * MARGIN)
    }

    pub fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - 2.0 * MARGIN)
    }
}

/// Pixel coordinates are written with two decimals everywhere.
pub(crate) fn num(v: f64) -> String {
    alloc::format!("{v:.2}")
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(ch),
        }
    }
    out
}

pub(crate) fn open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = WIDTH,
        h = HEIGHT
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        num(WIDTH / 2.0),
        escape(title)
    );
}

pub(crate) fn close(out: &mut String) {
    out.push_str("</svg>\n");
}

/// Axis box, five ticks per axis and the axis titles.
pub(crate) fn axes(out: &mut String, f: &Frame, x_title: &str, y_title: &str) {
    let (left, right) = (MARGIN, WIDTH - MARGIN);
    let (top, bottom) = (MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        out,
        r#"<g class="axes" stroke="black" fill="none"><line x1="{l}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{l}" y1="{b}" x2="{l}" y2="{t}"/></g>"#,
        l = num(left),
        r = num(right),
        t = num(top),
        b = num(bottom)
    );
    out.push_str("<g class=\"ticks\">\n");
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = f.x_min + t * (f.x_max - f.x_min);
        let yv = f.y_min + t * (f.y_max - f.y_min);
        let (xp, yp) = (f.px(xv), f.py(yv));
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{b}" x2="{x}" y2="{b2}" stroke="black"/><text x="{x}" y="{ty}" text-anchor="middle">{xv:.3}</text>"#,
            x = num(xp),
            b = num(bottom),
            b2 = num(bottom + 4.0),
            ty = num(bottom + 18.0)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{l2}" y1="{y}" x2="{l}" y2="{y}" stroke="black"/><text x="{tx}" y="{ty}" text-anchor="end">{yv:.3}</text>"#,
            l = num(left),
            l2 = num(left - 4.0),
            y = num(yp),
            tx = num(left - 6.0),
            ty = num(yp + 4.0)
        );
    }
    out.push_str("</g>\n");
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        num(WIDTH / 2.0),
        num(HEIGHT - 12.0),
        escape(x_title)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{y}" text-anchor="middle" transform="rotate(-90 16 {y})">{}</text>"#,
        escape(y_title),
        y = num(HEIGHT / 2.0)
    );
}

/// Vertical legend in the top-right corner.
pub(crate) fn legend(out: &mut String, entries: &[(&str, &str)]) {
    out.push_str("<g class=\"legend\">\n");
    for (i, (name, color)) in entries.iter().enumerate() {
        let y = MARGIN + 8.0 + 16.0 * i as f64;
        let x = WIDTH - MARGIN - 70.0;
        let _ = writeln!(
            out,
            r#"<rect class="legend-entry" x="{}" y="{}" width="10" height="10" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
            num(x),
            num(y - 9.0),
            num(x + 14.0),
            num(y),
            escape(name)
        );
    }
    out.push_str("</g>\n");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_maps_corners() {
        let f = Frame::new(0.0, 2.0, -1.0, 1.0);
        assert_eq!(f.px(0.0), MARGIN);
        assert_eq!(f.px(2.0), WIDTH - MARGIN);
        assert_eq!(f.py(-1.0), HEIGHT - MARGIN);
        assert_eq!(f.py(1.0), MARGIN);
        let flat = Frame::new(3.0, 3.0, 0.0, 1.0);
        assert!(flat.px(3.0).is_finite());
    }

    #[test]
    fn text_is_escaped() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }
}
