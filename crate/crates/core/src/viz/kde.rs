use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt::Write;

use super::{axes, close, num, open, Frame};
use crate::error::{Error, Result};
use crate::math;

/// Band edges as fractions of the grid maximum.
pub const KDE_LEVELS: [f64; 4] = [0.2, 0.4, 0.6, 0.8];

/// Product-Gaussian density sampled at the centres of a `g x g` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeGrid {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub g: usize,
    /// Row-major with `y` as the row index: `density[iy * g + ix]`.
    pub density: Vec<f64>,
    pub bandwidth: (f64, f64),
}

impl KdeGrid {
    pub fn x_at(&self, ix: usize) -> f64 {
        let (lo, hi) = self.x_range;
        lo + (ix as f64 + 0.5) * (hi - lo) / self.g as f64
    }

    pub fn y_at(&self, iy: usize) -> f64 {
        let (lo, hi) = self.y_range;
        lo + (iy as f64 + 0.5) * (hi - lo) / self.g as f64
    }

    pub fn cell_area(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) * (self.y_range.1 - self.y_range.0)
            / (self.g * self.g) as f64
    }

    /// Riemann sum of density times cell area.
    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.cell_area()
    }

    pub fn max(&self) -> f64 {
        self.density.iter().copied().fold(0.0, f64::max)
    }

    /// `(ix, iy)` of the largest cell, first in row-major order on ties.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (k, &v) in self.density.iter().enumerate() {
            if v > self.density[best] {
                best = k;
            }
        }
        (best % self.g, best / self.g)
    }
}

fn sample_std(v: &[f64]) -> f64 {
    let m = math::mean(v);
    math::sqrt(v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64)
}

/// Density of `n x 2` row-major `points` on a `g x g` grid covering the data
/// plus three bandwidths. Bandwidths follow Scott's rule for two dimensions,
/// `sd * n^(-1/6)` per axis.
pub fn kde_grid(points: &[f64], g: usize) -> Result<KdeGrid> {
    let n = points.len() / 2;
    if n < 2 {
        return Err(Error::TooShort {
            op: "kde_grid",
            needed: 2,
            got: n,
        });
    }
    if g == 0 {
        return Err(Error::param("g", "grid needs at least one cell"));
    }
    let xs: Vec<f64> = points.iter().step_by(2).copied().collect();
    let ys: Vec<f64> = points.iter().skip(1).step_by(2).copied().collect();
    let factor = math::powf(n as f64, -1.0 / 6.0);
    let (hx, hy) = (sample_std(&xs) * factor, sample_std(&ys) * factor);
    if !(hx > 0.0) || !(hy > 0.0) {
        return Err(Error::param("points", "zero spread along an axis"));
    }
    let span = |v: &[f64], h: f64| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo - 3.0 * h, hi + 3.0 * h)
    };
    let mut grid = KdeGrid {
        x_range: span(&xs, hx),
        y_range: span(&ys, hy),
        g,
        density: Vec::with_capacity(g * g),
        bandwidth: (hx, hy),
    };
    let kx: Vec<Vec<f64>> = (0..g)
        .map(|ix| {
            let x = grid.x_at(ix);
            xs.iter()
                .map(|&p| math::exp(-0.5 * ((x - p) / hx) * ((x - p) / hx)))
                .collect()
        })
        .collect();
    let norm = 1.0 / (2.0 * PI * hx * hy * n as f64);
    for iy in 0..g {
        let y = grid.y_at(iy);
        let ky: Vec<f64> = ys
            .iter()
            .map(|&p| math::exp(-0.5 * ((y - p) / hy) * ((y - p) / hy)))
            .collect();
        for kxi in &kx {
            let s: f64 = kxi.iter().zip(&ky).map(|(a, b)| a * b).sum();
            grid.density.push(s * norm);
        }
    }
    Ok(grid)
}

/// Filled level bands at [`KDE_LEVELS`] of the grid maximum, drawn in
/// `color` with increasing opacity.
pub fn kde_svg(grid: &KdeGrid, color: &str, title: &str) -> String {
    let f = Frame::new(
        grid.x_range.0,
        grid.x_range.1,
        grid.y_range.0,
        grid.y_range.1,
    );
    let top = grid.max();
    let band = |v: f64| {
        KDE_LEVELS
            .iter()
            .filter(|&&l| top > 0.0 && v >= l * top)
            .count()
    };
    let g = grid.g;
    let (dx, dy) = (
        (grid.x_range.1 - grid.x_range.0) / g as f64,
        (grid.y_range.1 - grid.y_range.0) / g as f64,
    );
    let mut out = String::new();
    open(&mut out, title);
    for level in 1..=KDE_LEVELS.len() {
        let _ = writeln!(
            out,
            r#"<g class="level" data-level="{:.0}" fill="{color}" fill-opacity="{:.2}">"#,
            KDE_LEVELS[level - 1] * 100.0,
            0.2 * level as f64
        );
        for iy in 0..g {
            let mut ix = 0;
            while ix < g {
                if band(grid.density[iy * g + ix]) != level {
                    ix += 1;
                    continue;
                }
                let start = ix;
                while ix < g && band(grid.density[iy * g + ix]) == level {
                    ix += 1;
                }
                let x0 = grid.x_range.0 + start as f64 * dx;
                let x1 = grid.x_range.0 + ix as f64 * dx;
                let y0 = grid.y_range.0 + iy as f64 * dy;
                let (px0, px1) = (f.px(x0), f.px(x1));
                let (py1, py0) = (f.py(y0 + dy), f.py(y0));
                let _ = writeln!(
                    out,
                    r#"<rect x="{}" y="{}" width="{}" height="{}"/>"#,
                    num(px0),
                    num(py1),
                    num(px1 - px0),
                    num(py0 - py1)
                );
            }
        }
        out.push_str("</g>\n");
    }
    axes(&mut out, &f, "component 1", "component 2");
    close(&mut out);
    out
}
