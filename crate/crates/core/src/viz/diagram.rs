use alloc::string::String;
use core::fmt::Write;

use super::{axes, close, legend, num, open, Frame, H0_COLOR, H1_COLOR};
use crate::tda::stats::filter_top_k;
use crate::tda::PersistenceDiagram;

/// Square birth/death frame from 0 to the largest death, padded 5%.
pub fn diagram_frame(diagram: &PersistenceDiagram) -> Frame {
    let hi = diagram
        .pairs
        .iter()
        .map(|p| p.death.max(p.birth))
        .fold(diagram.filtration_cap.max(0.0), f64::max);
    let hi = if hi > 0.0 { hi * 1.05 } else { 1.0 };
    Frame::new(0.0, hi, 0.0, hi)
}

/// Birth/death scatter of the `k0` most persistent H0 pairs and `k1`
/// most persistent H1 pairs, with the diagonal dashed. Essential pairs are
/// drawn as triangles, finite pairs as circles.
pub fn diagram_svg(diagram: &PersistenceDiagram, k0: usize, k1: usize, title: &str) -> String {
    let shown = filter_top_k(diagram, k0, k1);
    let f = diagram_frame(&shown);
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &f, "birth", "death");
    let _ = writeln!(
        out,
        r#"<line class="diagonal" x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-dasharray="4 3"/>"#,
        num(f.px(f.x_min)),
        num(f.py(f.y_min)),
        num(f.px(f.x_max)),
        num(f.py(f.y_max))
    );
    out.push_str("<g class=\"pairs\">\n");
    for p in &shown.pairs {
        let color = if p.dim == 0 { H0_COLOR } else { H1_COLOR };
        let (x, y) = (f.px(p.birth), f.py(p.death));
        if p.essential {
            let _ = writeln!(
                out,
                r#"<path class="h{} essential" d="M{} {}L{} {}L{} {}Z" fill="{color}"/>"#,
                p.dim,
                num(x),
                num(y - 5.0),
                num(x - 4.5),
                num(y + 3.5),
                num(x + 4.5),
                num(y + 3.5)
            );
        } else {
            let _ = writeln!(
                out,
                r#"<circle class="h{}" cx="{}" cy="{}" r="3" fill="{color}" fill-opacity="0.7"/>"#,
                p.dim,
                num(x),
                num(y)
            );
        }
    }
    out.push_str("</g>\n");
    legend(&mut out, &[("H0", H0_COLOR), ("H1", H1_COLOR)]);
    close(&mut out);
    out
}
