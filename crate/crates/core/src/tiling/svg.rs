//! SVG rendering of a tiling on the unit strip.

use std::fmt::Write;

use super::{Rect, Tiling};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvgOptions {
    pub width: f64,
    pub height: f64,
    pub stroke_width: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            width: 1000.0,
            height: 1000.0,
            stroke_width: 0.5,
        }
    }
}

fn push_rect(out: &mut String, x: f64, y: f64, w: f64, h: f64, class: &str) {
    let _ = writeln!(
        out,
        r#"  <rect class="{class}" x="{x:.4}" y="{y:.4}" width="{w:.4}" height="{h:.4}"/>"#
    );
}

fn draw<S: Scalar>(out: &mut String, r: &Rect<S>, opts: &SvgOptions, class: &str) {
    if r.degenerate {
        return;
    }
    let (s, w) = (r.start.to_f64(), r.width.to_f64().min(1.0));
    let y = (1.0 - r.high.to_f64()) * opts.height;
    let h = r.height().to_f64() * opts.height;
    let first = w.min(1.0 - s);
    push_rect(out, s * opts.width, y, first * opts.width, h, class);
    if w > first {
        push_rect(out, 0.0, y, (w - first) * opts.width, h, class);
    }
}

/// Height 1 at the top; rectangles crossing the seam are drawn in two parts.
pub fn render_svg<S: Scalar>(t: &Tiling<S>, opts: &SvgOptions) -> String {
    let (w, h) = (opts.width, opts.height);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.4} {h:.4}" width="{w:.4}" height="{h:.4}">"#
    );
    let _ = writeln!(
        out,
        r#"  <style>rect {{ stroke: #000; stroke-width: {:.4}; }} .edge {{ fill: #cfe0f3; }} .boundary {{ fill: #eeeeee; }} .frame {{ fill: none; }}</style>"#,
        opts.stroke_width
    );
    for r in &t.rects {
        draw(&mut out, r, opts, "edge");
    }
    for (_, r) in &t.boundary_rects {
        draw(&mut out, r, opts, "boundary");
    }
    push_rect(&mut out, 0.0, 0.0, w, h, "frame");
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families;
    use crate::harmonic::SolverOptions;
    use crate::tiling::{tile_killed, TilingOptions};

    fn empty() -> Tiling<f64> {
        Tiling {
            rects: Vec::new(),
            down: Vec::new(),
            ends: Vec::new(),
            conductance: Vec::new(),
            boundary_rects: Vec::new(),
            vertices: Vec::new(),
            root: 0,
            face_widths: vec![0.0],
            zeta: 0,
        }
    }

    #[test]
    fn empty_tiling_draws_only_the_frame() {
        let svg = render_svg(&empty(), &SvgOptions::default());
        assert_eq!(svg.matches("<rect").count(), 1);
        assert!(svg.contains(r#"class="frame" x="0.0000" y="0.0000" width="1000.0000""#));
    }

    #[test]
    fn output_is_byte_stable() {
        let g = families::b_ary_tree::<f64>(2, 6).unwrap();
        let t = tile_killed(&g, &SolverOptions::default(), &TilingOptions::default())
            .unwrap()
            .1;
        let a = render_svg(&t, &SvgOptions::default());
        let b = render_svg(&t.clone(), &SvgOptions::default());
        assert_eq!(a, b);
        assert!(a.matches(r#"class="edge""#).count() >= g.num_edges() - 2);
    }

    #[test]
    fn seam_crossing_rectangle_is_split() {
        let mut t = empty();
        t.rects.push(Rect {
            start: 0.75,
            width: 0.5,
            low: 0.0,
            high: 0.5,
            degenerate: false,
        });
        let svg = render_svg(&t, &SvgOptions::default());
        assert!(svg.contains(r#"x="750.0000" y="500.0000" width="250.0000" height="500.0000""#));
        assert!(svg.contains(r#"x="0.0000" y="500.0000" width="250.0000" height="500.0000""#));
    }
}
