//! SVG export of a laid-out graph.

use std::fmt::Write;

use crate::geom::Point;
use crate::graph::Graph;

pub const NODE_RADIUS: f64 = 8.0;

/// Edges as lines, nodes as labeled circles. The view box is the bounding
/// box of the node disks grown by 5% of its larger side on every edge.
pub fn render(g: &Graph, positions: &[Point]) -> String {
    assert_eq!(positions.len(), g.node_count(), "one position per node");
    let (min, max) = if positions.is_empty() {
        (Point::ZERO, Point::ZERO)
    } else {
        positions.iter().fold(
            (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
            |(lo, hi), p| (Point::new(lo.x.min(p.x), lo.y.min(p.y)), Point::new(hi.x.max(p.x), hi.y.max(p.y))),
        )
    };
    let (min, max) = (min - Point::new(NODE_RADIUS, NODE_RADIUS), max + Point::new(NODE_RADIUS, NODE_RADIUS));
    let margin = 0.05 * (max.x - min.x).max(max.y - min.y);
    let (x0, y0) = (min.x - margin, min.y - margin);
    let (w, h) = (max.x - min.x + 2.0 * margin, max.y - min.y + 2.0 * margin);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0:.2} {y0:.2} {w:.2} {h:.2}" width="{w:.0}" height="{h:.0}">"#
    );
    s.push_str("<g stroke=\"#777\" stroke-width=\"1.5\">\n");
    for &(u, v) in g.edges() {
        let (a, b) = (positions[u], positions[v]);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#, a.x, a.y, b.x, b.y);
    }
    s.push_str("</g>\n<g font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"middle\">\n");
    for (ix, p) in positions.iter().enumerate() {
        let label = escape(g.id(ix));
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="{NODE_RADIUS}" fill="#4a90d9" stroke="#1f4e79"><title>{label}</title></circle>"##,
            p.x, p.y
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" dy="3">{label}</text>"#, p.x, p.y);
    }
    s.push_str("</g>\n</svg>\n");
    s
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}
