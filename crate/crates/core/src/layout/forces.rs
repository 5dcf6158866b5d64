//! Per-iteration force accumulation.

use std::collections::HashMap;

use crate::geom::Point;
use crate::graph::Graph;

use super::LayoutConfig;

/// Exact pairwise repulsion up to this many nodes; grid cells above.
pub(crate) const GRID_THRESHOLD: usize = 500;

/// Spring stiffness per unit of stretch beyond the ideal length.
const SPRING: f64 = 0.1;

/// Floor on squared distance so coincident nodes do not explode.
const MIN_DIST_SQ: f64 = 0.01;

/// Writes the net force on every node into `out`. Forces read only `pos`,
/// so the result does not depend on evaluation order.
pub(crate) fn accumulate(g: &Graph, cfg: &LayoutConfig, pos: &[Point], out: &mut [Point]) {
    let n = pos.len();
    out.iter_mut().for_each(|f| *f = Point::ZERO);
    if n == 0 {
        return;
    }

    if n > GRID_THRESHOLD {
        grid_repulsion(cfg, pos, out);
    } else {
        for i in 0..n {
            let mut f = Point::ZERO;
            for j in 0..n {
                if i != j {
                    f += repulse(cfg.repulsion_strength, pos[i], pos[j], i, j);
                }
            }
            out[i] = f;
        }
    }

    let l = cfg.ideal_edge_length;
    for &(u, v) in g.edges() {
        let delta = pos[v] - pos[u];
        let d = delta.length();
        if d == 0.0 {
            continue;
        }
        let pull = delta * (SPRING * (d - l) / d);
        out[u] += pull;
        out[v] -= pull;
    }

    let center = pos.iter().fold(Point::ZERO, |acc, &p| acc + p) * (1.0 / n as f64);
    for (f, &p) in out.iter_mut().zip(pos) {
        let to_center = center - p;
        let d = to_center.length();
        if d > 0.0 {
            *f += to_center * (cfg.gravity_strength / d);
        }
    }
}

/// Force on `p` from `q`, magnitude `strength / d²`. Coincident nodes are
/// pushed apart along a direction derived from their indices.
#[inline]
fn repulse(strength: f64, p: Point, q: Point, i: usize, j: usize) -> Point {
    let mut delta = p - q;
    let mut d2 = delta.x * delta.x + delta.y * delta.y;
    if d2 == 0.0 {
        let (lo, hi) = (i.min(j), i.max(j));
        let angle = (lo.wrapping_mul(7919) ^ hi.wrapping_mul(104_729)) as f64;
        let dir = if i < j { 1.0 } else { -1.0 };
        delta = Point::new(angle.cos(), angle.sin()) * (dir * 0.1);
        d2 = 0.01;
    }
    let d2 = d2.max(MIN_DIST_SQ);
    delta * (strength / (d2 * d2.sqrt()))
}

/// Repulsion restricted to the 3x3 block of grid cells around each node,
/// cell size twice the ideal edge length.
fn grid_repulsion(cfg: &LayoutConfig, pos: &[Point], out: &mut [Point]) {
    let cell = 2.0 * cfg.ideal_edge_length;
    // anchor cells at the bounding-box corner so translating the layout
    // translates the result
    let origin = pos.iter().fold(Point::new(f64::INFINITY, f64::INFINITY), |m, p| {
        Point::new(m.x.min(p.x), m.y.min(p.y))
    });
    let key = |p: Point| (((p.x - origin.x) / cell).floor() as i64, ((p.y - origin.y) / cell).floor() as i64);
    let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, &p) in pos.iter().enumerate() {
        cells.entry(key(p)).or_default().push(i);
    }
    for (i, &p) in pos.iter().enumerate() {
        let (cx, cy) = key(p);
        let mut f = Point::ZERO;
        for dy in -1..=1 {
            for dx in -1..=1 {
                if let Some(members) = cells.get(&(cx + dx, cy + dy)) {
                    for &j in members {
                        if j != i {
                            f += repulse(cfg.repulsion_strength, p, pos[j], i, j);
                        }
                    }
                }
            }
        }
        out[i] = f;
    }
}
