//! Polyline simplification and segment-chain assembly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{path_length, point_segment_distance, Point};
use crate::raster::RasterPolyline;

/// Fraction of total stroke length the chain must cover.
const MIN_COVERAGE: f64 = 0.6;

pub const DEFAULT_OFFSET_THRESHOLD: f64 = 5.0;

/// Default simplification tolerance: this percentage of the image diagonal.
pub const DEFAULT_TOLERANCE_PCT: f64 = 2.0;

/// Ordered line segments sharing endpoints, `l_i = (p_i, p_{i+1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentChain {
    pub closed: bool,
    pub points: Vec<Point>,
}

impl SegmentChain {
    /// Validates the chain invariants: at least one segment, no repeated
    /// consecutive points, and `closed` iff the last point equals the first.
    pub fn new(points: Vec<Point>, closed: bool) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("segment chain needs at least two points"));
        }
        if let Some(i) = points.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::ZeroLengthSegment(i));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("segment chain has non-finite coordinates"));
        }
        let loops = points[0] == points[points.len() - 1];
        if closed != loops {
            return Err(Error::invalid(if closed {
                "closed chain must end where it starts"
            } else {
                "open chain must not end where it starts"
            }));
        }
        Ok(SegmentChain { closed, points })
    }

    /// Number of segments `n`.
    pub fn len(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn segment(&self, i: usize) -> (Point, Point) {
        (self.points[i], self.points[i + 1])
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        self.segments().map(|(a, b)| a.distance(b)).collect()
    }

    pub fn total_length(&self) -> f64 {
        path_length(&self.points)
    }
}

/// Indices of the points kept by radial-distance + Ramer-Douglas-Peucker
/// simplification. Always contains the first and last index.
///
/// The radial pass drops points closer than `tolerance` to the last kept
/// point; RDP then runs on the survivors. Afterwards every span between
/// kept points is checked against all original points and refined with RDP
/// where a dropped point would otherwise sit farther than `tolerance` from
/// the result.
pub fn simplify_indices(points: &[Point], tolerance: f64) -> Vec<usize> {
    let n = points.len();
    if n <= 2 {
        return (0..n).collect();
    }

    let mut radial = vec![0];
    let mut prev = points[0];
    for (i, &p) in points.iter().enumerate().take(n - 1).skip(1) {
        if p.distance(prev) >= tolerance {
            radial.push(i);
            prev = p;
        }
    }
    radial.push(n - 1);

    let mut keep = vec![false; radial.len()];
    keep[0] = true;
    keep[radial.len() - 1] = true;
    rdp_mark(&radial, points, tolerance, 0, radial.len() - 1, &mut keep);
    let coarse: Vec<usize> = radial
        .iter()
        .zip(&keep)
        .filter_map(|(&i, &k)| k.then_some(i))
        .collect();

    let all: Vec<usize> = (0..n).collect();
    let mut exact = vec![false; n];
    for w in coarse.windows(2) {
        exact[w[0]] = true;
        exact[w[1]] = true;
        rdp_mark(&all, points, tolerance, w[0], w[1], &mut exact);
    }
    (0..n).filter(|&i| exact[i]).collect()
}

/// Marks the points of `ids[first..=last]` that RDP keeps. Iterative to
/// avoid deep recursion on long strokes.
fn rdp_mark(ids: &[usize], pts: &[Point], tolerance: f64, first: usize, last: usize, keep: &mut [bool]) {
    let mut stack = vec![(first, last)];
    while let Some((lo, hi)) = stack.pop() {
        if hi <= lo + 1 {
            continue;
        }
        let (a, b) = (pts[ids[lo]], pts[ids[hi]]);
        let mut worst = (0.0, lo);
        for k in lo + 1..hi {
            let d = point_segment_distance(pts[ids[k]], a, b);
            if d > worst.0 {
                worst = (d, k);
            }
        }
        if worst.0 > tolerance {
            keep[worst.1] = true;
            stack.push((lo, worst.1));
            stack.push((worst.1, hi));
        }
    }
}

/// Simplifies a real-valued polyline; see [`simplify_indices`].
pub fn simplify_points(points: &[Point], tolerance: f64) -> Vec<Point> {
    simplify_indices(points, tolerance)
        .into_iter()
        .map(|i| points[i])
        .collect()
}

/// Simplifies a traced polyline. An open polyline becomes a subsequence of
/// the input that keeps both endpoints.
///
/// A closed one (first point equals last) is treated as a loop: where the
/// tracer happened to start it carries no meaning, so the start vertex is
/// dropped too when the loop stays within `tolerance` without it. The result
/// is again closed and visits a subset of the input points in loop order.
pub fn simplify(line: &RasterPolyline, tolerance: f64) -> RasterPolyline {
    let n = line.points.len();
    if n >= 4 && line.points[0] == line.points[n - 1] {
        return simplify_loop(line, tolerance);
    }
    let pts: Vec<Point> = line.points.iter().map(|&p| p.into()).collect();
    let points = simplify_indices(&pts, tolerance)
        .into_iter()
        .map(|i| line.points[i])
        .collect();
    RasterPolyline { points }
}

fn simplify_loop(line: &RasterPolyline, tolerance: f64) -> RasterPolyline {
    let ring = &line.points[..line.points.len() - 1];
    let m = ring.len();
    let at = |i: usize| -> Point { ring[i % m].into() };

    // restart the loop at the point farthest from the traced start, which
    // is an extreme point of the stroke rather than an arbitrary one
    let start = (0..m)
        .max_by(|&a, &b| at(a).distance(at(0)).total_cmp(&at(b).distance(at(0))).then(b.cmp(&a)))
        .expect("ring is non-empty");
    let rotated: Vec<Point> = (start..=start + m).map(at).collect();
    let mut kept = simplify_indices(&rotated, tolerance);

    // kept = [0, .., m]; try dropping the shared start/end vertex
    if kept.len() >= 5 {
        let (prev, next) = (kept[kept.len() - 2], kept[1]);
        let (a, b) = (rotated[prev], rotated[next]);
        let fits = (prev..m).chain(0..=next).all(|i| point_segment_distance(rotated[i], a, b) <= tolerance);
        if fits {
            kept.pop();
            kept.remove(0);
            kept.push(kept[0]);
        }
    }
    RasterPolyline { points: kept.into_iter().map(|i| ring[(start + i) % m]).collect() }
}

/// Tolerance for a sketch of the given size from a percentage of its diagonal.
pub fn tolerance_for(width: u32, height: u32, pct: f64) -> f64 {
    f64::from(width).hypot(f64::from(height)) * pct / 100.0
}

/// Chains polylines into one ordered segment list.
///
/// Starts from the longest polyline and greedily attaches, at the chain's
/// tail and then at its head, the unused polyline with an endpoint nearest
/// to that end, provided it is within `offset_threshold`. Attached pieces
/// are snapped onto the existing end. The chain is closed when its two ends
/// finish within `offset_threshold` of each other and it has at least three
/// segments.
///
/// Fails with [`Error::SketchNotChainable`] when the chain covers less than
/// 60% of the total input length.
pub fn assemble_chain(lines: &[RasterPolyline], offset_threshold: f64) -> Result<SegmentChain> {
    if offset_threshold < 0.0 || !offset_threshold.is_finite() {
        return Err(Error::invalid("offset threshold must be a finite non-negative distance"));
    }
    let pieces: Vec<Vec<Point>> = lines
        .iter()
        .filter(|l| l.points.len() >= 2)
        .map(|l| {
            let mut pts: Vec<Point> = l.points.iter().map(|&p| p.into()).collect();
            pts.dedup();
            pts
        })
        .filter(|p| p.len() >= 2)
        .collect();
    let lengths: Vec<f64> = pieces.iter().map(|p| path_length(p)).collect();
    let total: f64 = lengths.iter().sum();
    if pieces.is_empty() || total <= 0.0 {
        return Err(Error::SketchNotChainable { covered: 0.0 });
    }

    let start = (0..pieces.len())
        .max_by(|&a, &b| lengths[a].total_cmp(&lengths[b]).then(b.cmp(&a)))
        .expect("non-empty");
    let mut used = vec![false; pieces.len()];
    used[start] = true;
    let mut chain = pieces[start].clone();

    // tail first, then the head (by extending the reversed chain)
    for pass in 0..2 {
        if pass == 1 {
            chain.reverse();
        }
        while chain.first() != chain.last() {
            let tail = *chain.last().expect("non-empty");
            let candidate = pieces
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .flat_map(|(i, p)| {
                    [(i, false, p[0].distance(tail)), (i, true, p[p.len() - 1].distance(tail))]
                })
                .filter(|(_, _, d)| *d <= offset_threshold)
                .min_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));
            let Some((i, reversed, _)) = candidate else { break };
            used[i] = true;
            let mut next = pieces[i].clone();
            if reversed {
                next.reverse();
            }
            chain.extend(next.into_iter().skip(1));
            chain.dedup();
        }
    }
    chain.reverse();

    let covered: f64 = (0..pieces.len()).filter(|&i| used[i]).map(|i| lengths[i]).sum();
    if covered < MIN_COVERAGE * total {
        return Err(Error::SketchNotChainable { covered: 100.0 * covered / total });
    }

    let first = chain[0];
    let last_i = chain.len() - 1;
    let mut closed = false;
    if chain.len() >= 4 && chain[last_i].distance(first) <= offset_threshold {
        chain[last_i] = first;
        chain.dedup();
        closed = chain.len() >= 4;
        if !closed {
            chain.pop();
        }
    }
    SegmentChain::new(chain, closed)
}
