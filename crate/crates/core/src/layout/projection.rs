//! Constraint projection: Gauss-Seidel sweeps over relative-placement gaps
//! and alignment groups.

use crate::constraints::{Axis, ConstraintSet};
use crate::geom::Point;

/// Cross-axis pull toward the group mean per sweep.
const ALIGN_RELAXATION: f64 = 0.5;

/// Alignment spread below this does not count as a violation.
const ALIGN_SLACK: f64 = 1e-3;

fn coord(p: &mut Point, axis: Axis) -> &mut f64 {
    match axis {
        Axis::Horizontal => &mut p.x,
        Axis::Vertical => &mut p.y,
    }
}

/// Runs up to `max_sweeps` sweeps, stopping early once nothing is violated.
/// Returns whether the last sweep found no violation.
pub(crate) fn project(
    cs: &ConstraintSet,
    pos: &mut [Point],
    pinned: &[bool],
    min_gap: f64,
    max_sweeps: usize,
) -> bool {
    for _ in 0..max_sweeps {
        if !sweep(cs, pos, pinned, min_gap) {
            return true;
        }
    }
    false
}

/// Closing pass that makes a feasible set exact rather than approximately
/// satisfied. Symmetric sweeps spread a compressed chain of `k` gaps only
/// diffusively (on the order of `k^2` sweeps), so after them alignment
/// groups are snapped onto their mean (or onto their pinned members) and
/// each axis gets one longest-path pass in topological order. Nodes aligned
/// on that axis move as one block, so the pass keeps alignment intact. A
/// constraint whose `second` block is pinned pulls `first` back instead,
/// which may leave it violated if that block is pinned too.
pub(crate) fn settle(cs: &ConstraintSet, pos: &mut [Point], pinned: &[bool], min_gap: f64) {
    for (groups, cross) in [(&cs.horizontal, Axis::Vertical), (&cs.vertical, Axis::Horizontal)] {
        for group in groups {
            let anchored: Vec<f64> = group.iter().filter(|&&v| pinned[v]).map(|&v| *coord(&mut pos[v], cross)).collect();
            let target = if anchored.is_empty() {
                group.iter().map(|&v| *coord(&mut pos[v], cross)).sum::<f64>() / group.len() as f64
            } else {
                anchored.iter().sum::<f64>() / anchored.len() as f64
            };
            for &v in group.iter().filter(|&&v| !pinned[v]) {
                *coord(&mut pos[v], cross) = target;
            }
        }
    }
    for (axis, groups) in [(Axis::Horizontal, &cs.vertical), (Axis::Vertical, &cs.horizontal)] {
        longest_path(cs, axis, groups, pos, pinned, min_gap);
    }
}

/// Longest-path placement on one axis over blocks of nodes that share the
/// coordinate. Blocks caught in a cycle are left where they are.
fn longest_path(
    cs: &ConstraintSet,
    axis: Axis,
    groups: &[Vec<usize>],
    pos: &mut [Point],
    pinned: &[bool],
    min_gap: f64,
) {
    let n = pos.len();
    let mut block: Vec<usize> = (0..n).collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    for group in groups {
        let root = block[group[0]];
        for &v in &group[1..] {
            let b = block[v];
            if b != root {
                let moved = std::mem::take(&mut members[b]);
                for &m in &moved {
                    block[m] = root;
                }
                members[root].extend(moved);
            }
        }
    }
    let fixed: Vec<bool> = members.iter().map(|ms| ms.iter().any(|&m| pinned[m])).collect();

    let edges: Vec<(usize, usize)> = cs
        .relative
        .iter()
        .filter(|c| c.axis == axis)
        .map(|c| (block[c.first], block[c.second]))
        .filter(|(a, b)| a != b)
        .collect();
    let mut indegree = vec![0usize; n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &edges {
        indegree[b] += 1;
        out[a].push(b);
    }

    let value = |pos: &mut [Point], b: usize| *coord(&mut pos[members[b][0]], axis);
    let mut ready: Vec<usize> = (0..n).filter(|&b| indegree[b] == 0 && !out[b].is_empty()).collect();
    ready.reverse();
    while let Some(a) = ready.pop() {
        for &b in &out[a] {
            let (va, vb) = (value(pos, a), value(pos, b));
            if vb - va < min_gap {
                let (target, to) = if !fixed[b] {
                    (b, va + min_gap)
                } else if !fixed[a] {
                    (a, vb - min_gap)
                } else {
                    (b, vb)
                };
                for &m in &members[target] {
                    *coord(&mut pos[m], axis) = to;
                }
            }
            indegree[b] -= 1;
            if indegree[b] == 0 {
                ready.push(b);
            }
        }
    }
}

/// One pass over every constraint. Returns whether any was violated.
fn sweep(cs: &ConstraintSet, pos: &mut [Point], pinned: &[bool], min_gap: f64) -> bool {
    let mut violated = false;
    for c in &cs.relative {
        let a = *coord(&mut pos[c.first], c.axis);
        let b = *coord(&mut pos[c.second], c.axis);
        let deficit = min_gap - (b - a);
        if deficit <= 0.0 {
            continue;
        }
        violated = true;
        let (share_first, share_second) = match (pinned[c.first], pinned[c.second]) {
            (false, false) => (0.5, 0.5),
            (true, false) => (0.0, 1.0),
            (false, true) => (1.0, 0.0),
            (true, true) => continue,
        };
        *coord(&mut pos[c.first], c.axis) -= deficit * share_first;
        *coord(&mut pos[c.second], c.axis) += deficit * share_second;
    }

    // horizontal alignment shares y, vertical alignment shares x
    for (groups, cross) in [(&cs.horizontal, Axis::Vertical), (&cs.vertical, Axis::Horizontal)] {
        for group in groups {
            let mean = group.iter().map(|&v| *coord(&mut pos[v], cross)).sum::<f64>() / group.len() as f64;
            for &v in group {
                let c = coord(&mut pos[v], cross);
                let off = mean - *c;
                if off.abs() > ALIGN_SLACK {
                    violated = true;
                }
                if !pinned[v] {
                    *c += ALIGN_RELAXATION * off;
                }
            }
        }
    }
    violated
}
