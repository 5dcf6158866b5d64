//! Segment direction classification and placement-constraint generation.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::graph::{Graph, NodeIx};
use crate::mapping::NodeLineMapping;
use crate::polyline::SegmentChain;

pub const DEFAULT_EPSILON: f64 = 0.2;

/// Screen-space direction of a segment (y grows downward).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "l-r")]
    LeftRight,
    #[serde(rename = "r-l")]
    RightLeft,
    #[serde(rename = "t-b")]
    TopBottom,
    #[serde(rename = "b-t")]
    BottomTop,
    #[serde(rename = "tl-br")]
    TopLeftBottomRight,
    #[serde(rename = "br-tl")]
    BottomRightTopLeft,
    #[serde(rename = "tr-bl")]
    TopRightBottomLeft,
    #[serde(rename = "bl-tr")]
    BottomLeftTopRight,
}

impl Direction {
    pub fn is_horizontal(self) -> bool {
        matches!(self, Direction::LeftRight | Direction::RightLeft)
    }

    pub fn is_vertical(self) -> bool {
        matches!(self, Direction::TopBottom | Direction::BottomTop)
    }

    pub fn is_diagonal(self) -> bool {
        !self.is_horizontal() && !self.is_vertical()
    }

    /// Direction of the same segment traversed backwards.
    pub fn reversed(self) -> Direction {
        use Direction::*;
        match self {
            LeftRight => RightLeft,
            RightLeft => LeftRight,
            TopBottom => BottomTop,
            BottomTop => TopBottom,
            TopLeftBottomRight => BottomRightTopLeft,
            BottomRightTopLeft => TopLeftBottomRight,
            TopRightBottomLeft => BottomLeftTopRight,
            BottomLeftTopRight => TopRightBottomLeft,
        }
    }

    /// Whether travel along this direction increases x / y, per axis it
    /// constrains. `None` for an axis the direction does not constrain.
    fn increases(self, axis: Axis) -> Option<bool> {
        use Direction::*;
        match (self, axis) {
            (LeftRight | TopLeftBottomRight | BottomLeftTopRight, Axis::Horizontal) => Some(true),
            (RightLeft | BottomRightTopLeft | TopRightBottomLeft, Axis::Horizontal) => Some(false),
            (TopBottom | TopLeftBottomRight | TopRightBottomLeft, Axis::Vertical) => Some(true),
            (BottomTop | BottomRightTopLeft | BottomLeftTopRight, Axis::Vertical) => Some(false),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        use Direction::*;
        match self {
            LeftRight => "l-r",
            RightLeft => "r-l",
            TopBottom => "t-b",
            BottomTop => "b-t",
            TopLeftBottomRight => "tl-br",
            BottomRightTopLeft => "br-tl",
            TopRightBottomLeft => "tr-bl",
            BottomLeftTopRight => "bl-tr",
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies the segment `from → to` with slope threshold `epsilon`.
///
/// Horizontal when `|Δy/Δx| < ε`, else vertical when `|Δx/Δy| < ε`, else
/// diagonal by the signs of `(Δx, Δy)`.
pub fn classify_direction(from: Point, to: Point, epsilon: f64) -> Result<Direction> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid(format!("slope threshold must be positive, got {epsilon}")));
    }
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    if dx == 0.0 && dy == 0.0 {
        return Err(Error::invalid("cannot classify a zero-length segment"));
    }
    if dx != 0.0 && (dy / dx).abs() < epsilon {
        return Ok(if dx > 0.0 { Direction::LeftRight } else { Direction::RightLeft });
    }
    if dy != 0.0 && (dx / dy).abs() < epsilon {
        return Ok(if dy > 0.0 { Direction::TopBottom } else { Direction::BottomTop });
    }
    Ok(match (dx > 0.0, dy > 0.0) {
        (true, true) => Direction::TopLeftBottomRight,
        (false, false) => Direction::BottomRightTopLeft,
        (false, true) => Direction::TopRightBottomLeft,
        (true, false) => Direction::BottomLeftTopRight,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Constrains x.
    Horizontal,
    /// Constrains y.
    Vertical,
}

/// `first` is left of (horizontal) or above (vertical) `second`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelativeConstraint {
    pub first: NodeIx,
    pub second: NodeIx,
    pub axis: Axis,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    pub relative: Vec<RelativeConstraint>,
    /// Groups sharing a y coordinate.
    pub horizontal: Vec<Vec<NodeIx>>,
    /// Groups sharing an x coordinate.
    pub vertical: Vec<Vec<NodeIx>>,
    /// Relative constraints discarded because they would close a cycle
    /// within one axis.
    pub dropped: usize,
}

impl ConstraintSet {
    pub fn is_empty(&self) -> bool {
        self.relative.is_empty() && self.horizontal.is_empty() && self.vertical.is_empty()
    }

    /// Every node mentioned by any constraint.
    pub fn nodes(&self) -> impl Iterator<Item = NodeIx> + '_ {
        self.relative
            .iter()
            .flat_map(|c| [c.first, c.second])
            .chain(self.horizontal.iter().flatten().copied())
            .chain(self.vertical.iter().flatten().copied())
    }

    /// Adds a relative constraint unless it duplicates an existing one,
    /// pairs a node with itself, or would close a directed cycle on its
    /// axis (then counted in `dropped`). Returns whether it was kept.
    pub fn push_relative(&mut self, c: RelativeConstraint) -> bool {
        if c.first == c.second || self.relative.contains(&c) {
            return false;
        }
        if self.reaches(c.axis, c.second, c.first) {
            self.dropped += 1;
            return false;
        }
        self.relative.push(c);
        true
    }

    fn reaches(&self, axis: Axis, from: NodeIx, to: NodeIx) -> bool {
        let mut seen = HashSet::from([from]);
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            for c in self.relative.iter().filter(|c| c.axis == axis && c.first == v) {
                if seen.insert(c.second) {
                    stack.push(c.second);
                }
            }
        }
        false
    }

    /// Keeps only constraints among `keep` nodes; groups shrinking below two
    /// members are removed.
    pub fn restricted(&self, keep: &HashSet<NodeIx>) -> ConstraintSet {
        let groups = |gs: &[Vec<NodeIx>]| {
            gs.iter()
                .map(|g| g.iter().copied().filter(|v| keep.contains(v)).collect::<Vec<_>>())
                .filter(|g| g.len() >= 2)
                .collect()
        };
        ConstraintSet {
            relative: self
                .relative
                .iter()
                .copied()
                .filter(|c| keep.contains(&c.first) && keep.contains(&c.second))
                .collect(),
            horizontal: groups(&self.horizontal),
            vertical: groups(&self.vertical),
            dropped: self.dropped,
        }
    }

    /// Rewrites node indices through `f` (e.g. from a subgraph into its parent).
    pub fn remap(&self, f: impl Fn(NodeIx) -> NodeIx) -> ConstraintSet {
        ConstraintSet {
            relative: self
                .relative
                .iter()
                .map(|c| RelativeConstraint { first: f(c.first), second: f(c.second), axis: c.axis })
                .collect(),
            horizontal: self.horizontal.iter().map(|g| g.iter().map(|&v| f(v)).collect()).collect(),
            vertical: self.vertical.iter().map(|g| g.iter().map(|&v| f(v)).collect()).collect(),
            dropped: self.dropped,
        }
    }

    pub fn to_doc(&self, g: &Graph) -> ConstraintDoc {
        let id = |v: NodeIx| g.id(v).to_owned();
        ConstraintDoc {
            relative_placement: self
                .relative
                .iter()
                .map(|c| match c.axis {
                    Axis::Horizontal => RelativeDoc::LeftRight { left: id(c.first), right: id(c.second) },
                    Axis::Vertical => RelativeDoc::TopBottom { top: id(c.first), bottom: id(c.second) },
                })
                .collect(),
            alignment: AlignmentDoc {
                horizontal: self.horizontal.iter().map(|gr| gr.iter().map(|&v| id(v)).collect()).collect(),
                vertical: self.vertical.iter().map(|gr| gr.iter().map(|&v| id(v)).collect()).collect(),
            },
        }
    }

    pub fn from_doc(doc: &ConstraintDoc, g: &Graph) -> Result<ConstraintSet> {
        let ix = |id: &str| g.ix(id).ok_or_else(|| Error::invalid(format!("constraint references unknown node {id:?}")));
        let mut cs = ConstraintSet::default();
        for r in &doc.relative_placement {
            let c = match r {
                RelativeDoc::LeftRight { left, right } => {
                    RelativeConstraint { first: ix(left)?, second: ix(right)?, axis: Axis::Horizontal }
                }
                RelativeDoc::TopBottom { top, bottom } => {
                    RelativeConstraint { first: ix(top)?, second: ix(bottom)?, axis: Axis::Vertical }
                }
            };
            cs.push_relative(c);
        }
        let groups = |gs: &[Vec<String>]| -> Result<Vec<Vec<NodeIx>>> {
            gs.iter()
                .map(|gr| gr.iter().map(|id| ix(id)).collect::<Result<Vec<_>>>())
                .filter(|gr| gr.as_ref().map_or(true, |v| v.len() >= 2))
                .collect()
        };
        cs.horizontal = groups(&doc.alignment.horizontal)?;
        cs.vertical = groups(&doc.alignment.vertical)?;
        Ok(cs)
    }
}

/// Emits constraints for every segment of `chain` from the nodes mapped to it.
///
/// For each mapped node `v` with parent `q` the segment direction decides
/// the relative constraints: one on the matching axis for horizontal and
/// vertical segments, one per axis for diagonal ones, ordered along the
/// direction of travel (`l-r` puts `q` left of `v`). Horizontal and
/// vertical segments with at least two nodes also align their nodes.
pub fn generate(mapping: &NodeLineMapping, chain: &SegmentChain, epsilon: f64) -> Result<ConstraintSet> {
    if mapping.assignments.len() != chain.len() {
        return Err(Error::invalid(format!(
            "mapping has {} segments but chain has {}",
            mapping.assignments.len(),
            chain.len()
        )));
    }
    let mut cs = ConstraintSet::default();
    for (i, nodes) in mapping.assignments.iter().enumerate() {
        let (a, b) = chain.segment(i);
        let dir = classify_direction(a, b, epsilon)?;
        for &v in nodes {
            let Some(&q) = mapping.parent.get(&v) else { continue };
            for axis in [Axis::Horizontal, Axis::Vertical] {
                if let Some(forward) = dir.increases(axis) {
                    let (first, second) = if forward { (q, v) } else { (v, q) };
                    cs.push_relative(RelativeConstraint { first, second, axis });
                }
            }
        }
        if nodes.len() >= 2 {
            if dir.is_horizontal() {
                cs.horizontal.push(nodes.clone());
            } else if dir.is_vertical() {
                cs.vertical.push(nodes.clone());
            }
        }
    }
    Ok(cs)
}

/// Wire form: `{"relativePlacement": [...], "alignment": {...}}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintDoc {
    #[serde(rename = "relativePlacement")]
    pub relative_placement: Vec<RelativeDoc>,
    pub alignment: AlignmentDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RelativeDoc {
    LeftRight { left: String, right: String },
    TopBottom { top: String, bottom: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentDoc {
    pub horizontal: Vec<Vec<String>>,
    pub vertical: Vec<Vec<String>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::distribute;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn dir(dx: f64, dy: f64) -> Direction {
        classify_direction(Point::ZERO, Point::new(dx, dy), DEFAULT_EPSILON).unwrap()
    }

    #[test]
    fn classification_examples() {
        assert_eq!(dir(10.0, 1.0), Direction::LeftRight);
        assert_eq!(dir(1.0, -10.0), Direction::BottomTop);
        assert_eq!(dir(5.0, 5.0), Direction::TopLeftBottomRight);
        assert_eq!(dir(-5.0, 0.0), Direction::RightLeft);
        assert_eq!(dir(0.0, 3.0), Direction::TopBottom);
        assert_eq!(dir(-4.0, 3.0), Direction::TopRightBottomLeft);
        assert_eq!(dir(4.0, -3.0), Direction::BottomLeftTopRight);
        assert_eq!(dir(-4.0, -3.0), Direction::BottomRightTopLeft);
        // boundary: exactly ε is not below it
        assert_eq!(dir(10.0, 2.0), Direction::TopLeftBottomRight);
        assert!(classify_direction(Point::ZERO, Point::ZERO, 0.2).is_err());
        assert!(classify_direction(Point::ZERO, Point::new(1.0, 0.0), 0.0).is_err());
    }

    fn mapping(assignments: Vec<Vec<NodeIx>>, parent: &[(NodeIx, NodeIx)]) -> NodeLineMapping {
        NodeLineMapping { assignments, parent: parent.iter().copied().collect::<BTreeMap<_, _>>() }
    }

    fn graph() -> Graph {
        Graph::new(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap()
    }

    #[test]
    fn left_right_segment() {
        let chain = SegmentChain::new(vec![Point::ZERO, Point::new(100.0, 0.0)], false).unwrap();
        let cs = generate(&mapping(vec![vec![0, 1, 2]], &[(1, 0), (2, 1)]), &chain, 0.2).unwrap();
        let json = serde_json::to_value(cs.to_doc(&graph())).unwrap();
        assert_eq!(
            json,
            serde_json::json!({
                "relativePlacement": [{"left": "a", "right": "b"}, {"left": "b", "right": "c"}],
                "alignment": {"horizontal": [["a", "b", "c"]], "vertical": []}
            })
        );
    }

    #[test]
    fn diagonal_segment() {
        let chain = SegmentChain::new(vec![Point::ZERO, Point::new(50.0, 50.0)], false).unwrap();
        let cs = generate(&mapping(vec![vec![0, 1]], &[(1, 0)]), &chain, 0.2).unwrap();
        let json = serde_json::to_value(cs.to_doc(&graph())).unwrap();
        assert_eq!(
            json,
            serde_json::json!({
                "relativePlacement": [{"left": "a", "right": "b"}, {"top": "a", "bottom": "b"}],
                "alignment": {"horizontal": [], "vertical": []}
            })
        );
    }

    #[test]
    fn root_without_parent_emits_nothing() {
        let chain = SegmentChain::new(vec![Point::ZERO, Point::new(100.0, 0.0)], false).unwrap();
        let cs = generate(&mapping(vec![vec![0]], &[]), &chain, 0.2).unwrap();
        assert!(cs.is_empty());
    }

    #[test]
    fn segment_count_mismatch() {
        let chain = SegmentChain::new(vec![Point::ZERO, Point::new(100.0, 0.0)], false).unwrap();
        assert!(generate(&mapping(vec![vec![0], vec![1]], &[]), &chain, 0.2).is_err());
    }

    #[test]
    fn cycle_closing_constraints_are_dropped() {
        let mut cs = ConstraintSet::default();
        let h = |first, second| RelativeConstraint { first, second, axis: Axis::Horizontal };
        assert!(cs.push_relative(h(0, 1)));
        assert!(cs.push_relative(h(1, 2)));
        assert!(!cs.push_relative(h(1, 2)));
        assert!(!cs.push_relative(h(2, 0)));
        assert!(!cs.push_relative(h(3, 3)));
        // the other axis is independent
        assert!(cs.push_relative(RelativeConstraint { first: 2, second: 0, axis: Axis::Vertical }));
        assert_eq!(cs.dropped, 1);
        assert_eq!(cs.relative.len(), 3);
        assert_acyclic(&cs);
    }

    #[test]
    fn two_node_loop_deduplicates() {
        // two nodes on opposite horizontal runs emit the same pair twice
        let pts = vec![Point::ZERO, Point::new(100.0, 0.0), Point::new(200.0, 0.0), Point::new(0.0, 5.0), Point::ZERO];
        let chain = SegmentChain::new(pts, true).unwrap();
        let m = distribute(&[0, 1], &chain).unwrap();
        let cs = generate(&m, &chain, 0.2).unwrap();
        assert_eq!(cs.relative.len(), 1);
        assert_acyclic(&cs);
    }

    #[test]
    fn doc_round_trip() {
        let g = graph();
        let mut cs = ConstraintSet::default();
        cs.push_relative(RelativeConstraint { first: 0, second: 2, axis: Axis::Vertical });
        cs.horizontal.push(vec![1, 2]);
        let doc = cs.to_doc(&g);
        assert_eq!(ConstraintSet::from_doc(&doc, &g).unwrap(), cs);
    }

    fn assert_acyclic(cs: &ConstraintSet) {
        for axis in [Axis::Horizontal, Axis::Vertical] {
            // Kahn's algorithm over the constrained nodes
            let edges: Vec<_> = cs.relative.iter().filter(|c| c.axis == axis).collect();
            let mut nodes: Vec<NodeIx> = edges.iter().flat_map(|c| [c.first, c.second]).collect();
            nodes.sort_unstable();
            nodes.dedup();
            let mut indeg: BTreeMap<NodeIx, usize> = nodes.iter().map(|&v| (v, 0)).collect();
            for c in &edges {
                *indeg.get_mut(&c.second).unwrap() += 1;
            }
            let mut ready: Vec<NodeIx> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&v, _)| v).collect();
            let mut done = 0;
            while let Some(v) = ready.pop() {
                done += 1;
                for c in edges.iter().filter(|c| c.first == v) {
                    let d = indeg.get_mut(&c.second).unwrap();
                    *d -= 1;
                    if *d == 0 {
                        ready.push(c.second);
                    }
                }
            }
            assert_eq!(done, nodes.len(), "cycle on {axis:?}");
        }
    }

    proptest! {
        #[test]
        fn scale_invariance(dx in -100.0f64..100.0, dy in -100.0f64..100.0, k in 0.01f64..100.0) {
            prop_assume!(dx.abs() > 1e-6 || dy.abs() > 1e-6);
            let d1 = classify_direction(Point::ZERO, Point::new(dx, dy), 0.2).unwrap();
            let d2 = classify_direction(Point::ZERO, Point::new(dx * k, dy * k), 0.2).unwrap();
            prop_assert_eq!(d1, d2);
        }

        #[test]
        fn reversal_symmetry(x0 in -50.0f64..50.0, y0 in -50.0f64..50.0, dx in -50.0f64..50.0, dy in -50.0f64..50.0) {
            prop_assume!(dx.abs() > 1e-3 || dy.abs() > 1e-3);
            let (a, b) = (Point::new(x0, y0), Point::new(x0 + dx, y0 + dy));
            let fwd = classify_direction(a, b, 0.2).unwrap();
            let back = classify_direction(b, a, 0.2).unwrap();
            prop_assert_eq!(fwd.reversed(), back);
        }

        #[test]
        fn generated_sets_are_well_formed(
            pts in proptest::collection::vec((0i32..20, 0i32..20), 2..8),
            n in 1usize..40,
            closed in any::<bool>(),
        ) {
            let mut points: Vec<Point> = pts.iter().map(|&(x, y)| Point::new(f64::from(x * 10), f64::from(y * 10))).collect();
            points.dedup();
            if closed {
                let first = points[0];
                points.push(first);
                points.dedup();
            }
            prop_assume!(points.len() >= 2);
            let closed = closed && points.len() >= 4 && points[0] == points[points.len() - 1];
            prop_assume!(points[0] != points[points.len() - 1] || closed);
            let chain = SegmentChain::new(points, closed).unwrap();
            let order: Vec<NodeIx> = (0..n).collect();
            let m = distribute(&order, &chain).unwrap();
            let cs = generate(&m, &chain, 0.2).unwrap();
            assert_acyclic(&cs);
            for c in &cs.relative {
                prop_assert!(c.first != c.second);
            }
            for g in cs.horizontal.iter().chain(&cs.vertical) {
                prop_assert!(g.len() >= 2);
                let seg = m.segment_of(g[0]).unwrap();
                prop_assert_eq!(g, &m.assignments[seg]);
            }
            if !closed {
                prop_assert_eq!(cs.dropped, 0);
            }
            // every parented node contributes unless its constraints were
            // deduplicated or dropped; diagonal segments give two per pair
            let emitted: usize = m.assignments.iter().enumerate().map(|(i, nodes)| {
                let (a, b) = chain.segment(i);
                let d = classify_direction(a, b, 0.2).unwrap();
                let per = if d.is_diagonal() { 2 } else { 1 };
                per * nodes.iter().filter(|v| m.parent.contains_key(v)).count()
            }).sum();
            prop_assert!(cs.relative.len() + cs.dropped <= emitted);
            if !closed {
                prop_assert_eq!(cs.relative.len(), emitted);
            }
        }
    }
}
