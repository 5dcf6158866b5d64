//! Constrained spring embedder.
//!
//! Each iteration applies spring, repulsion and gravity forces, caps the
//! per-node step, then projects positions onto the relative-placement and
//! alignment constraints. A short unconstrained polish pass follows.

mod forces;
mod projection;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constraints::{Axis, ConstraintSet};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::graph::{Graph, NodeIx};

/// Projection sweeps per iteration.
const SWEEPS_PER_ITERATION: usize = 10;

/// Symmetric sweeps before the exact closing pass.
const SETTLE_SWEEPS: usize = 100;

/// Slack allowed when reporting a relative constraint as satisfied.
pub const GAP_TOLERANCE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutConfig {
    pub iterations: usize,
    pub ideal_edge_length: f64,
    pub repulsion_strength: f64,
    pub gravity_strength: f64,
    pub min_gap: f64,
    pub polish_iterations: usize,
    /// Per-iteration displacement cap; half the ideal edge length when unset.
    pub max_step: Option<f64>,
    pub cooling: f64,
    pub seed: u64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            iterations: 500,
            ideal_edge_length: 50.0,
            repulsion_strength: 4500.0,
            gravity_strength: 0.25,
            min_gap: 40.0,
            polish_iterations: 30,
            max_step: None,
            cooling: 0.99,
            seed: 0,
        }
    }
}

impl LayoutConfig {
    pub fn max_step(&self) -> f64 {
        self.max_step.unwrap_or(self.ideal_edge_length / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be a positive finite number, got {v}")))
            }
        };
        positive("ideal_edge_length", self.ideal_edge_length)?;
        positive("min_gap", self.min_gap)?;
        positive("max_step", self.max_step())?;
        for (name, v) in [("repulsion_strength", self.repulsion_strength), ("gravity_strength", self.gravity_strength)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        if !(self.cooling > 0.0 && self.cooling <= 1.0) {
            return Err(Error::invalid(format!("cooling must lie in (0, 1], got {}", self.cooling)));
        }
        Ok(())
    }
}

/// Constraint satisfaction measured on a set of positions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LayoutReport {
    /// Relative constraints with gap at least `min_gap - 1`.
    pub relative_satisfied: usize,
    /// Relative constraints whose order holds at all (gap at least 0).
    pub relative_ordered: usize,
    pub relative_total: usize,
    pub alignment_max_deviation: f64,
    pub dropped_constraints: usize,
}

impl LayoutReport {
    pub fn measure(positions: &[Point], cs: &ConstraintSet, min_gap: f64) -> LayoutReport {
        let mut report = LayoutReport {
            relative_total: cs.relative.len(),
            dropped_constraints: cs.dropped,
            ..Default::default()
        };
        for c in &cs.relative {
            let gap = axis_gap(positions, c.first, c.second, c.axis);
            if gap >= min_gap - GAP_TOLERANCE {
                report.relative_satisfied += 1;
            }
            if gap >= 0.0 {
                report.relative_ordered += 1;
            }
        }
        let spread = |groups: &[Vec<NodeIx>], pick: fn(Point) -> f64| {
            groups
                .iter()
                .map(|g| {
                    let mean = g.iter().map(|&v| pick(positions[v])).sum::<f64>() / g.len() as f64;
                    g.iter().map(|&v| (pick(positions[v]) - mean).abs()).fold(0.0, f64::max)
                })
                .fold(0.0, f64::max)
        };
        report.alignment_max_deviation = spread(&cs.horizontal, |p| p.y).max(spread(&cs.vertical, |p| p.x));
        report
    }

    pub fn all_satisfied(&self) -> bool {
        self.relative_satisfied == self.relative_total
    }
}

fn axis_gap(pos: &[Point], first: NodeIx, second: NodeIx, axis: Axis) -> f64 {
    match axis {
        Axis::Horizontal => pos[second].x - pos[first].x,
        Axis::Vertical => pos[second].y - pos[first].y,
    }
}

/// Positions indexed by node, plus the satisfaction report.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutResult {
    pub positions: Vec<Point>,
    pub report: LayoutReport,
}

/// Wire form keyed by node id, in graph order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutDoc {
    pub positions: IndexMap<String, Point>,
    #[serde(default)]
    pub report: LayoutReport,
}

impl LayoutResult {
    pub fn to_doc(&self, g: &Graph) -> LayoutDoc {
        LayoutDoc {
            positions: g.ids().iter().cloned().zip(self.positions.iter().copied()).collect(),
            report: self.report,
        }
    }

    pub fn to_json(&self, g: &Graph) -> String {
        serde_json::to_string_pretty(&self.to_doc(g)).expect("layout serializes")
    }
}

impl LayoutDoc {
    /// Positions ordered by node index; every node must be present.
    pub fn positions_for(&self, g: &Graph) -> Result<Vec<Point>> {
        positions_from_map(&self.positions, g)
    }
}

/// Reads a `{"id": [x, y]}` map into index order. Extra ids are rejected.
pub fn positions_from_map(map: &IndexMap<String, Point>, g: &Graph) -> Result<Vec<Point>> {
    let mut out = vec![None; g.node_count()];
    for (id, &p) in map {
        let ix = g.ix(id).ok_or_else(|| Error::invalid(format!("position given for unknown node {id:?}")))?;
        if !p.is_finite() {
            return Err(Error::invalid(format!("position of node {id:?} is not finite")));
        }
        out[ix] = Some(p);
    }
    out.into_iter()
        .enumerate()
        .map(|(ix, p)| p.ok_or_else(|| Error::invalid(format!("no position for node {:?}", g.id(ix)))))
        .collect()
}

/// Deterministic start positions in a disk of radius `sqrt(n) * L`.
pub fn initial_positions(n: usize, cfg: &LayoutConfig) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let radius = (n as f64).sqrt() * cfg.ideal_edge_length;
    (0..n)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let theta = std::f64::consts::TAU * rng.random::<f64>();
            Point::new(r * theta.cos(), r * theta.sin())
        })
        .collect()
}

/// Force-directed layout with per-iteration constraint projection.
pub fn constrained_layout(
    g: &Graph,
    cs: &ConstraintSet,
    cfg: &LayoutConfig,
    initial: Option<&[Point]>,
) -> Result<LayoutResult> {
    let pinned = vec![false; g.node_count()];
    constrained_layout_pinned(g, cs, cfg, initial, &pinned)
}

/// Unconstrained force iterations with the step capped at a quarter of the
/// ideal edge length. `cs` only feeds the report.
pub fn polish(g: &Graph, start: &LayoutResult, cs: &ConstraintSet, cfg: &LayoutConfig) -> Result<LayoutResult> {
    let pinned = vec![false; g.node_count()];
    polish_pinned(g, start, cs, cfg, &pinned)
}

/// Lays out `selection` with every other node pinned at its prior position.
/// `cs` must only reference selected nodes.
pub fn incremental_layout(
    g: &Graph,
    selection: &[NodeIx],
    cs: &ConstraintSet,
    prior: &[Point],
    cfg: &LayoutConfig,
) -> Result<LayoutResult> {
    check_positions(g, prior)?;
    let mut pinned = vec![true; g.node_count()];
    for &v in selection {
        if v >= g.node_count() {
            return Err(Error::invalid(format!("selected node index {v} out of range")));
        }
        pinned[v] = false;
    }
    if let Some(v) = cs.nodes().find(|&v| v >= g.node_count() || pinned[v]) {
        return Err(Error::invalid(format!("constraint references unselected node index {v}")));
    }
    if selection.is_empty() {
        return Ok(LayoutResult {
            positions: prior.to_vec(),
            report: LayoutReport::measure(prior, cs, cfg.min_gap),
        });
    }
    let constrained = constrained_layout_pinned(g, cs, cfg, Some(prior), &pinned)?;
    polish_pinned(g, &constrained, cs, cfg, &pinned)
}

fn check_positions(g: &Graph, positions: &[Point]) -> Result<()> {
    if positions.len() != g.node_count() {
        return Err(Error::invalid(format!(
            "expected {} positions, got {}",
            g.node_count(),
            positions.len()
        )));
    }
    if positions.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid("positions must be finite"));
    }
    Ok(())
}

/// [`constrained_layout`] with `pinned[v]` nodes held in place.
pub fn constrained_layout_pinned(
    g: &Graph,
    cs: &ConstraintSet,
    cfg: &LayoutConfig,
    initial: Option<&[Point]>,
    pinned: &[bool],
) -> Result<LayoutResult> {
    cfg.validate()?;
    let n = g.node_count();
    if pinned.len() != n {
        return Err(Error::invalid("pin mask must cover every node"));
    }
    if let Some(v) = cs.nodes().find(|&v| v >= n) {
        return Err(Error::invalid(format!("constraint references node index {v} outside the graph")));
    }
    let mut pos = match initial {
        Some(p) => {
            check_positions(g, p)?;
            p.to_vec()
        }
        None => initial_positions(n, cfg),
    };

    let mut force = vec![Point::ZERO; n];
    let mut cap = cfg.max_step();
    for _ in 0..cfg.iterations {
        step(g, cfg, &mut pos, &mut force, pinned, cap)?;
        projection::project(cs, &mut pos, pinned, cfg.min_gap, SWEEPS_PER_ITERATION);
        cap *= cfg.cooling;
    }
    // ten sweeps per iteration do not absorb residual violations on long
    // constraint chains; finish symmetrically where possible, then exactly
    if !projection::project(cs, &mut pos, pinned, cfg.min_gap, SETTLE_SWEEPS) {
        projection::settle(cs, &mut pos, pinned, cfg.min_gap);
    }
    guard(&pos)?;

    let report = LayoutReport::measure(&pos, cs, cfg.min_gap);
    Ok(LayoutResult { positions: pos, report })
}

/// [`polish`] with `pinned[v]` nodes held in place.
pub fn polish_pinned(
    g: &Graph,
    start: &LayoutResult,
    cs: &ConstraintSet,
    cfg: &LayoutConfig,
    pinned: &[bool],
) -> Result<LayoutResult> {
    cfg.validate()?;
    check_positions(g, &start.positions)?;
    if pinned.len() != g.node_count() {
        return Err(Error::invalid("pin mask must cover every node"));
    }
    let mut pos = start.positions.clone();
    let mut force = vec![Point::ZERO; pos.len()];
    let mut cap = cfg.max_step().min(cfg.ideal_edge_length / 4.0);
    for _ in 0..cfg.polish_iterations {
        step(g, cfg, &mut pos, &mut force, pinned, cap)?;
        cap *= cfg.cooling;
    }
    let report = LayoutReport::measure(&pos, cs, cfg.min_gap);
    Ok(LayoutResult { positions: pos, report })
}

/// One force iteration with every free node's displacement capped at `cap`.
fn step(
    g: &Graph,
    cfg: &LayoutConfig,
    pos: &mut [Point],
    force: &mut [Point],
    pinned: &[bool],
    cap: f64,
) -> Result<()> {
    forces::accumulate(g, cfg, pos, force);
    for ((p, &f), &fixed) in pos.iter_mut().zip(force.iter()).zip(pinned) {
        if fixed {
            continue;
        }
        let len = f.length();
        if !len.is_finite() {
            return Err(Error::NumericFailure("force is not finite".into()));
        }
        *p += if len > cap { f * (cap / len) } else { f };
    }
    guard(pos)
}

fn guard(pos: &[Point]) -> Result<()> {
    if pos.iter().all(|p| p.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericFailure("position is not finite".into()))
    }
}
