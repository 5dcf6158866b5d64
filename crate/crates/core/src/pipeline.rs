//! End-to-end orchestration: sketch to segment chain, graph to node order,
//! mapping to constraints, constraints to positions.

use std::collections::{BTreeMap, HashSet};

use image::DynamicImage;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::constraints::{self, ConstraintDoc, ConstraintSet, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::graph::{Graph, NodeIx};
use crate::layout::{self, LayoutConfig, LayoutReport, LayoutResult};
use crate::mapping::{self, NodeLineMapping, DEFAULT_TAU_FACTOR};
use crate::polyline::{self, SegmentChain, DEFAULT_OFFSET_THRESHOLD, DEFAULT_TOLERANCE_PCT};
use crate::raster::{self, BinaryImage, RasterPolyline, TraceOptions, DEFAULT_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RasterConfig {
    pub threshold: u8,
    pub invert: bool,
    pub chunk_size: u32,
}

impl Default for RasterConfig {
    fn default() -> Self {
        RasterConfig { threshold: DEFAULT_THRESHOLD, invert: false, chunk_size: TraceOptions::default().chunk_size }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolylineConfig {
    /// Simplification tolerance as a percentage of the image diagonal.
    pub tolerance_pct: f64,
    pub offset_threshold: f64,
}

impl Default for PolylineConfig {
    fn default() -> Self {
        PolylineConfig { tolerance_pct: DEFAULT_TOLERANCE_PCT, offset_threshold: DEFAULT_OFFSET_THRESHOLD }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MappingConfig {
    pub tau_factor: f64,
}

impl Default for MappingConfig {
    fn default() -> Self {
        MappingConfig { tau_factor: DEFAULT_TAU_FACTOR }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstraintConfig {
    pub epsilon: f64,
}

impl Default for ConstraintConfig {
    fn default() -> Self {
        ConstraintConfig { epsilon: DEFAULT_EPSILON }
    }
}

/// Every stage's options. `seed` drives both the BFS start node and the
/// layout initialization; the seed inside `layout` is ignored.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub raster: RasterConfig,
    pub polyline: PolylineConfig,
    pub mapping: MappingConfig,
    pub constraints: ConstraintConfig,
    pub layout: LayoutConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.raster.chunk_size == 0 {
            return Err(Error::invalid("chunk_size must be at least 1"));
        }
        let p = &self.polyline;
        if !(p.tolerance_pct.is_finite() && p.tolerance_pct >= 0.0) {
            return Err(Error::invalid("tolerance_pct must be finite and non-negative"));
        }
        if !(p.offset_threshold.is_finite() && p.offset_threshold >= 0.0) {
            return Err(Error::invalid("offset_threshold must be finite and non-negative"));
        }
        if !(self.mapping.tau_factor.is_finite() && self.mapping.tau_factor >= 0.0) {
            return Err(Error::invalid("tau_factor must be finite and non-negative"));
        }
        if !(self.constraints.epsilon.is_finite() && self.constraints.epsilon > 0.0) {
            return Err(Error::invalid("epsilon must be a positive finite number"));
        }
        self.layout_config().validate()
    }

    /// The layout options with the pipeline seed applied.
    pub fn layout_config(&self) -> LayoutConfig {
        LayoutConfig { seed: self.seed, ..self.layout.clone() }
    }
}

/// How the node order was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Closed chain and an accepted cycle.
    Cycle,
    /// Two-pass BFS order.
    Bfs,
    /// No usable chain or core; laid out without constraints.
    Unconstrained,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    /// Final positions, after polish.
    pub layout: LayoutResult,
    /// Satisfaction measured at the end of the constrained phase.
    pub constrained_report: LayoutReport,
    pub polylines: Vec<RasterPolyline>,
    pub chain: Option<SegmentChain>,
    pub mapping: Option<NodeLineMapping>,
    pub constraints: ConstraintSet,
    pub strategy: Strategy,
    pub warnings: Vec<String>,
}

/// Wire form of a pipeline run, keyed by node id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDoc {
    pub positions: IndexMap<String, Point>,
    pub report: LayoutReport,
    pub constrained_report: LayoutReport,
    pub chain: Option<SegmentChain>,
    /// Node ids per chain segment.
    pub mapping: Option<Vec<Vec<String>>>,
    pub constraints: ConstraintDoc,
    pub strategy: Strategy,
    pub warnings: Vec<String>,
}

impl PipelineOutput {
    pub fn fell_back(&self) -> bool {
        self.strategy == Strategy::Unconstrained
    }

    pub fn to_doc(&self, g: &Graph) -> OutputDoc {
        let layout = self.layout.to_doc(g);
        OutputDoc {
            positions: layout.positions,
            report: layout.report,
            constrained_report: self.constrained_report,
            chain: self.chain.clone(),
            mapping: self.mapping.as_ref().map(|m| {
                m.assignments.iter().map(|seg| seg.iter().map(|&v| g.id(v).to_owned()).collect()).collect()
            }),
            constraints: self.constraints.to_doc(g),
            strategy: self.strategy,
            warnings: self.warnings.clone(),
        }
    }
}

/// Thinning followed by skeleton tracing.
pub fn skeletonize(sketch: &BinaryImage, cfg: &PipelineConfig) -> Vec<RasterPolyline> {
    let skeleton = raster::thin(sketch);
    let opts = TraceOptions { chunk_size: cfg.raster.chunk_size, ..TraceOptions::default() };
    raster::trace_skeleton_with(&skeleton, &opts)
}

/// Simplifies traced polylines and assembles them into one chain.
pub fn extract_chain(sketch: &BinaryImage, polylines: &[RasterPolyline], cfg: &PipelineConfig) -> Result<SegmentChain> {
    let tolerance = polyline::tolerance_for(sketch.width(), sketch.height(), cfg.polyline.tolerance_pct);
    let simplified: Vec<RasterPolyline> = polylines.iter().map(|l| polyline::simplify(l, tolerance)).collect();
    polyline::assemble_chain(&simplified, cfg.polyline.offset_threshold)
}

/// Picks the node order (accepted cycle on a closed chain, BFS otherwise)
/// and spreads it over the chain.
pub fn map_nodes(g: &Graph, chain: &SegmentChain, cfg: &PipelineConfig) -> Result<(NodeLineMapping, Strategy)> {
    let core = mapping::core_subgraph(g)?;
    if chain.closed {
        if let Some(cycle) = mapping::longest_cycle_approx(&core) {
            if mapping::accept_cycle(cycle.len(), core.len(), cfg.mapping.tau_factor) {
                return Ok((mapping::distribute(&cycle, chain)?, Strategy::Cycle));
            }
        }
    }
    let traversal = mapping::two_pass_bfs(&core, cfg.seed)?;
    Ok((mapping::distribute(&traversal.order, chain)?, Strategy::Bfs))
}

struct Guided {
    polylines: Vec<RasterPolyline>,
    chain: Option<SegmentChain>,
    mapping: Option<NodeLineMapping>,
    constraints: ConstraintSet,
    strategy: Strategy,
    warnings: Vec<String>,
}

/// Runs everything up to constraint generation. Unusable sketches and
/// degenerate graphs yield an empty constraint set and a warning.
fn guide(g: &Graph, sketch: &BinaryImage, cfg: &PipelineConfig) -> Result<Guided> {
    let polylines = skeletonize(sketch, cfg);
    let mut out = Guided {
        polylines,
        chain: None,
        mapping: None,
        constraints: ConstraintSet::default(),
        strategy: Strategy::Unconstrained,
        warnings: Vec::new(),
    };
    let chain = match extract_chain(sketch, &out.polylines, cfg) {
        Ok(chain) => chain,
        Err(e @ Error::SketchNotChainable { .. }) => {
            out.warnings.push(format!("{e}; falling back to unconstrained layout"));
            return Ok(out);
        }
        Err(e) => return Err(e),
    };
    match map_nodes(g, &chain, cfg) {
        Ok((mapping, strategy)) => {
            out.constraints = constraints::generate(&mapping, &chain, cfg.constraints.epsilon)?;
            out.mapping = Some(mapping);
            out.strategy = strategy;
        }
        Err(e @ Error::DegenerateGraph(_)) => {
            out.warnings.push(format!("{e}; falling back to unconstrained layout"));
        }
        Err(e) => return Err(e),
    }
    out.chain = Some(chain);
    if out.constraints.dropped > 0 {
        out.warnings.push(format!(
            "{} contradictory relative constraint(s) dropped",
            out.constraints.dropped
        ));
    }
    Ok(out)
}

/// Full layout of `g` guided by a raster sketch.
pub fn run(g: &Graph, sketch: &DynamicImage, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let binary = raster::binarize(sketch, cfg.raster.threshold, cfg.raster.invert)?;
    run_binary(g, &binary, cfg)
}

/// [`run`] on an already binarized sketch.
pub fn run_binary(g: &Graph, sketch: &BinaryImage, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    let guided = guide(g, sketch, cfg)?;
    let lcfg = cfg.layout_config();
    let constrained = layout::constrained_layout(g, &guided.constraints, &lcfg, None)?;
    let polished = layout::polish(g, &constrained, &guided.constraints, &lcfg)?;
    Ok(PipelineOutput {
        layout: polished,
        constrained_report: constrained.report,
        polylines: guided.polylines,
        chain: guided.chain,
        mapping: guided.mapping,
        constraints: guided.constraints,
        strategy: guided.strategy,
        warnings: guided.warnings,
    })
}

/// Re-lays out `selection` guided by the sketch while every other node
/// keeps its `prior` position. Mapping and constraints are computed on the
/// subgraph induced by the selection.
pub fn run_incremental(
    g: &Graph,
    sketch: &DynamicImage,
    selection: &[NodeIx],
    prior: &[Point],
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    let binary = raster::binarize(sketch, cfg.raster.threshold, cfg.raster.invert)?;
    run_incremental_binary(g, &binary, selection, prior, cfg)
}

pub fn run_incremental_binary(
    g: &Graph,
    sketch: &BinaryImage,
    selection: &[NodeIx],
    prior: &[Point],
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    cfg.validate()?;
    if let Some(&v) = selection.iter().find(|&&v| v >= g.node_count()) {
        return Err(Error::invalid(format!("selected node index {v} out of range")));
    }
    if prior.len() != g.node_count() {
        return Err(Error::invalid(format!("prior has {} positions for {} nodes", prior.len(), g.node_count())));
    }
    let mut selected: Vec<NodeIx> = selection.iter().copied().collect::<HashSet<_>>().into_iter().collect();
    selected.sort_unstable();

    let lcfg = cfg.layout_config();
    if selected.is_empty() {
        let kept = layout::incremental_layout(g, &[], &ConstraintSet::default(), prior, &lcfg)?;
        return Ok(PipelineOutput {
            constrained_report: kept.report,
            layout: kept,
            polylines: Vec::new(),
            chain: None,
            mapping: None,
            constraints: ConstraintSet::default(),
            strategy: Strategy::Unconstrained,
            warnings: vec!["empty selection; layout unchanged".into()],
        });
    }

    // the induced subgraph numbers nodes in ascending parent order
    let sub = g.induced(&selected);
    let guided = guide(&sub, sketch, cfg)?;
    let lift = |v: NodeIx| selected[v];
    let cs = guided.constraints.remap(lift);
    let mapping = guided.mapping.map(|m| NodeLineMapping {
        assignments: m.assignments.iter().map(|seg| seg.iter().map(|&v| lift(v)).collect()).collect(),
        parent: m.parent.iter().map(|(&v, &p)| (lift(v), lift(p))).collect::<BTreeMap<_, _>>(),
    });

    let mut pinned = vec![true; g.node_count()];
    selected.iter().for_each(|&v| pinned[v] = false);
    let constrained = layout::constrained_layout_pinned(g, &cs, &lcfg, Some(prior), &pinned)?;
    let polished = layout::polish_pinned(g, &constrained, &cs, &lcfg, &pinned)?;
    Ok(PipelineOutput {
        layout: polished,
        constrained_report: constrained.report,
        polylines: guided.polylines,
        chain: guided.chain,
        mapping,
        constraints: cs,
        strategy: guided.strategy,
        warnings: guided.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::Axis;

    /// Draws a stroke of the given width along straight segments.
    fn stroke(img: &mut BinaryImage, pts: &[(f64, f64)], width: f64) {
        let r = width / 2.0;
        for w in pts.windows(2) {
            let (a, b) = (Point::new(w[0].0, w[0].1), Point::new(w[1].0, w[1].1));
            for y in 0..img.height() {
                for x in 0..img.width() {
                    let p = Point::new(f64::from(x), f64::from(y));
                    if crate::geom::point_segment_distance(p, a, b) <= r {
                        img.set(x, y, true);
                    }
                }
            }
        }
    }

    fn rectangle_sketch() -> BinaryImage {
        let mut img = BinaryImage::new(512, 512).unwrap();
        stroke(&mut img, &[(96.0, 128.0), (416.0, 128.0), (416.0, 384.0), (96.0, 384.0), (96.0, 128.0)], 8.0);
        img
    }

    fn l_sketch() -> BinaryImage {
        let mut img = BinaryImage::new(512, 512).unwrap();
        stroke(&mut img, &[(128.0, 96.0), (128.0, 416.0), (400.0, 416.0)], 8.0);
        img
    }

    fn cycle(n: usize) -> Graph {
        Graph::from_index_edges(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>())
    }

    #[test]
    fn rectangle_with_cycle_graph() {
        let g = cycle(24);
        let out = run_binary(&g, &rectangle_sketch(), &PipelineConfig::default()).unwrap();
        let chain = out.chain.as_ref().unwrap();
        assert!(chain.closed);
        assert_eq!(out.strategy, Strategy::Cycle);
        assert_eq!(out.mapping.as_ref().unwrap().node_count(), 24);
        assert_eq!(out.constraints.horizontal.len() + out.constraints.vertical.len(), 4);
        assert!(out.constrained_report.all_satisfied(), "{:?}", out.constrained_report);
        assert!(out.constrained_report.alignment_max_deviation <= 1.0);
        assert!(out.warnings.is_empty(), "{:?}", out.warnings);
    }

    #[test]
    fn blank_sketch_falls_back() {
        let g = cycle(6);
        let out = run_binary(&g, &BinaryImage::new(64, 64).unwrap(), &PipelineConfig::default()).unwrap();
        assert!(out.fell_back());
        assert!(!out.warnings.is_empty());
        assert!(out.constraints.is_empty());
        assert_eq!(out.layout.positions.len(), 6);
    }

    #[test]
    fn l_shape_with_tree_uses_bfs() {
        // binary tree of 31 nodes
        let edges: Vec<_> = (1..31).map(|i| ((i - 1) / 2, i)).collect();
        let g = Graph::from_index_edges(31, &edges);
        let out = run_binary(&g, &l_sketch(), &PipelineConfig::default()).unwrap();
        assert!(!out.chain.as_ref().unwrap().closed);
        assert_eq!(out.strategy, Strategy::Bfs);
        let axes: HashSet<Axis> = out.constraints.relative.iter().map(|c| c.axis).collect();
        assert_eq!(axes.len(), 2);
        assert_eq!(out.constraints.horizontal.len(), 1);
        assert_eq!(out.constraints.vertical.len(), 1);
    }

    #[test]
    fn degenerate_graph_falls_back() {
        let g = Graph::from_index_edges(2, &[(0, 1)]);
        let out = run_binary(&g, &rectangle_sketch(), &PipelineConfig::default()).unwrap();
        assert!(out.fell_back());
        assert!(out.chain.is_some());
        assert!(out.warnings.iter().any(|w| w.contains("degenerate")));
    }

    #[test]
    fn incremental_keeps_unselected_nodes() {
        let g = cycle(20);
        let cfg = PipelineConfig::default();
        let prior = run_binary(&g, &rectangle_sketch(), &cfg).unwrap().layout.positions;
        let mut line = BinaryImage::new(512, 512).unwrap();
        stroke(&mut line, &[(64.0, 256.0), (448.0, 256.0)], 8.0);
        let selection = [3, 4, 5, 6, 7, 8];
        let out = run_incremental_binary(&g, &line, &selection, &prior, &cfg).unwrap();
        for v in (0..20).filter(|v| !selection.contains(v)) {
            assert_eq!(out.layout.positions[v], prior[v]);
        }
        assert!(out.constraints.nodes().all(|v| selection.contains(&v)));
        assert_eq!(out.constraints.horizontal.len(), 1);
        assert!(out.constrained_report.all_satisfied());
        assert!(out.constrained_report.alignment_max_deviation <= 1.0);
    }

    #[test]
    fn rejects_invalid_config() {
        let g = cycle(5);
        let cfg = PipelineConfig { constraints: ConstraintConfig { epsilon: 0.0 }, ..Default::default() };
        assert!(run_binary(&g, &rectangle_sketch(), &cfg).is_err());
    }

    #[test]
    fn config_json_accepts_partial_overrides() {
        let cfg: PipelineConfig = serde_json::from_str(r#"{"seed": 3, "layout": {"iterations": 7}}"#).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.layout.iterations, 7);
        assert_eq!(cfg.layout.min_gap, 40.0);
        assert_eq!(cfg.layout_config().seed, 3);
        assert_eq!(cfg.polyline, PolylineConfig::default());
    }
}
