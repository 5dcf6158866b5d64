//! Sketch-guided graph layout.
//!
//! A hand-drawn raster sketch is reduced to an ordered chain of line
//! segments; graph nodes are distributed along the chain and turned into
//! relative-placement and alignment constraints; a constrained spring
//! embedder then produces positions that follow the sketched shape.
//!
//! The stages are exposed individually ([`raster`], [`polyline`],
//! [`mapping`], [`constraints`], [`layout`]) and end-to-end through
//! [`pipeline::run`] and [`pipeline::run_incremental`].

pub mod constraints;
pub mod error;
pub mod geom;
pub mod graph;
pub mod layout;
pub mod mapping;
pub mod pipeline;
pub mod polyline;
pub mod raster;
pub mod svg;

pub use constraints::{Axis, ConstraintSet, Direction, RelativeConstraint};
pub use error::{Error, Result};
pub use geom::Point;
pub use graph::{Graph, NodeIx};
pub use layout::{LayoutConfig, LayoutReport, LayoutResult};
pub use mapping::{CoreSubgraph, NodeLineMapping};
pub use pipeline::{PipelineConfig, PipelineOutput, Strategy};
pub use polyline::SegmentChain;
pub use raster::{BinaryImage, RasterPolyline};
