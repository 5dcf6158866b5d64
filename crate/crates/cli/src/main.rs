use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use sketchlayout_core::layout::LayoutDoc;
use sketchlayout_core::pipeline::{self, PipelineConfig, PipelineOutput};
use sketchlayout_core::{raster, svg, Graph};

/// Lay out a graph so that it follows a hand-drawn sketch.
#[derive(Debug, Parser)]
#[command(name = "sketchlayout", version)]
struct Args {
    /// Graph as JSON ({"nodes": [..], "edges": [[a, b], ..]}) or an edge list.
    #[arg(long)]
    graph: PathBuf,

    /// Sketch image (PNG or PGM); dark strokes on a light background.
    #[arg(long)]
    sketch: PathBuf,

    /// Layout JSON destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long)]
    svg: Option<PathBuf>,

    /// Write the extracted segment chain as JSON.
    #[arg(long)]
    dump_chain: Option<PathBuf>,

    /// Write the generated constraints as JSON.
    #[arg(long)]
    dump_constraints: Option<PathBuf>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Direction classification sensitivity.
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,

    /// Simplification tolerance, percent of the image diagonal.
    #[arg(long, default_value_t = 2.0)]
    tolerance_pct: f64,

    /// Largest gap (pixels) bridged when chaining strokes.
    #[arg(long, default_value_t = 5.0)]
    offset: f64,

    /// Cycle acceptance factor in |C| >= f * sqrt(|V'|).
    #[arg(long, default_value_t = 2.0)]
    tau_factor: f64,

    #[arg(long, default_value_t = 500)]
    iterations: usize,

    #[arg(long, default_value_t = 30)]
    polish: usize,

    /// Luminance threshold below which a pixel is part of a stroke.
    #[arg(long, default_value_t = 128)]
    threshold: u8,

    /// Treat light strokes on a dark background as foreground.
    #[arg(long)]
    invert: bool,

    /// Comma-separated node ids to re-lay out; everything else stays put.
    #[arg(long, value_delimiter = ',', requires = "prior")]
    select: Option<Vec<String>>,

    /// Layout JSON holding the current positions of every node.
    #[arg(long, requires = "select")]
    prior: Option<PathBuf>,
}

impl Args {
    fn config(&self) -> PipelineConfig {
        let mut cfg = PipelineConfig { seed: self.seed, ..PipelineConfig::default() };
        cfg.raster.threshold = self.threshold;
        cfg.raster.invert = self.invert;
        cfg.polyline.tolerance_pct = self.tolerance_pct;
        cfg.polyline.offset_threshold = self.offset;
        cfg.mapping.tau_factor = self.tau_factor;
        cfg.constraints.epsilon = self.epsilon;
        cfg.layout.iterations = self.iterations;
        cfg.layout.polish_iterations = self.polish;
        cfg
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn run(args: &Args) -> Result<()> {
    let text = String::from_utf8(read(&args.graph)?).context("graph file is not UTF-8")?;
    let graph = Graph::parse(&text).with_context(|| format!("parsing graph {}", args.graph.display()))?;
    let sketch = raster::decode_sketch(&read(&args.sketch)?)
        .with_context(|| format!("decoding sketch {}", args.sketch.display()))?;
    let cfg = args.config();

    let output = match (&args.select, &args.prior) {
        (Some(ids), Some(prior_path)) => {
            let doc: LayoutDoc = serde_json::from_slice(&read(prior_path)?)
                .with_context(|| format!("parsing prior layout {}", prior_path.display()))?;
            let prior = doc.positions_for(&graph)?;
            let mut selection = Vec::with_capacity(ids.len());
            for id in ids.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
                match graph.ix(id) {
                    Some(ix) => selection.push(ix),
                    None => bail!("selected node {id:?} is not in the graph"),
                }
            }
            pipeline::run_incremental(&graph, &sketch, &selection, &prior, &cfg)?
        }
        _ => pipeline::run(&graph, &sketch, &cfg)?,
    };

    for warning in &output.warnings {
        eprintln!("warning: {warning}");
    }
    emit(args, &graph, &output)
}

fn emit(args: &Args, graph: &Graph, output: &PipelineOutput) -> Result<()> {
    let layout = output.layout.to_json(graph);
    match &args.out {
        Some(path) => write(path, &layout)?,
        None => println!("{layout}"),
    }
    if let Some(path) = &args.svg {
        write(path, &svg::render(graph, &output.layout.positions))?;
    }
    if let Some(path) = &args.dump_chain {
        write(path, &serde_json::to_string_pretty(&output.chain)?)?;
    }
    if let Some(path) = &args.dump_constraints {
        write(path, &serde_json::to_string_pretty(&output.constraints.to_doc(graph))?)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
