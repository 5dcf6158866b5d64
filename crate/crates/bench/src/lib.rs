//! Synthetic inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sketchlayout_core::geom::point_segment_distance;
use sketchlayout_core::{BinaryImage, Graph, Point};

/// Strokes the polyline `pts` with a round brush of the given width.
pub fn stroke(img: &mut BinaryImage, pts: &[(f64, f64)], width: f64) {
    let r = width / 2.0;
    for w in pts.windows(2) {
        let (a, b) = (Point::new(w[0].0, w[0].1), Point::new(w[1].0, w[1].1));
        let x0 = (a.x.min(b.x) - r).floor().max(0.0) as u32;
        let x1 = ((a.x.max(b.x) + r).ceil() as u32).min(img.width() - 1);
        let y0 = (a.y.min(b.y) - r).floor().max(0.0) as u32;
        let y1 = ((a.y.max(b.y) + r).ceil() as u32).min(img.height() - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                if point_segment_distance(Point::new(f64::from(x), f64::from(y)), a, b) <= r {
                    img.set(x, y, true);
                }
            }
        }
    }
}

/// 512x512 rectangle outline, 8 px stroke.
pub fn rectangle_sketch() -> BinaryImage {
    let mut img = BinaryImage::new(512, 512).expect("non-empty");
    stroke(&mut img, &[(96.0, 128.0), (416.0, 128.0), (416.0, 384.0), (96.0, 384.0), (96.0, 128.0)], 8.0);
    img
}

/// Connected random graph: a random spanning tree plus extra random edges.
pub fn random_graph(n: usize, m: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    while edges.len() < m {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            edges.push((a, b));
        }
    }
    Graph::from_index_edges(n, &edges)
}
