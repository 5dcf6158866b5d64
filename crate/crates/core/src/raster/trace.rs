//! Recursive skeleton tracing.
//!
//! Regions no larger than the chunk size are traced directly: foreground
//! runs on the region border become exit points, which are joined through
//! a key point inside the region. Larger regions are split along the row
//! or column in their middle half that cuts the fewest skeleton pixels;
//! both halves are traced and fragments whose ends touch across the seam
//! are joined.

use serde::{Deserialize, Serialize};

use super::{BinaryImage, RasterPolyline};

type Px = (i32, i32);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TraceOptions {
    /// Regions with both sides at most this many pixels are traced directly.
    pub chunk_size: u32,
    /// Polylines shorter than this (in pixels) are dropped as noise.
    pub min_length: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { chunk_size: 10, min_length: 3.0 }
    }
}

/// Traces a thinned image into polylines with the default options.
pub fn trace_skeleton(img: &BinaryImage) -> Vec<RasterPolyline> {
    trace_skeleton_with(img, &TraceOptions::default())
}

pub fn trace_skeleton_with(img: &BinaryImage, opts: &TraceOptions) -> Vec<RasterPolyline> {
    let tracer = Tracer {
        img,
        sums: PrefixSums::new(img),
        chunk: opts.chunk_size.max(3) as i32,
    };
    let root = Rect { x: 0, y: 0, w: img.width() as i32, h: img.height() as i32 };
    tracer
        .trace(root)
        .into_iter()
        .filter_map(RasterPolyline::new)
        .filter(|p| p.length() >= opts.min_length)
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x: i32,
    y: i32,
    w: i32,
    h: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SplitAxis {
    /// Seam between rows `at - 1` and `at`.
    Rows,
    /// Seam between columns `at - 1` and `at`.
    Cols,
}

/// 2-D prefix sums for O(1) foreground counts over rectangles.
struct PrefixSums {
    stride: usize,
    table: Vec<u32>,
}

impl PrefixSums {
    fn new(img: &BinaryImage) -> Self {
        let (w, h) = (img.width() as usize, img.height() as usize);
        let stride = w + 1;
        let mut table = vec![0u32; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0;
            for x in 0..w {
                row += u32::from(img.raw()[y * w + x]);
                table[(y + 1) * stride + x + 1] = table[y * stride + x + 1] + row;
            }
        }
        PrefixSums { stride, table }
    }

    fn count(&self, r: Rect) -> u32 {
        let (x0, y0) = (r.x as usize, r.y as usize);
        let (x1, y1) = ((r.x + r.w) as usize, (r.y + r.h) as usize);
        let s = self.stride;
        self.table[y1 * s + x1] + self.table[y0 * s + x0]
            - self.table[y0 * s + x1]
            - self.table[y1 * s + x0]
    }
}

struct Tracer<'a> {
    img: &'a BinaryImage,
    sums: PrefixSums,
    chunk: i32,
}

impl Tracer<'_> {
    fn fg(&self, (x, y): Px) -> bool {
        self.img.get_signed(i64::from(x), i64::from(y))
    }

    fn trace(&self, r: Rect) -> Vec<Vec<Px>> {
        if r.w <= 0 || r.h <= 0 || self.sums.count(r) == 0 {
            return Vec::new();
        }
        if r.w <= self.chunk && r.h <= self.chunk {
            return self.trace_chunk(r);
        }
        let (axis, at) = self.best_split(r);
        let (a, b) = match axis {
            SplitAxis::Rows => (
                Rect { h: at - r.y, ..r },
                Rect { y: at, h: r.y + r.h - at, ..r },
            ),
            SplitAxis::Cols => (
                Rect { w: at - r.x, ..r },
                Rect { x: at, w: r.x + r.w - at, ..r },
            ),
        };
        let mut frags = self.trace(a);
        let from_b = frags.len();
        frags.extend(self.trace(b));
        self.merge(frags, from_b, r, axis, at)
    }

    /// Seam cost is the number of foreground pixels on the two lines
    /// adjacent to it. Candidates lie in the middle half of the region;
    /// ties go to the line nearest the middle, then to the longer side.
    fn best_split(&self, r: Rect) -> (SplitAxis, i32) {
        let mut best: Option<((u32, i32, u8), SplitAxis, i32)> = None;
        let mut consider = |axis: SplitAxis, start: i32, len: i32| {
            let lo = (start + len / 4).max(start + 1);
            let hi = (start + 3 * len / 4).min(start + len - 1);
            let mid = start + len / 2;
            for at in lo..=hi {
                let cost = match axis {
                    SplitAxis::Rows => self.sums.count(Rect { y: at - 1, h: 2, ..r }),
                    SplitAxis::Cols => self.sums.count(Rect { x: at - 1, w: 2, ..r }),
                };
                let longer = match axis {
                    SplitAxis::Rows => r.h >= r.w,
                    SplitAxis::Cols => r.w > r.h,
                };
                let key = (cost, (at - mid).abs(), u8::from(!longer));
                if best.as_ref().is_none_or(|(k, _, _)| key < *k) {
                    best = Some((key, axis, at));
                }
            }
        };
        if r.h > self.chunk {
            consider(SplitAxis::Rows, r.y, r.h);
        }
        if r.w > self.chunk {
            consider(SplitAxis::Cols, r.x, r.w);
        }
        let (_, axis, at) = best.expect("region larger than chunk has a split candidate");
        (axis, at)
    }

    /// Border pixels of `r` in clockwise order starting at the top-left.
    fn border(r: Rect) -> Vec<Px> {
        let (x0, y0, x1, y1) = (r.x, r.y, r.x + r.w - 1, r.y + r.h - 1);
        let mut seq = Vec::with_capacity(2 * (r.w + r.h) as usize);
        seq.extend((x0..=x1).map(|x| (x, y0)));
        seq.extend((y0 + 1..=y1).map(|y| (x1, y)));
        if y1 > y0 {
            seq.extend((x0..x1).rev().map(|x| (x, y1)));
        }
        if x1 > x0 {
            seq.extend((y0 + 1..y1).rev().map(|y| (x0, y)));
        }
        seq
    }

    fn trace_chunk(&self, r: Rect) -> Vec<Vec<Px>> {
        let border = Self::border(r);
        let n = border.len();
        let on: Vec<bool> = border.iter().map(|&p| self.fg(p)).collect();

        // Exit points: middles of cyclic foreground runs along the border.
        let mut exits = Vec::new();
        match (0..n).find(|&i| !on[i]) {
            None => exits.push(border[n / 2]),
            Some(gap) => {
                let mut i = 0;
                while i < n {
                    let k = (gap + i) % n;
                    if on[k] {
                        let mut len = 0;
                        while len < n && on[(k + len) % n] {
                            len += 1;
                        }
                        exits.push(border[(k + len / 2) % n]);
                        i += len;
                    } else {
                        i += 1;
                    }
                }
            }
        }

        let pixels: Vec<Px> = (r.y..r.y + r.h)
            .flat_map(|y| (r.x..r.x + r.w).map(move |x| (x, y)))
            .filter(|&p| self.fg(p))
            .collect();
        let d2 = |a: Px, b: Px| {
            let (dx, dy) = (i64::from(a.0 - b.0), i64::from(a.1 - b.1));
            dx * dx + dy * dy
        };

        match exits.len() {
            0 => Vec::new(),
            1 => {
                // a stroke ends in here; run to its tip
                let e = exits[0];
                let tip = pixels
                    .iter()
                    .copied()
                    .max_by_key(|&p| (d2(p, e), std::cmp::Reverse(p)))
                    .unwrap_or(e);
                vec![if tip == e { vec![e] } else { vec![e, tip] }]
            }
            2 => {
                let (a, b) = (exits[0], exits[1]);
                let key = pixels
                    .iter()
                    .copied()
                    .map(|p| (chord_distance(p, a, b), p))
                    .max_by(|x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)));
                match key {
                    Some((d, k)) if d > 1.0 => vec![vec![a, k, b]],
                    _ => vec![vec![a, b]],
                }
            }
            _ => {
                let (sx, sy) = pixels
                    .iter()
                    .fold((0i64, 0i64), |(sx, sy), p| (sx + i64::from(p.0), sy + i64::from(p.1)));
                let m = pixels.len() as f64;
                let (cx, cy) = (sx as f64 / m, sy as f64 / m);
                let center = pixels
                    .iter()
                    .copied()
                    .min_by(|p, q| {
                        let dp = (f64::from(p.0) - cx).hypot(f64::from(p.1) - cy);
                        let dq = (f64::from(q.0) - cx).hypot(f64::from(q.1) - cy);
                        dp.total_cmp(&dq).then(p.cmp(q))
                    })
                    .expect("chunk with exits has pixels");
                exits
                    .into_iter()
                    .map(|e| if e == center { vec![e] } else { vec![e, center] })
                    .collect()
            }
        }
    }

    /// Foreground run containing `p` along the seam line, clipped to `r`.
    fn run_extent(&self, p: Px, r: Rect, axis: SplitAxis) -> (i32, i32) {
        let (lo_bound, hi_bound, along) = match axis {
            SplitAxis::Rows => (r.x, r.x + r.w - 1, p.0),
            SplitAxis::Cols => (r.y, r.y + r.h - 1, p.1),
        };
        let at = |t: i32| match axis {
            SplitAxis::Rows => (t, p.1),
            SplitAxis::Cols => (p.0, t),
        };
        let mut lo = along;
        while lo > lo_bound && self.fg(at(lo - 1)) {
            lo -= 1;
        }
        let mut hi = along;
        while hi < hi_bound && self.fg(at(hi + 1)) {
            hi += 1;
        }
        (lo, hi)
    }

    /// Joins fragments of the two halves whose ends touch across the seam.
    /// Fragments `[..from_b]` came from the low side, the rest from the high side.
    fn merge(&self, frags: Vec<Vec<Px>>, from_b: usize, r: Rect, axis: SplitAxis, at: i32) -> Vec<Vec<Px>> {
        let across = |p: Px| match axis {
            SplitAxis::Rows => p.1,
            SplitAxis::Cols => p.0,
        };
        let along = |p: Px| match axis {
            SplitAxis::Rows => p.0,
            SplitAxis::Cols => p.1,
        };

        // Each fragment tracks which side its pixels came from so that ends
        // are only paired across the seam.
        let mut items: Vec<(Vec<Px>, bool)> = frags
            .into_iter()
            .enumerate()
            .map(|(i, f)| (f, i >= from_b))
            .collect();
        let mut closed = vec![false; items.len()];

        loop {
            let mut best: Option<(i32, usize, bool, usize, bool)> = None;
            for (i, (fi, _)) in items.iter().enumerate() {
                if closed[i] {
                    continue;
                }
                for low_end in [false, true] {
                    let p = if low_end { fi[fi.len() - 1] } else { fi[0] };
                    if across(p) != at - 1 {
                        continue;
                    }
                    let (plo, phi) = self.run_extent(p, r, axis);
                    for (j, (fj, _)) in items.iter().enumerate() {
                        if closed[j] {
                            continue;
                        }
                        for high_end in [false, true] {
                            let q = if high_end { fj[fj.len() - 1] } else { fj[0] };
                            if across(q) != at {
                                continue;
                            }
                            if i == j && fi.len() < 3 {
                                continue;
                            }
                            let (qlo, qhi) = self.run_extent(q, r, axis);
                            if qlo > phi + 1 || plo > qhi + 1 {
                                continue;
                            }
                            let d = (along(p) - along(q)).abs();
                            if best.is_none_or(|b| d < b.0) {
                                best = Some((d, i, low_end, j, high_end));
                            }
                        }
                    }
                }
            }
            let Some((_, i, i_end, j, j_end)) = best else { break };
            if i == j {
                let f = &mut items[i].0;
                let first = f[0];
                f.push(first);
                closed[i] = true;
                continue;
            }
            let mut a = std::mem::take(&mut items[i].0);
            let mut b = std::mem::take(&mut items[j].0);
            if !i_end {
                a.reverse();
            }
            if j_end {
                b.reverse();
            }
            a.extend(b);
            items[i].0 = a;
            items.swap_remove(j);
            closed.swap_remove(j);
        }
        items.into_iter().map(|(f, _)| f).collect()
    }
}

/// Distance from `p` to the infinite line through `a` and `b`.
fn chord_distance(p: Px, a: Px, b: Px) -> f64 {
    let (ax, ay) = (f64::from(a.0), f64::from(a.1));
    let (bx, by) = (f64::from(b.0), f64::from(b.1));
    let (px, py) = (f64::from(p.0), f64::from(p.1));
    let len = (bx - ax).hypot(by - ay);
    if len == 0.0 {
        return (px - ax).hypot(py - ay);
    }
    ((bx - ax) * (ay - py) - (ax - px) * (by - ay)).abs() / len
}
