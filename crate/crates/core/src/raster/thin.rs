//! Zhang-Suen parallel thinning.
//!
//! Neighbors are numbered clockwise from north, P2..P9:
//!
//! ```text
//! P9 P2 P3
//! P8 P1 P4
//! P7 P6 P5
//! ```
//!
//! Out-of-bounds neighbors are background.
//!
//! Plain Zhang-Suen erases some small shapes outright (a 2x2 block, the
//! last stage of a thinned disk). When a sub-pass would delete every
//! remaining pixel of an 8-connected component, the pixel nearest the
//! component's centroid is kept (ties: first in row-major order), so the
//! number of components never drops.

use super::BinaryImage;

/// Deletability of a pixel for each sub-pass, indexed by the 8-bit
/// neighborhood code (bit k set when P(k+2) is foreground).
struct Tables {
    first: [bool; 256],
    second: [bool; 256],
}

const fn bit(code: usize, k: usize) -> bool {
    (code >> (k - 2)) & 1 == 1
}

const fn build_tables() -> Tables {
    let mut first = [false; 256];
    let mut second = [false; 256];
    let mut code = 0;
    while code < 256 {
        let b = (code as u32).count_ones();
        // 0 -> 1 transitions in the cyclic sequence P2, P3, ..., P9, P2
        let mut a = 0;
        let mut k = 0;
        while k < 8 {
            let cur = (code >> k) & 1;
            let next = (code >> ((k + 1) % 8)) & 1;
            if cur == 0 && next == 1 {
                a += 1;
            }
            k += 1;
        }
        let base = b >= 2 && b <= 6 && a == 1;
        let (p2, p4, p6, p8) = (bit(code, 2), bit(code, 4), bit(code, 6), bit(code, 8));
        first[code] = base && !(p2 && p4 && p6) && !(p4 && p6 && p8);
        second[code] = base && !(p2 && p4 && p8) && !(p2 && p6 && p8);
        code += 1;
    }
    Tables { first, second }
}

static TABLES: Tables = build_tables();

/// Zhang-Suen skeleton of `img`.
///
/// Iterates both sub-passes until a full iteration deletes nothing, so the
/// result is a fixed point and `thin(thin(i)) == thin(i)`.
pub fn thin(img: &BinaryImage) -> BinaryImage {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let stride = w + 2;
    // one pixel of background padding on every side
    let mut grid = vec![0u8; stride * (h + 2)];
    for y in 0..h {
        for x in 0..w {
            grid[(y + 1) * stride + x + 1] = u8::from(img.raw()[y * w + x]);
        }
    }

    let offsets: [isize; 8] = [
        -(stride as isize),     // P2 north
        -(stride as isize) + 1, // P3 north-east
        1,                      // P4 east
        stride as isize + 1,    // P5 south-east
        stride as isize,        // P6 south
        stride as isize - 1,    // P7 south-west
        -1,                     // P8 west
        -(stride as isize) - 1, // P9 north-west
    ];

    let mut active: Vec<usize> = (0..grid.len()).filter(|&i| grid[i] == 1).collect();
    let mut doomed = Vec::new();
    let mut marks = vec![Mark::None; grid.len()];
    loop {
        let mut changed = false;
        for table in [&TABLES.first, &TABLES.second] {
            doomed.clear();
            for &i in &active {
                let mut code = 0usize;
                for (k, off) in offsets.iter().enumerate() {
                    code |= usize::from(grid[(i as isize + off) as usize]) << k;
                }
                if table[code] {
                    doomed.push(i);
                }
            }
            spare_vanishing_components(&grid, stride, &offsets, &mut doomed, &mut marks);
            if !doomed.is_empty() {
                changed = true;
                for &i in &doomed {
                    grid[i] = 0;
                }
                active.retain(|&i| grid[i] == 1);
            }
        }
        if !changed {
            break;
        }
    }

    let mut pixels = vec![false; w * h];
    for &i in &active {
        let (y, x) = (i / stride - 1, i % stride - 1);
        pixels[y * w + x] = true;
    }
    BinaryImage::from_raw(img.width(), img.height(), pixels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mark {
    None,
    Doomed,
    Seen,
}

/// Removes from `doomed` one pixel of every component that would vanish.
fn spare_vanishing_components(
    grid: &[u8],
    stride: usize,
    offsets: &[isize; 8],
    doomed: &mut Vec<usize>,
    marks: &mut [Mark],
) {
    for &i in doomed.iter() {
        marks[i] = Mark::Doomed;
    }
    let mut spared = Vec::new();
    let mut region = Vec::new();
    for k in 0..doomed.len() {
        let start = doomed[k];
        if marks[start] != Mark::Doomed {
            continue;
        }
        region.clear();
        region.push(start);
        marks[start] = Mark::Seen;
        let mut touches_survivor = false;
        let mut head = 0;
        while head < region.len() {
            let i = region[head];
            head += 1;
            for off in offsets {
                let j = (i as isize + off) as usize;
                if grid[j] == 0 {
                    continue;
                }
                match marks[j] {
                    Mark::Doomed => {
                        marks[j] = Mark::Seen;
                        region.push(j);
                    }
                    Mark::None => touches_survivor = true,
                    Mark::Seen => {}
                }
            }
        }
        if !touches_survivor {
            let n = region.len() as f64;
            let (sx, sy) = region
                .iter()
                .fold((0.0, 0.0), |(sx, sy), &i| (sx + (i % stride) as f64, sy + (i / stride) as f64));
            let (cx, cy) = (sx / n, sy / n);
            let keep = region
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    let da = ((a % stride) as f64 - cx).powi(2) + ((a / stride) as f64 - cy).powi(2);
                    let db = ((b % stride) as f64 - cx).powi(2) + ((b / stride) as f64 - cy).powi(2);
                    da.total_cmp(&db).then(a.cmp(&b))
                })
                .expect("region is non-empty");
            spared.push(keep);
        }
    }
    for &i in doomed.iter() {
        marks[i] = Mark::None;
    }
    if !spared.is_empty() {
        spared.sort_unstable();
        doomed.retain(|i| spared.binary_search(i).is_err());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Straightforward per-pixel Zhang-Suen, written independently of the
    /// lookup-table version above.
    fn reference_thin(img: &BinaryImage) -> BinaryImage {
        let mut cur = img.clone();
        let (w, h) = (img.width() as i64, img.height() as i64);
        loop {
            let mut changed = false;
            for step in 0..2 {
                let mut remove = Vec::new();
                for y in 0..h {
                    for x in 0..w {
                        if !cur.get_signed(x, y) {
                            continue;
                        }
                        let n = [
                            cur.get_signed(x, y - 1),
                            cur.get_signed(x + 1, y - 1),
                            cur.get_signed(x + 1, y),
                            cur.get_signed(x + 1, y + 1),
                            cur.get_signed(x, y + 1),
                            cur.get_signed(x - 1, y + 1),
                            cur.get_signed(x - 1, y),
                            cur.get_signed(x - 1, y - 1),
                        ];
                        let b = n.iter().filter(|&&v| v).count();
                        let a = (0..8).filter(|&i| !n[i] && n[(i + 1) % 8]).count();
                        let (p2, p4, p6, p8) = (n[0], n[2], n[4], n[6]);
                        let cond = if step == 0 {
                            !(p2 && p4 && p6) && !(p4 && p6 && p8)
                        } else {
                            !(p2 && p4 && p8) && !(p2 && p6 && p8)
                        };
                        if (2..=6).contains(&b) && a == 1 && cond {
                            remove.push((x as u32, y as u32));
                        }
                    }
                }
                // keep one pixel of any component that would disappear
                for comp in cur.components() {
                    if comp.iter().all(|p| remove.contains(p)) {
                        let n = comp.len() as f64;
                        let cx = comp.iter().map(|p| f64::from(p.0)).sum::<f64>() / n;
                        let cy = comp.iter().map(|p| f64::from(p.1)).sum::<f64>() / n;
                        let mut by_row: Vec<(u32, u32)> = comp.clone();
                        by_row.sort_by_key(|&(x, y)| (y, x));
                        let mut best = by_row[0];
                        let d = |p: (u32, u32)| (f64::from(p.0) - cx).powi(2) + (f64::from(p.1) - cy).powi(2);
                        for &p in &by_row {
                            if d(p) < d(best) {
                                best = p;
                            }
                        }
                        remove.retain(|&p| p != best);
                    }
                }
                changed |= !remove.is_empty();
                for (x, y) in remove {
                    cur.set(x, y, false);
                }
            }
            if !changed {
                return cur;
            }
        }
    }

    fn disk(size: u32, cx: f64, cy: f64, r: f64) -> BinaryImage {
        let mut img = BinaryImage::new(size, size).unwrap();
        for y in 0..size {
            for x in 0..size {
                let (dx, dy) = (f64::from(x) - cx, f64::from(y) - cy);
                if dx * dx + dy * dy <= r * r {
                    img.set(x, y, true);
                }
            }
        }
        img
    }

    #[test]
    fn empty_stays_empty() {
        let img = BinaryImage::new(7, 5).unwrap();
        assert!(thin(&img).is_empty());
    }

    #[test]
    fn one_pixel_line_is_unchanged() {
        let img = BinaryImage::from_ascii(&["##########"]).unwrap();
        assert_eq!(reference_thin(&img), img);
        assert_eq!(thin(&img), img);
    }

    #[test]
    fn disk_matches_reference() {
        let img = disk(20, 9.5, 9.5, 8.0);
        let expected = reference_thin(&img);
        let got = thin(&img);
        assert_eq!(got, expected);
        assert!(!got.is_empty());
        assert_eq!(got.component_count(), 1);
        for (x, y) in got.foreground() {
            assert!((5..15).contains(&x) && (5..15).contains(&y), "{got:?}");
        }
    }

    #[test]
    fn small_blocks_keep_one_pixel() {
        let img = BinaryImage::from_ascii(&["......", ".##...", ".##...", "....##", "....##"]).unwrap();
        let t = thin(&img);
        assert_eq!(t, reference_thin(&img));
        assert_eq!(t.count(), 2);
        assert_eq!(t.component_count(), 2);
    }

    #[test]
    fn thick_bar_becomes_thin_line() {
        let mut img = BinaryImage::new(40, 12).unwrap();
        for y in 3..9 {
            for x in 4..36 {
                img.set(x, y, true);
            }
        }
        let t = thin(&img);
        assert_eq!(t, reference_thin(&img));
        assert_eq!(t.component_count(), 1);
        // one pixel per column through the middle of the bar
        for x in 10..30 {
            let col: Vec<_> = (0..12).filter(|&y| t.get(x, y)).collect();
            assert_eq!(col.len(), 1, "column {x}: {t:?}");
        }
    }

    #[test]
    fn matches_reference_on_rings() {
        let mut img = disk(32, 15.5, 15.5, 13.0);
        let hole = disk(32, 15.5, 15.5, 7.0);
        for (x, y) in hole.foreground() {
            img.set(x, y, false);
        }
        let t = thin(&img);
        assert_eq!(t, reference_thin(&img));
        assert_eq!(t.component_count(), 1);
        assert_eq!(thin(&t), t);
    }
}
