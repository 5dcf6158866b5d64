//! Raster side of sketch interpretation: binarization, Zhang-Suen
//! thinning and recursive skeleton tracing.

mod thin;
mod trace;

pub use thin::thin;
pub use trace::{trace_skeleton, trace_skeleton_with, TraceOptions};

use image::{DynamicImage, GrayImage, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: u8 = 128;

/// Pixels with alpha below this are background regardless of color.
const ALPHA_CUTOFF: u8 = 16;

/// Foreground/background pixel grid. Origin top-left, y grows downward.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: u32,
    height: u32,
    pixels: Vec<bool>,
}

impl BinaryImage {
    /// An all-background image. Dimensions must be non-zero.
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "image dimensions must be non-zero, got {width}x{height}"
            )));
        }
        Ok(BinaryImage {
            width,
            height,
            pixels: vec![false; width as usize * height as usize],
        })
    }

    /// Builds an image from rows of text, `#` marking foreground.
    pub fn from_ascii(rows: &[&str]) -> Result<Self> {
        let height = rows.len() as u32;
        let width = rows.iter().map(|r| r.len()).max().unwrap_or(0) as u32;
        let mut img = BinaryImage::new(width, height)?;
        for (y, row) in rows.iter().enumerate() {
            for (x, c) in row.bytes().enumerate() {
                if c == b'#' {
                    img.set(x as u32, y as u32, true);
                }
            }
        }
        Ok(img)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        x < self.width && y < self.height && self.pixels[self.index(x, y)]
    }

    /// Signed lookup; anything outside the grid is background.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && self.get(x as u32, y as u32)
    }

    /// # Panics
    /// If `(x, y)` is out of bounds.
    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) out of bounds");
        let i = self.index(x, y);
        self.pixels[i] = value;
    }

    pub fn count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.pixels.iter().any(|&p| p)
    }

    /// Foreground coordinates in row-major order.
    pub fn foreground(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width as usize;
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(move |(i, _)| ((i % w) as u32, (i / w) as u32))
    }

    pub(crate) fn raw(&self) -> &[bool] {
        &self.pixels
    }

    pub(crate) fn from_raw(width: u32, height: u32, pixels: Vec<bool>) -> Self {
        debug_assert_eq!(pixels.len(), width as usize * height as usize);
        BinaryImage { width, height, pixels }
    }

    /// Number of 8-connected foreground components.
    pub fn component_count(&self) -> usize {
        self.components().len()
    }

    /// 8-connected foreground components, each as a list of pixels.
    pub fn components(&self) -> Vec<Vec<(u32, u32)>> {
        let (w, h) = (self.width as i64, self.height as i64);
        let mut seen = vec![false; self.pixels.len()];
        let mut out = Vec::new();
        for start in 0..self.pixels.len() {
            if !self.pixels[start] || seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(i) = stack.pop() {
                let (x, y) = ((i as i64) % w, (i as i64) / w);
                comp.push((x as u32, y as u32));
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w || ny >= h {
                            continue;
                        }
                        let j = (ny * w + nx) as usize;
                        if self.pixels[j] && !seen[j] {
                            seen[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    /// Black strokes on white, the same convention [`binarize`] reads.
    pub fn to_gray_image(&self) -> GrayImage {
        GrayImage::from_fn(self.width, self.height, |x, y| {
            Luma([if self.get(x, y) { 0 } else { 255 }])
        })
    }

    /// PNG encoding of [`BinaryImage::to_gray_image`].
    pub fn to_png(&self) -> Result<Vec<u8>> {
        let mut buf = std::io::Cursor::new(Vec::new());
        self.to_gray_image()
            .write_to(&mut buf, image::ImageFormat::Png)?;
        Ok(buf.into_inner())
    }
}

impl std::fmt::Debug for BinaryImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BinaryImage {}x{}", self.width, self.height)?;
        if self.width <= 80 && self.height <= 80 {
            for y in 0..self.height {
                let row: String = (0..self.width)
                    .map(|x| if self.get(x, y) { '#' } else { '.' })
                    .collect();
                writeln!(f, "{row}")?;
            }
        }
        Ok(())
    }
}

/// Binarization options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BinarizeOptions {
    pub threshold: u8,
    pub invert: bool,
}

impl Default for BinarizeOptions {
    fn default() -> Self {
        BinarizeOptions { threshold: DEFAULT_THRESHOLD, invert: false }
    }
}

/// Thresholds a raster into foreground (dark strokes) and background.
///
/// A pixel is foreground iff its luminance is below `threshold`; with
/// `invert` the test runs on the inverted luminance `255 - l`. Pixels that
/// are nearly transparent are always background.
pub fn binarize(image: &DynamicImage, threshold: u8, invert: bool) -> Result<BinaryImage> {
    let (width, height) = (image.width(), image.height());
    let mut out = BinaryImage::new(width, height)?;
    let test = |lum: u8| {
        let l = if invert { 255 - lum } else { lum };
        l < threshold
    };
    match image {
        DynamicImage::ImageLuma8(gray) => {
            for (x, y, Luma([l])) in gray.enumerate_pixels() {
                if test(*l) {
                    out.set(x, y, true);
                }
            }
        }
        other => {
            let rgba = other.to_rgba8();
            for (x, y, px) in rgba.enumerate_pixels() {
                let [r, g, b, a] = px.0;
                if a < ALPHA_CUTOFF {
                    continue;
                }
                if test(luminance(r, g, b)) {
                    out.set(x, y, true);
                }
            }
        }
    }
    Ok(out)
}

/// Rec. 601 luma, rounded.
fn luminance(r: u8, g: u8, b: u8) -> u8 {
    let l = 299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b);
    ((l + 500) / 1000) as u8
}

/// Decodes PNG (gray, RGB, RGBA) or PGM (P2/P5) bytes.
pub fn decode_sketch(bytes: &[u8]) -> Result<DynamicImage> {
    let format = image::guess_format(bytes)?;
    match format {
        image::ImageFormat::Png | image::ImageFormat::Pnm => {
            Ok(image::load_from_memory_with_format(bytes, format)?)
        }
        other => Err(Error::invalid(format!("unsupported sketch format {other:?}"))),
    }
}

/// Ordered pixel coordinates of a traced stroke.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RasterPolyline {
    pub points: Vec<(i32, i32)>,
}

impl RasterPolyline {
    /// Drops consecutive duplicates; `None` when fewer than two points remain.
    pub fn new(mut points: Vec<(i32, i32)>) -> Option<Self> {
        points.dedup();
        (points.len() >= 2).then_some(RasterPolyline { points })
    }

    pub fn length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| {
                let dx = f64::from(w[1].0 - w[0].0);
                let dy = f64::from(w[1].1 - w[0].1);
                dx.hypot(dy)
            })
            .sum()
    }

    pub fn first(&self) -> (i32, i32) {
        self.points[0]
    }

    pub fn last(&self) -> (i32, i32) {
        self.points[self.points.len() - 1]
    }
}
