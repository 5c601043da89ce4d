//! Quantized regional entropy.
//!
//! An image is reduced to `L` gray levels and cut into `h x w` windows
//! placed every `stride` pixels. Each window contributes the Shannon
//! entropy (in bits) of its level histogram, and the grid of those values
//! is the [`EntropyMap`] that RDIE compares.
//!
//! Two engines produce the map. [`entropy_map_naive`] walks every window
//! and evaluates the level probabilities term by term; it is the oracle.
//! [`entropy_map_fast`] expands the image into one-hot level channels,
//! box-pools them and applies the entropy activation per channel.

mod fast;
mod gray;

use serde::Serialize;

use crate::error::{Error, Result};

pub use fast::{entropy_map_fast, global_entropy_fast};
pub use gray::{rgb_interleaved_to_gray, to_grayscale, GrayImage, GrayMode};

/// Window geometry and quantization level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct WindowSpec {
    win_h: usize,
    win_w: usize,
    stride: usize,
    levels: usize,
}

impl WindowSpec {
    pub fn new(win_h: usize, win_w: usize, stride: usize, levels: usize) -> Result<Self> {
        if win_h == 0 || win_w == 0 || stride == 0 {
            return Err(Error::InvalidSpec(format!(
                "window {win_h}x{win_w} and stride {stride} must all be at least 1"
            )));
        }
        if !(2..=256).contains(&levels) {
            return Err(Error::InvalidSpec(format!(
                "quantization level {levels} outside 2..=256"
            )));
        }
        Ok(Self {
            win_h,
            win_w,
            stride,
            levels,
        })
    }

    /// Square window with stride equal to its side.
    pub fn square(size: usize, levels: usize) -> Result<Self> {
        Self::new(size, size, size, levels)
    }

    pub fn win_h(&self) -> usize {
        self.win_h
    }

    pub fn win_w(&self) -> usize {
        self.win_w
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn window_area(&self) -> usize {
        self.win_h * self.win_w
    }

    /// Upper bound of a single window's entropy, `log2(min(L, h*w))`.
    pub fn max_entropy(&self) -> f64 {
        (self.levels.min(self.window_area()) as f64).log2()
    }
}

impl Default for WindowSpec {
    /// 5x5 windows, stride 5, 32 levels.
    fn default() -> Self {
        Self {
            win_h: 5,
            win_w: 5,
            stride: 5,
            levels: 32,
        }
    }
}

impl std::fmt::Display for WindowSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}x{}/s{}/L{}",
            self.win_h, self.win_w, self.stride, self.levels
        )
    }
}

/// Image of level indices in `0..levels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedImage {
    width: usize,
    height: usize,
    levels: usize,
    values: Vec<u8>,
}

impl QuantizedImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.values[y * self.width + x]
    }
}

/// Per-region entropies in bits, row-major over the window grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyMap {
    rows: usize,
    cols: usize,
    spec: WindowSpec,
    values: Vec<f64>,
}

impl EntropyMap {
    pub fn new(rows: usize, cols: usize, spec: WindowSpec, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(Error::Precondition(format!(
                "{} values for a {rows}x{cols} entropy map",
                values.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            spec,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn spec(&self) -> WindowSpec {
        self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    /// Largest elementwise absolute difference, `None` when the grids differ.
    pub fn max_abs_diff(&self, other: &EntropyMap) -> Option<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return None;
        }
        Some(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }
}

fn check_levels(levels: usize) -> Result<()> {
    if !(2..=256).contains(&levels) {
        return Err(Error::InvalidSpec(format!(
            "quantization level {levels} outside 2..=256"
        )));
    }
    Ok(())
}

/// Level of one pixel: `floor(pixel * L / 256)`.
#[inline]
pub fn quantize_pixel(pixel: u8, levels: usize) -> u8 {
    ((usize::from(pixel) * levels) >> 8) as u8
}

/// Maps every pixel to its half-open bin `floor(pixel * L / 256)`.
pub fn quantize(img: &GrayImage, levels: usize) -> Result<QuantizedImage> {
    check_levels(levels)?;
    Ok(QuantizedImage {
        width: img.width(),
        height: img.height(),
        levels,
        values: img
            .pixels()
            .iter()
            .map(|&p| quantize_pixel(p, levels))
            .collect(),
    })
}

/// Bin indicator: 1 when `0 <= x < 256 / L`, else 0.
///
/// Applied to `pixel - l * 256 / L` it selects the pixels of level `l`.
#[inline]
pub fn step_activation(x: f64, levels: usize) -> u8 {
    step_activation_scaled(x * levels as f64)
}

/// [`step_activation`] on an argument already multiplied by `L`.
///
/// `pixel * L - 256 * l` is an exact integer, whereas `l * 256 / L` rounds
/// for levels that do not divide 256 and can flip a bin boundary.
#[inline]
pub fn step_activation_scaled(x_times_levels: f64) -> u8 {
    u8::from((0.0..256.0).contains(&x_times_levels))
}

/// `-x log2 x`, with the `x = 0` branch pinned to exactly 0.
pub fn entropy_activation(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(x));
    }
    Ok(entropy_term(x))
}

#[inline]
pub(crate) fn entropy_term(p: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Number of window rows and columns that fit entirely inside the image.
pub fn grid_dims(img_h: usize, img_w: usize, spec: &WindowSpec) -> Result<(usize, usize)> {
    if img_h < spec.win_h || img_w < spec.win_w {
        return Err(Error::ImageSmallerThanWindow {
            img_w,
            img_h,
            win_w: spec.win_w,
            win_h: spec.win_h,
        });
    }
    Ok((
        (img_h - spec.win_h) / spec.stride + 1,
        (img_w - spec.win_w) / spec.stride + 1,
    ))
}

/// Entropy of the window with top-left corner `(x0, y0)`.
pub fn region_entropy(q: &QuantizedImage, x0: usize, y0: usize, spec: &WindowSpec) -> Result<f64> {
    if x0 + spec.win_w > q.width || y0 + spec.win_h > q.height {
        return Err(Error::OutOfBounds {
            x0,
            y0,
            win_w: spec.win_w,
            win_h: spec.win_h,
            img_w: q.width,
            img_h: q.height,
        });
    }
    if spec.levels != q.levels {
        return Err(Error::InvalidSpec(format!(
            "spec has {} levels but the image was quantized to {}",
            spec.levels, q.levels
        )));
    }
    let area = spec.window_area() as f64;
    let mut h = 0.0;
    for level in 0..spec.levels {
        // P_l = (1 / hw) * sum of the level-l indicator over the window
        let mut hits = 0usize;
        for y in y0..y0 + spec.win_h {
            for x in x0..x0 + spec.win_w {
                if usize::from(q.get(x, y)) == level {
                    hits += 1;
                }
            }
        }
        h += entropy_term(hits as f64 / area);
    }
    Ok(h)
}

/// Reference engine: one independent histogram per window.
pub fn entropy_map_naive(img: &GrayImage, spec: &WindowSpec) -> Result<EntropyMap> {
    let (rows, cols) = grid_dims(img.height(), img.width(), spec)?;
    let q = quantize(img, spec.levels)?;
    let mut values = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            values.push(region_entropy(&q, c * spec.stride, r * spec.stride, spec)?);
        }
    }
    EntropyMap::new(rows, cols, *spec, values)
}

/// Entropy of the whole image's quantized histogram.
pub fn global_entropy(img: &GrayImage, levels: usize) -> Result<f64> {
    let q = quantize(img, levels)?;
    let mut hist = vec![0usize; levels];
    for &v in q.values() {
        hist[usize::from(v)] += 1;
    }
    let n = q.values().len() as f64;
    Ok(hist.iter().map(|&c| entropy_term(c as f64 / n)).sum())
}
