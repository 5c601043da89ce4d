//! Channelized entropy engine.
//!
//! Each band of `win_h` image rows that feeds one row of windows is
//! processed as a small dataflow:
//!
//! 1. one-hot expansion: every pixel sets channel `l` where
//!    `step(pixel - l * 256 / L)` fires (a 1x1 convolution plus the step
//!    activation), accumulated down the band into per-channel column counts;
//! 2. pooling: each channel's column counts are summed over `win_w`
//!    columns at the given stride, giving `h * w * P_l` per window;
//! 3. activation: a table of `-p log2 p` indexed by the pooled count,
//!    summed over channels in level order.
//!
//! Step 3 adds the same terms in the same order as the naive engine, so
//! the two maps are bit-identical. Bands are independent and run in
//! parallel.

use std::ops::AddAssign;

use rayon::prelude::*;

use super::{entropy_term, grid_dims, step_activation_scaled, EntropyMap, GrayImage, WindowSpec};
use crate::error::Result;

/// Levels up to this count use one vectorizable compare pass per channel;
/// above it a single scatter pass over the band is cheaper.
const COMPARE_PASS_MAX_LEVELS: usize = 32;

trait Count: Copy + Default + AddAssign + Send + Sync {
    fn one() -> Self;
    fn from_bool(b: bool) -> Self;

    /// `out[c] += table[pooled[c]]`; `table` covers every representable count.
    fn accumulate(out: &mut [f64], pooled: &[Self], table: &[f64]);
}

macro_rules! impl_count {
    ($($t:ty),*) => {$(
        impl Count for $t {
            #[inline(always)]
            fn one() -> Self {
                1
            }
            #[inline(always)]
            fn from_bool(b: bool) -> Self {
                b as $t
            }
            #[inline(always)]
            fn accumulate(out: &mut [f64], pooled: &[Self], table: &[f64]) {
                for (h, &count) in out.iter_mut().zip(pooled) {
                    *h += table[count as usize];
                }
            }
        }
    )*};
}

impl_count!(u16, u32);

impl Count for u8 {
    #[inline(always)]
    fn one() -> Self {
        1
    }

    #[inline(always)]
    fn from_bool(b: bool) -> Self {
        u8::from(b)
    }

    #[inline(always)]
    fn accumulate(out: &mut [f64], pooled: &[Self], table: &[f64]) {
        let table: &[f64; 256] = table[..256].try_into().expect("u8 table holds 256 entries");
        for (h, &count) in out.iter_mut().zip(pooled) {
            *h += table[usize::from(count)];
        }
    }
}

struct Plan<'a> {
    img: &'a GrayImage,
    spec: WindowSpec,
    cols: usize,
    /// Columns touched by some window.
    span: usize,
    /// Channel of every intensity, from the step activation.
    channel_of: [u8; 256],
    /// `table[c] = -(c/n) log2(c/n)` for window area `n`, zero-padded to at
    /// least 256 entries.
    table: Vec<f64>,
}

impl<'a> Plan<'a> {
    fn new(img: &'a GrayImage, spec: &WindowSpec, cols: usize) -> Self {
        let levels = spec.levels();
        let mut channel_of = [0u8; 256];
        for (pixel, channel) in channel_of.iter_mut().enumerate() {
            let level = (0..levels)
                .find(|&l| {
                    let scaled = (pixel * levels) as f64 - (l * 256) as f64;
                    step_activation_scaled(scaled) == 1
                })
                .expect("every intensity falls in exactly one level");
            *channel = level as u8;
        }
        let area = spec.window_area();
        let n = area as f64;
        Self {
            img,
            spec: *spec,
            cols,
            span: (cols - 1) * spec.stride() + spec.win_w(),
            channel_of,
            table: (0..=area.max(255))
                .map(|c| {
                    if c <= area {
                        entropy_term(c as f64 / n)
                    } else {
                        0.0
                    }
                })
                .collect(),
        }
    }
}

struct Scratch<T> {
    channels: Vec<u8>,
    planes: Vec<T>,
    pooled: Vec<T>,
}

impl<T: Count> Scratch<T> {
    fn new(plan: &Plan<'_>) -> Self {
        let levels = plan.spec.levels();
        Self {
            channels: vec![0; plan.span],
            planes: vec![T::default(); levels * plan.span],
            pooled: vec![T::default(); plan.cols],
        }
    }
}

#[inline(always)]
fn band<T: Count>(plan: &Plan<'_>, scratch: &mut Scratch<T>, band_row: usize, out: &mut [f64]) {
    let spec = &plan.spec;
    let levels = spec.levels();
    let span = plan.span;
    let (win_w, stride) = (spec.win_w(), spec.stride());
    let y0 = band_row * stride;

    scratch.planes.fill(T::default());
    for y in y0..y0 + spec.win_h() {
        let row = &plan.img.row(y)[..span];
        if levels <= COMPARE_PASS_MAX_LEVELS {
            // step(pixel - l * 256 / L) fires exactly when
            // floor(pixel * L / 256) == l
            let lv = levels as u16;
            for (ch, &p) in scratch.channels.iter_mut().zip(row) {
                *ch = ((u16::from(p) * lv) >> 8) as u8;
            }
            for (l, plane) in scratch.planes.chunks_exact_mut(span).enumerate() {
                let l = l as u8;
                for (count, &ch) in plane.iter_mut().zip(&scratch.channels) {
                    *count += T::from_bool(ch == l);
                }
            }
        } else {
            for (x, &p) in row.iter().enumerate() {
                let l = usize::from(plan.channel_of[usize::from(p)]);
                scratch.planes[l * span + x] += T::one();
            }
        }
    }

    out.fill(0.0);
    for plane in scratch.planes.chunks_exact(span) {
        if stride == win_w {
            pool_tiled(plane, &mut scratch.pooled, win_w);
        } else {
            scratch.pooled.fill(T::default());
            for k in 0..win_w {
                let taps = plane[k..].iter().step_by(stride);
                for (pooled, &count) in scratch.pooled.iter_mut().zip(taps) {
                    *pooled += count;
                }
            }
        }
        T::accumulate(out, &scratch.pooled, &plan.table);
    }
}

/// Sums adjacent non-overlapping runs of `win_w` counts.
#[inline(always)]
fn pool_tiled<T: Count>(plane: &[T], pooled: &mut [T], win_w: usize) {
    #[inline(always)]
    fn fixed<T: Count, const W: usize>(plane: &[T], pooled: &mut [T]) {
        for (out, run) in pooled.iter_mut().zip(plane.chunks_exact(W)) {
            let mut sum = T::default();
            for &c in run {
                sum += c;
            }
            *out = sum;
        }
    }
    macro_rules! dispatch {
        ($($w:literal)*) => {
            match win_w {
                $($w => fixed::<T, $w>(plane, pooled),)*
                _ => {
                    for (out, run) in pooled.iter_mut().zip(plane.chunks_exact(win_w)) {
                        let mut sum = T::default();
                        for &c in run {
                            sum += c;
                        }
                        *out = sum;
                    }
                }
            }
        };
    }
    dispatch!(1 2 3 4 5 6 7 8 9 10 11 12 13 14 15 16);
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn band_avx2<T: Count>(
    plan: &Plan<'_>,
    scratch: &mut Scratch<T>,
    band_row: usize,
    out: &mut [f64],
) {
    band(plan, scratch, band_row, out)
}

fn run<T: Count>(plan: &Plan<'_>, values: &mut [f64]) {
    #[cfg(target_arch = "x86_64")]
    let avx2 = is_x86_feature_detected!("avx2");
    values.par_chunks_mut(plan.cols).enumerate().for_each_init(
        || Scratch::<T>::new(plan),
        |scratch, (r, out)| {
            #[cfg(target_arch = "x86_64")]
            if avx2 {
                // SAFETY: avx2 support was detected at runtime
                unsafe { band_avx2(plan, scratch, r, out) };
                return;
            }
            band(plan, scratch, r, out);
        },
    );
}

/// Channelized entropy map; bands of windows run in parallel.
pub fn entropy_map_fast(img: &GrayImage, spec: &WindowSpec) -> Result<EntropyMap> {
    let (rows, cols) = grid_dims(img.height(), img.width(), spec)?;
    let plan = Plan::new(img, spec, cols);
    let mut values = vec![0.0; rows * cols];
    match spec.window_area() {
        0..=255 => run::<u8>(&plan, &mut values),
        256..=65535 => run::<u16>(&plan, &mut values),
        _ => run::<u32>(&plan, &mut values),
    }
    EntropyMap::new(rows, cols, *spec, values)
}

/// Whole-image entropy via a parallel intensity histogram folded into levels.
pub fn global_entropy_fast(img: &GrayImage, levels: usize) -> Result<f64> {
    super::check_levels(levels)?;
    let hist = img
        .pixels()
        .par_chunks(1 << 16)
        .map(|chunk| {
            let mut h = [0usize; 256];
            for &p in chunk {
                h[usize::from(p)] += 1;
            }
            h
        })
        .reduce(
            || [0usize; 256],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let mut level_counts = vec![0usize; levels];
    for (p, &count) in hist.iter().enumerate() {
        level_counts[usize::from(super::quantize_pixel(p as u8, levels))] += count;
    }
    let n = img.pixels().len() as f64;
    Ok(level_counts
        .iter()
        .map(|&c| entropy_term(c as f64 / n))
        .sum())
}
