//! Full-reference scores: RDIE plus the MSE / PSNR / SSIM baselines.

use serde::{Serialize, Serializer};

use crate::entropy::{entropy_map_fast, entropy_map_naive, EntropyMap, GrayImage, WindowSpec};
use crate::error::{Error, Result};

pub const RDIE: &str = "rdie";
pub const MSE: &str = "mse";
pub const PSNR: &str = "psnr";
pub const SSIM: &str = "ssim";

/// Metrics computed from the images themselves.
pub const BUILTIN_METRICS: [&str; 4] = [RDIE, MSE, PSNR, SSIM];

/// Side length of the uniform SSIM window.
pub const SSIM_WINDOW: usize = 8;
const SSIM_C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const SSIM_C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

/// Which entropy-map implementation to run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Naive,
    #[default]
    Fast,
}

impl Engine {
    pub fn entropy_map(self, img: &GrayImage, spec: &WindowSpec) -> Result<EntropyMap> {
        match self {
            Engine::Naive => entropy_map_naive(img, spec),
            Engine::Fast => entropy_map_fast(img, spec),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricScore {
    pub metric_name: String,
    #[serde(serialize_with = "serialize_score")]
    pub value: f64,
    pub higher_is_better: bool,
}

impl MetricScore {
    fn new(metric_name: &str, value: f64, higher_is_better: bool) -> Self {
        Self {
            metric_name: metric_name.to_owned(),
            value,
            higher_is_better,
        }
    }
}

/// Whether a larger value of the named metric means better quality.
///
/// Names outside the built-in set are assumed higher-is-better.
pub fn higher_is_better(metric: &str) -> bool {
    !matches!(metric, RDIE | MSE)
}

/// Writes non-finite scores as `"inf"`, `"-inf"` or `"nan"` strings.
pub fn serialize_score<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
    if value.is_finite() {
        s.serialize_f64(*value)
    } else {
        s.serialize_str(&format_score(*value))
    }
}

/// Text form of a score; round-trips finite values exactly.
pub fn format_score(value: f64) -> String {
    if value.is_nan() {
        "nan".to_owned()
    } else if value == f64::INFINITY {
        "inf".to_owned()
    } else if value == f64::NEG_INFINITY {
        "-inf".to_owned()
    } else {
        format!("{value:?}")
    }
}

/// Root-mean-square difference of two entropy maps on the same grid.
pub fn rms_difference(a: &EntropyMap, b: &EntropyMap) -> Result<f64> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch {
            left_w: a.cols(),
            left_h: a.rows(),
            right_w: b.cols(),
            right_h: b.rows(),
        });
    }
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((sum / a.values().len() as f64).sqrt())
}

/// RMS difference between the entropy maps of `test` and `reference`.
pub fn rdie_score(
    test: &GrayImage,
    reference: &GrayImage,
    spec: &WindowSpec,
    engine: Engine,
) -> Result<MetricScore> {
    test.ensure_same_dims(reference)?;
    let a = engine.entropy_map(test, spec)?;
    let b = engine.entropy_map(reference, spec)?;
    Ok(MetricScore::new(RDIE, rms_difference(&a, &b)?, false))
}

fn mse_value(test: &GrayImage, reference: &GrayImage) -> Result<f64> {
    test.ensure_same_dims(reference)?;
    let sum: u64 = test
        .pixels()
        .iter()
        .zip(reference.pixels())
        .map(|(&a, &b)| {
            let d = i64::from(a) - i64::from(b);
            (d * d) as u64
        })
        .sum();
    Ok(sum as f64 / test.pixels().len() as f64)
}

pub fn mse(test: &GrayImage, reference: &GrayImage) -> Result<MetricScore> {
    Ok(MetricScore::new(MSE, mse_value(test, reference)?, false))
}

/// Converts an MSE to PSNR in dB; zero error maps to `+inf`.
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0 * 255.0 / mse).log10()
    }
}

pub fn psnr(test: &GrayImage, reference: &GrayImage) -> Result<MetricScore> {
    Ok(MetricScore::new(
        PSNR,
        psnr_from_mse(mse_value(test, reference)?),
        true,
    ))
}

/// Summed-area table with one extra leading row and column of zeros.
struct Integral {
    stride: usize,
    sums: Vec<u64>,
}

impl Integral {
    fn build(width: usize, height: usize, value: impl Fn(usize) -> u64) -> Self {
        let stride = width + 1;
        let mut sums = vec![0u64; stride * (height + 1)];
        for y in 0..height {
            let mut row_sum = 0u64;
            for x in 0..width {
                row_sum += value(y * width + x);
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row_sum;
            }
        }
        Self { stride, sums }
    }

    #[inline]
    fn window(&self, x0: usize, y0: usize, size: usize) -> u64 {
        let s = self.stride;
        let (x1, y1) = (x0 + size, y0 + size);
        self.sums[y1 * s + x1] + self.sums[y0 * s + x0]
            - self.sums[y0 * s + x1]
            - self.sums[y1 * s + x0]
    }
}

/// Mean SSIM over all 8x8 windows at stride 1, uniform weights.
pub fn ssim(test: &GrayImage, reference: &GrayImage) -> Result<MetricScore> {
    test.ensure_same_dims(reference)?;
    let (w, h) = (test.width(), test.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::ImageSmallerThanWindow {
            img_w: w,
            img_h: h,
            win_w: SSIM_WINDOW,
            win_h: SSIM_WINDOW,
        });
    }
    let a = test.pixels();
    let b = reference.pixels();
    let sa = Integral::build(w, h, |i| u64::from(a[i]));
    let sb = Integral::build(w, h, |i| u64::from(b[i]));
    let saa = Integral::build(w, h, |i| u64::from(a[i]) * u64::from(a[i]));
    let sbb = Integral::build(w, h, |i| u64::from(b[i]) * u64::from(b[i]));
    let sab = Integral::build(w, h, |i| u64::from(a[i]) * u64::from(b[i]));

    let n = (SSIM_WINDOW * SSIM_WINDOW) as f64;
    let n_int = (SSIM_WINDOW * SSIM_WINDOW) as i128;
    let mut total = 0.0;
    let mut count = 0usize;
    for y0 in 0..=h - SSIM_WINDOW {
        for x0 in 0..=w - SSIM_WINDOW {
            let (xa, xb) = (
                sa.window(x0, y0, SSIM_WINDOW) as i128,
                sb.window(x0, y0, SSIM_WINDOW) as i128,
            );
            let xaa = saa.window(x0, y0, SSIM_WINDOW) as i128;
            let xbb = sbb.window(x0, y0, SSIM_WINDOW) as i128;
            let xab = sab.window(x0, y0, SSIM_WINDOW) as i128;
            // n^2 * (co)variance, exact in integers
            let var_a = (n_int * xaa - xa * xa) as f64 / (n * n);
            let var_b = (n_int * xbb - xb * xb) as f64 / (n * n);
            let cov = (n_int * xab - xa * xb) as f64 / (n * n);
            let (mu_a, mu_b) = (xa as f64 / n, xb as f64 / n);
            let num = (2.0 * mu_a * mu_b + SSIM_C1) * (2.0 * cov + SSIM_C2);
            let den = (mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (var_a + var_b + SSIM_C2);
            total += num / den;
            count += 1;
        }
    }
    Ok(MetricScore::new(SSIM, total / count as f64, true))
}

/// Computes one of the [`BUILTIN_METRICS`] by name.
pub fn score_by_name(
    metric: &str,
    test: &GrayImage,
    reference: &GrayImage,
    spec: &WindowSpec,
    engine: Engine,
) -> Result<MetricScore> {
    match metric {
        RDIE => rdie_score(test, reference, spec, engine),
        MSE => mse(test, reference),
        PSNR => psnr(test, reference),
        SSIM => ssim(test, reference),
        other => Err(Error::UnknownMetric(other.to_owned())),
    }
}

/// Renders an entropy map as one gray pixel per region, scaled so the
/// largest attainable entropy is white.
pub fn map_to_image(map: &EntropyMap) -> GrayImage {
    let max = map.spec().max_entropy();
    let pixels = map
        .values()
        .iter()
        .map(|&v| {
            if max > 0.0 {
                (v / max * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        })
        .collect();
    GrayImage::new(map.cols(), map.rows(), pixels).expect("entropy maps are never empty")
}
