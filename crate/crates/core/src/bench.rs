//! Wall-clock comparison of the naive and fast engines.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::entropy::{
    entropy_map_fast, entropy_map_naive, global_entropy, global_entropy_fast, GrayImage, WindowSpec,
};
use crate::error::{Error, Result};

pub const MIN_REPETITIONS: usize = 5;
pub const DEFAULT_BENCH_WIDTH: usize = 2040;
pub const DEFAULT_BENCH_HEIGHT: usize = 1356;
pub const BENCH_SEED: u64 = 0x5eed_2040;
const EQUALITY_TOLERANCE: f64 = 1e-9;

/// Default benchmark spec: 4x4 windows, stride 4, 8 levels.
pub fn default_bench_spec() -> WindowSpec {
    WindowSpec::new(4, 4, 4, 8).expect("valid constant spec")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BenchOp {
    #[serde(rename = "GIE_naive")]
    GieNaive,
    #[serde(rename = "GIE_fast")]
    GieFast,
    #[serde(rename = "RIE_naive")]
    RieNaive,
    #[serde(rename = "RIE_fast")]
    RieFast,
}

impl BenchOp {
    pub fn as_str(self) -> &'static str {
        match self {
            BenchOp::GieNaive => "GIE_naive",
            BenchOp::GieFast => "GIE_fast",
            BenchOp::RieNaive => "RIE_naive",
            BenchOp::RieFast => "RIE_fast",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchResult {
    pub op_name: BenchOp,
    pub width: usize,
    pub height: usize,
    pub spec: WindowSpec,
    pub repetitions: usize,
    pub median_ms: f64,
    /// Naive median over this op's median; 1.0 for naive ops.
    pub speedup_vs_naive: f64,
}

/// Uniform pseudo-random pixels, identical for identical arguments.
pub fn synthetic_image(width: usize, height: usize, seed: u64) -> Result<GrayImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pixels = vec![0u8; width * height];
    rng.fill(&mut pixels[..]);
    GrayImage::new(width, height, pixels)
}

/// Checks that both engines agree on `img` within 1e-9.
pub fn verify_engines(img: &GrayImage, spec: &WindowSpec) -> Result<()> {
    let (g_naive, g_fast) = (
        global_entropy(img, spec.levels())?,
        global_entropy_fast(img, spec.levels())?,
    );
    if (g_naive - g_fast).abs() > EQUALITY_TOLERANCE {
        return Err(Error::Correctness(format!(
            "global entropy {g_naive} vs {g_fast}"
        )));
    }
    let naive = entropy_map_naive(img, spec)?;
    let fast = entropy_map_fast(img, spec)?;
    let diff = naive
        .max_abs_diff(&fast)
        .ok_or_else(|| Error::Correctness(format!("entropy map grids differ at {spec}")))?;
    if diff > EQUALITY_TOLERANCE {
        return Err(Error::Correctness(format!(
            "entropy maps differ by up to {diff} at {spec}"
        )));
    }
    Ok(())
}

/// Median wall time in milliseconds over `reps` runs after one discarded warm-up.
pub fn median_ms(reps: usize, mut f: impl FnMut()) -> f64 {
    f();
    let mut times: Vec<f64> = (0..reps)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    times.sort_by(f64::total_cmp);
    let mid = times.len() / 2;
    if times.len() % 2 == 1 {
        times[mid]
    } else {
        (times[mid - 1] + times[mid]) / 2.0
    }
}

/// Times global and regional entropy with both engines, serially.
///
/// Outputs are verified equal before anything is timed.
pub fn run_bench(img: &GrayImage, spec: &WindowSpec, reps: usize) -> Result<Vec<BenchResult>> {
    if reps < MIN_REPETITIONS {
        return Err(Error::Precondition(format!(
            "at least {MIN_REPETITIONS} repetitions are required, got {reps}"
        )));
    }
    verify_engines(img, spec)?;
    let levels = spec.levels();
    let time = |op: BenchOp| -> f64 {
        match op {
            BenchOp::GieNaive => median_ms(reps, || {
                std::hint::black_box(global_entropy(img, levels).ok());
            }),
            BenchOp::GieFast => median_ms(reps, || {
                std::hint::black_box(global_entropy_fast(img, levels).ok());
            }),
            BenchOp::RieNaive => median_ms(reps, || {
                std::hint::black_box(entropy_map_naive(img, spec).ok());
            }),
            BenchOp::RieFast => median_ms(reps, || {
                std::hint::black_box(entropy_map_fast(img, spec).ok());
            }),
        }
    };
    let mut results = Vec::with_capacity(4);
    for (naive_op, fast_op) in [
        (BenchOp::GieNaive, BenchOp::GieFast),
        (BenchOp::RieNaive, BenchOp::RieFast),
    ] {
        let naive = time(naive_op);
        let fast = time(fast_op);
        for (op, ms, speedup) in [(naive_op, naive, 1.0), (fast_op, fast, naive / fast)] {
            results.push(BenchResult {
                op_name: op,
                width: img.width(),
                height: img.height(),
                spec: *spec,
                repetitions: reps,
                median_ms: ms,
                speedup_vs_naive: speedup,
            });
        }
    }
    Ok(results)
}

/// Fixed-width table, one row per op.
pub fn render_text(results: &[BenchResult]) -> String {
    let mut out = format!(
        "{:<10} {:>11} {:<12} {:>5} {:>12} {:>10}\n",
        "op", "image", "spec", "reps", "median_ms", "speedup"
    );
    for r in results {
        out.push_str(&format!(
            "{:<10} {:>11} {:<12} {:>5} {:>12.3} {:>10.1}\n",
            r.op_name.as_str(),
            format!("{}x{}", r.width, r.height),
            r.spec.to_string(),
            r.repetitions,
            r.median_ms,
            r.speedup_vs_naive
        ));
    }
    out
}
