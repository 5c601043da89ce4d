//! Acceptance suite. Runs every criterion in order, one line of output each,
//! and exits non-zero if any criterion fails. Criteria run serially so the
//! timing checks are not disturbed by other work.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rdie::bench::{self, median_ms};
use rdie::entropy::{
    entropy_map_fast, entropy_map_naive, global_entropy, quantize, region_entropy, EntropyMap,
    GrayImage, WindowSpec,
};
use rdie::eval::{plcc, srcc};
use rdie::io::save_gray;
use rdie::metrics::{psnr, rdie_score, ssim, Engine};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn spec(h: usize, w: usize, s: usize, l: usize) -> WindowSpec {
    WindowSpec::new(h, w, s, l).unwrap()
}

fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| rng.gen()).unwrap()
}

/// Random pixels plus two gratings, lightly smoothed.
fn textured(w: usize, h: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..w * h).map(|_| rng.gen_range(-60.0..60.0)).collect();
    GrayImage::from_fn(w, h, |x, y| {
        let (fx, fy) = (x as f64, y as f64);
        let grating = 50.0 * (fx * 0.7).sin() + 40.0 * (fy * 0.45 + fx * 0.2).cos();
        (128.0 + grating + noise[y * w + x])
            .round()
            .clamp(0.0, 255.0) as u8
    })
    .unwrap()
}

/// Separable Gaussian blur with clamped borders.
fn gaussian_blur(img: &GrayImage, sigma: f64) -> GrayImage {
    let radius = (3.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = kernel.iter().sum();
    let (w, h) = (img.width() as isize, img.height() as isize);
    let clamp = |v: isize, n: isize| v.clamp(0, n - 1) as usize;
    let mut tmp = vec![0.0; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                let xx = clamp(x + k as isize - radius, w);
                acc += kv * f64::from(img.get(xx, y as usize));
            }
            tmp[(y * w + x) as usize] = acc / norm;
        }
    }
    GrayImage::from_fn(w as usize, h as usize, |x, y| {
        let mut acc = 0.0;
        for (k, &kv) in kernel.iter().enumerate() {
            let yy = clamp(y as isize + k as isize - radius, h);
            acc += kv * tmp[yy * w as usize + x];
        }
        (acc / norm).round().clamp(0.0, 255.0) as u8
    })
    .unwrap()
}

fn max_diff(a: &EntropyMap, b: &EntropyMap) -> f64 {
    a.max_abs_diff(b).unwrap_or(f64::INFINITY)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (w, h) = (rng.gen_range(8..=64), rng.gen_range(8..=64));
        let img = random_image(&mut rng, w, h);
        for win in 2..=8 {
            for stride in 1..=win {
                for levels in [2, 4, 8, 32, 256] {
                    let s = spec(win, win, stride, levels);
                    let d = max_diff(
                        &entropy_map_fast(&img, &s).unwrap(),
                        &entropy_map_naive(&img, &s).unwrap(),
                    );
                    worst = worst.max(d);
                    ensure(d <= 1e-9, format!("{w}x{h} at {s}: max diff {d}"))?;
                    checked += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, format!("took {secs:.1} s (limit 60 s)"))?;
    Ok(format!(
        "{checked} image/spec pairs, max diff {worst:e}, {secs:.1} s"
    ))
}

fn analytic_fixtures() -> Outcome {
    let region = |pixels: Vec<u8>, levels: usize| {
        let img = GrayImage::new(4, 4, pixels).unwrap();
        let q = quantize(&img, levels).unwrap();
        region_entropy(&q, 0, 0, &spec(4, 4, 4, levels)).unwrap()
    };
    let constant = region(vec![77; 16], 32);
    ensure(
        constant.abs() <= 1e-12,
        format!("constant region gave {constant}"),
    )?;

    let two: Vec<u8> = (0..16).map(|i| if i % 2 == 0 { 0 } else { 255 }).collect();
    let equi = region(two, 2);
    ensure(
        (equi - 1.0).abs() <= 1e-12,
        format!("equiprobable 2-level region gave {equi}"),
    )?;

    let mut three = vec![0u8; 8];
    three.extend([128u8; 4]);
    three.extend([255u8; 4]);
    let h = region(three, 4);
    ensure((h - 1.5).abs() <= 1e-12, format!("8/4/4 region gave {h}"))?;

    let mut px = vec![0u8; 68];
    px.extend([255u8; 32]);
    let g = global_entropy(&GrayImage::new(10, 10, px).unwrap(), 2).unwrap();
    ensure(
        (g - 0.904381).abs() <= 1e-5,
        format!("68:32 global entropy {g}"),
    )?;
    Ok(format!("0, 1, 1.5 exact; 68:32 global entropy {g:.6}"))
}

fn histogram_degeneracy() -> Outcome {
    let block = GrayImage::from_fn(32, 32, |x, _| if x < 16 { 0 } else { 255 }).unwrap();
    let stripes = GrayImage::from_fn(32, 32, |x, _| if x % 2 == 0 { 0 } else { 255 }).unwrap();
    let (gb, gs) = (
        global_entropy(&block, 2).unwrap(),
        global_entropy(&stripes, 2).unwrap(),
    );
    ensure(
        (gb - gs).abs() <= 1e-12,
        format!("global entropies {gb} vs {gs}"),
    )?;
    let r = rdie_score(&block, &stripes, &spec(4, 4, 4, 2), Engine::Fast)
        .unwrap()
        .value;
    ensure(r > 0.1, format!("RDIE {r} not above 0.1"))?;
    Ok(format!("global {gb} for both, RDIE {r}"))
}

fn quantization_sensitivity() -> Outcome {
    let stripes =
        |a: u8, b: u8| GrayImage::from_fn(16, 16, |x, _| if x % 2 == 0 { a } else { b }).unwrap();
    let (low, high) = (stripes(127, 128), stripes(0, 255));
    let fine = spec(4, 4, 4, 256);
    let (l256, h256) = (
        entropy_map_fast(&low, &fine).unwrap(),
        entropy_map_fast(&high, &fine).unwrap(),
    );
    ensure(l256 == h256, "maps differ at L=256")?;
    let coarse = spec(4, 4, 4, 8);
    let (l8, h8) = (
        entropy_map_fast(&low, &coarse).unwrap(),
        entropy_map_fast(&high, &coarse).unwrap(),
    );
    ensure(
        h8.values().iter().all(|&v| v == 1.0),
        "high-contrast map at L=8 is not all ones",
    )?;
    ensure(
        l8.values().iter().all(|&v| v == 0.0),
        format!(
            "low-contrast map at L=8 is not all zeros (cells = {}; 127 and 128 quantize to levels {} and {})",
            l8.values()[0],
            rdie::entropy::quantize_pixel(127, 8),
            rdie::entropy::quantize_pixel(128, 8)
        ),
    )?;
    Ok("identical at L=256; zeros vs ones at L=8".into())
}

fn benchmark_shape() -> Outcome {
    let img = bench::synthetic_image(
        bench::DEFAULT_BENCH_WIDTH,
        bench::DEFAULT_BENCH_HEIGHT,
        bench::BENCH_SEED,
    )
    .unwrap();
    let s = bench::default_bench_spec();
    bench::verify_engines(&img, &s).map_err(|e| e.to_string())?;
    let naive = median_ms(5, || {
        std::hint::black_box(entropy_map_naive(&img, &s).unwrap());
    });
    let fast = median_ms(15, || {
        std::hint::black_box(entropy_map_fast(&img, &s).unwrap());
    });
    let speedup = naive / fast;
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let detail =
        format!("naive {naive:.2} ms, fast {fast:.3} ms, speedup {speedup:.1}x on {cores} core(s)");
    ensure(fast < 2000.0, format!("fast time too slow: {detail}"))?;
    ensure(speedup >= 50.0, format!("speedup below 50x: {detail}"))?;
    Ok(detail)
}

fn brute_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let less = v.iter().filter(|&&y| y < x).count() as f64;
            let equal = v.iter().filter(|&&y| y == x).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

fn covariance_pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - ma) * (y - mb))
        .sum::<f64>()
        / n;
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / n;
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum::<f64>() / n;
    (va > 0.0 && vb > 0.0).then(|| cov / (va * vb).sqrt())
}

fn correlation_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut tied = 0;
    for _ in 0..100 {
        let a: Vec<f64> = (0..20).map(|_| f64::from(rng.gen_range(0..8u8))).collect();
        let b: Vec<f64> = (0..20)
            .map(|_| rng.gen_range(-5.0..5.0f64).round() + rng.gen_range(0..3) as f64 * 0.25)
            .collect();
        if brute_ranks(&a).iter().any(|r| r.fract() != 0.0) {
            tied += 1;
        }
        let pairs = [
            (
                srcc(&a, &b).ok(),
                covariance_pearson(&brute_ranks(&a), &brute_ranks(&b)),
            ),
            (plcc(&a, &b).ok(), covariance_pearson(&a, &b)),
        ];
        for (got, want) in pairs {
            match (got, want) {
                (Some(g), Some(w)) => {
                    worst = worst.max((g - w).abs());
                    ensure((g - w).abs() <= 1e-12, format!("{g} vs oracle {w}"))?;
                }
                (None, None) => {}
                other => return Err(format!("definedness differs: {other:?}")),
            }
        }
    }
    Ok(format!(
        "100 vector pairs ({tied} with ties), max diff {worst:e}"
    ))
}

fn monotone_degradation() -> Outcome {
    let reference = textured(256, 256, 7);
    let sigmas: Vec<f64> = (1..=8).map(|i| 0.5 * i as f64).collect();
    let scores: Vec<f64> = sigmas
        .iter()
        .map(|&s| {
            rdie_score(
                &gaussian_blur(&reference, s),
                &reference,
                &WindowSpec::default(),
                Engine::Fast,
            )
            .unwrap()
            .value
        })
        .collect();
    let rho = srcc(&scores, &sigmas).map_err(|e| e.to_string())?;
    ensure(rho >= 0.95, format!("SRCC {rho} for scores {scores:?}"))?;
    Ok(format!("SRCC {rho} over 8 blur levels"))
}

fn run_eval(manifest: &Path, out: &Path) -> Result<Vec<u8>, String> {
    let args = [
        "rdie".into(),
        "eval".into(),
        manifest.display().to_string(),
        "--metrics".into(),
        "rdie".into(),
        "--out".into(),
        out.display().to_string(),
    ];
    let (mut so, mut se) = (Vec::new(), Vec::new());
    let code = rdie::cli::run(args, &mut so, &mut se);
    ensure(
        code == 0,
        format!("exit {code}: {}", String::from_utf8_lossy(&se)),
    )?;
    std::fs::read(out).map_err(|e| e.to_string())
}

fn end_to_end_eval() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let reference = textured(48, 48, 8);
    save_gray(&reference, &dir.path().join("ref.png")).map_err(|e| e.to_string())?;
    let categories = ["traditional", "psnr_oriented", "gan_based"];
    let mut csv = String::from("test_path,ref_path,method,category,mos\n");
    let mut rdies = Vec::new();
    for i in 0..12 {
        let test = gaussian_blur(&reference, 0.4 + 0.3 * i as f64);
        let name = format!("t{i:02}.png");
        save_gray(&test, &dir.path().join(&name)).map_err(|e| e.to_string())?;
        let r = rdie_score(&test, &reference, &WindowSpec::default(), Engine::Fast)
            .unwrap()
            .value;
        rdies.push(r);
        let mos = 5.0 - 0.5 * r;
        csv.push_str(&format!(
            "{name},ref.png,method{},{},{mos:?}\n",
            i % 2,
            categories[i % 3]
        ));
    }
    let mut sorted = rdies.clone();
    sorted.sort_by(f64::total_cmp);
    ensure(
        sorted.windows(2).all(|w| w[0] < w[1]),
        format!("fixture RDIE values not distinct: {rdies:?}"),
    )?;
    let manifest = dir.path().join("manifest.csv");
    std::fs::write(&manifest, csv).map_err(|e| e.to_string())?;

    let first = run_eval(&manifest, &dir.path().join("a.json"))?;
    let second = run_eval(&manifest, &dir.path().join("b.json"))?;
    ensure(first == second, "two runs produced different bytes")?;

    let doc: serde_json::Value = serde_json::from_slice(&first).map_err(|e| e.to_string())?;
    let reports = doc["reports"].as_array().ok_or("no reports")?;
    let mut checked = 0;
    for r in reports.iter().filter(|r| r["group_kind"] != "method") {
        ensure(
            r["srcc"] == 1.0,
            format!("group {} has srcc {}", r["group_key"], r["srcc"]),
        )?;
        checked += 1;
    }
    ensure(
        checked == 4,
        format!("expected all + 3 categories, saw {checked} groups"),
    )?;
    Ok("overall and 3 per-category SRCC = 1.0, byte-identical reruns".into())
}

fn metric_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let (w, h) = (rng.gen_range(8..=48), rng.gen_range(8..=48));
        let a = random_image(&mut rng, w, h);
        let b = random_image(&mut rng, w, h);
        let s = WindowSpec::default();
        for engine in [Engine::Naive, Engine::Fast] {
            let ab = rdie_score(&a, &b, &s, engine).unwrap().value;
            let ba = rdie_score(&b, &a, &s, engine).unwrap().value;
            ensure(ab == ba, format!("asymmetric: {ab} vs {ba}"))?;
            ensure(
                rdie_score(&a, &a, &s, engine).unwrap().value == 0.0,
                "self score not zero",
            )?;
        }
    }
    let zeros = GrayImage::filled(16, 16, 0).unwrap();
    let full = GrayImage::filled(16, 16, 255).unwrap();
    let p = psnr(&zeros, &full).unwrap().value;
    ensure(p == 0.0, format!("PSNR(0, 255) = {p}"))?;
    let img = textured(64, 64, 10);
    let s = ssim(&img, &img).unwrap().value;
    ensure((s - 1.0).abs() <= 1e-12, format!("SSIM(self) = {s}"))?;
    Ok("50 pairs symmetric and zero-self; PSNR 0 dB; SSIM(self) = 1".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("analytic entropy fixtures", analytic_fixtures),
        ("histogram degeneracy", histogram_degeneracy),
        ("quantization sensitivity", quantization_sensitivity),
        ("benchmark speedup", benchmark_shape),
        ("correlation oracles", correlation_oracles),
        ("monotone degradation", monotone_degradation),
        ("end-to-end eval", end_to_end_eval),
        ("metric sanity", metric_sanity),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| (*s).to_owned()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
