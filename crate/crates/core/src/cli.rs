//! Command-line front end.
//!
//! Exit codes: 0 success, 2 bad arguments, 3 I/O or decode failure,
//! 4 dimension mismatch or window larger than the image, 5 nothing
//! scorable, 6 engines disagree.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::bench::{self, BenchResult};
use crate::entropy::{GrayMode, WindowSpec};
use crate::error::Error;
use crate::eval::{
    self, CorrelationReport, ScoreOptions, ScoredRow, StrideChoice, SweepGrid, SweepReport,
};
use crate::io::{load_gray, save_gray};
use crate::metrics::{self, format_score, Engine, MetricScore};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_DIMENSION: i32 = 4;
pub const EXIT_NOTHING_SCORED: i32 = 5;
pub const EXIT_CORRECTNESS: i32 = 6;

const UNDEFINED: &str = "undefined";

#[derive(Debug, Parser)]
#[command(
    name = "rdie",
    version,
    about = "Regional differential information entropy image quality tool"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score a test image against a reference image.
    Score {
        test: PathBuf,
        reference: PathBuf,
        /// Comma-separated subset of rdie, mse, psnr, ssim.
        #[arg(long, value_delimiter = ',', default_value = "rdie")]
        metrics: Vec<String>,
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Render an image's entropy map as a PNG (one pixel per region).
    Map {
        image: PathBuf,
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Score a manifest and correlate every metric with MOS.
    Eval {
        manifest: PathBuf,
        /// Built-in metric names or extra manifest columns.
        #[arg(long, value_delimiter = ',', default_value = "rdie,mse,psnr,ssim")]
        metrics: Vec<String>,
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// RDIE-vs-MOS SRCC over a grid of window sizes, levels and strides.
    Sweep {
        manifest: PathBuf,
        /// Window sizes, e.g. `2..16` or `4,5`.
        #[arg(long, value_parser = parse_list_arg)]
        windows: Option<List>,
        /// Quantization levels, e.g. `32` or `2..8,16`.
        #[arg(long, value_parser = parse_list_arg, conflicts_with = "full_levels")]
        levels: Option<List>,
        /// Sweep every level from 2 to 80.
        #[arg(long)]
        full_levels: bool,
        /// `window` or a list such as `1..5`.
        #[arg(long, value_parser = parse_strides, default_value = "window")]
        strides: StrideChoice,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Time the naive and fast engines on a synthetic image.
    Bench {
        /// Image size as WIDTHxHEIGHT.
        #[arg(long, value_parser = parse_size, default_value = "2040x1356")]
        size: (usize, usize),
        #[arg(long, default_value_t = 7)]
        reps: usize,
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args)]
struct SpecArgs {
    /// Square window side [default: 5, or 4 for bench].
    #[arg(long)]
    window: Option<usize>,
    /// Quantization levels [default: 32, or 8 for bench].
    #[arg(long)]
    levels: Option<usize>,
    /// Stride in pixels, or `window` to match the window side.
    #[arg(long, value_parser = parse_stride, default_value = "window")]
    stride: StrideArg,
}

impl SpecArgs {
    fn resolve(&self, default_window: usize, default_levels: usize) -> Result<WindowSpec, Error> {
        let window = self.window.unwrap_or(default_window);
        let stride = match self.stride {
            StrideArg::Window => window,
            StrideArg::Fixed(s) => s,
        };
        WindowSpec::new(
            window,
            window,
            stride,
            self.levels.unwrap_or(default_levels),
        )
    }
}

#[derive(Debug, Clone, Copy)]
enum StrideArg {
    Window,
    Fixed(usize),
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long, value_enum, default_value_t = EngineArg::Fast)]
    engine: EngineArg,
    #[arg(long, value_enum, default_value_t = GrayArg::Luma)]
    gray: GrayArg,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; stdout when absent. For `map` this is the PNG path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EngineArg {
    Naive,
    Fast,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GrayArg {
    Luma,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

impl CommonArgs {
    fn engine(&self) -> Engine {
        match self.engine {
            EngineArg::Naive => Engine::Naive,
            EngineArg::Fast => Engine::Fast,
        }
    }

    fn gray(&self) -> GrayMode {
        match self.gray {
            GrayArg::Luma => GrayMode::Luma,
            GrayArg::Mean => GrayMode::ChannelMean,
        }
    }
}

fn parse_stride(s: &str) -> Result<StrideArg, String> {
    if s == "window" {
        return Ok(StrideArg::Window);
    }
    s.parse()
        .map(StrideArg::Fixed)
        .map_err(|_| format!("expected `window` or an integer, got `{s}`"))
}

/// Parses `4`, `2..16`, `2..=16` and comma-separated mixes; ranges are inclusive.
pub fn parse_list(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        let num = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad number `{t}` in `{s}`"))
        };
        if let Some((lo, hi)) = item.split_once("..") {
            let (lo, hi) = (num(lo)?, num(hi.trim_start_matches('='))?);
            if lo > hi {
                return Err(format!("empty range `{item}`"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(num(item)?);
        }
    }
    Ok(out)
}

/// Parsed list kept as one clap value.
#[derive(Debug, Clone)]
struct List(Vec<usize>);

fn parse_list_arg(s: &str) -> Result<List, String> {
    parse_list(s).map(List)
}

fn parse_strides(s: &str) -> Result<StrideChoice, String> {
    if s == "window" {
        Ok(StrideChoice::MatchWindow)
    } else {
        parse_list(s).map(StrideChoice::List)
    }
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("expected WIDTHxHEIGHT, got `{s}`");
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let (w, h) = (w.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?);
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok((w, h))
}

/// Process exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. }
        | Error::Decode { .. }
        | Error::UnsupportedFormat { .. }
        | Error::Manifest { .. }
        | Error::Output(_) => EXIT_IO,
        Error::DimensionMismatch { .. }
        | Error::ImageSmallerThanWindow { .. }
        | Error::OutOfBounds { .. } => EXIT_DIMENSION,
        Error::Correctness(_) => EXIT_CORRECTNESS,
        Error::InvalidImage(_)
        | Error::InvalidSpec(_)
        | Error::Domain(_)
        | Error::LengthMismatch(..)
        | Error::UndefinedCorrelation(_)
        | Error::Precondition(_)
        | Error::UnknownMetric(_) => EXIT_USAGE,
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Score {
            test,
            reference,
            metrics,
            spec,
            common,
        } => cmd_score(&test, &reference, &metrics, &spec, &common, stdout),
        Command::Map {
            image,
            spec,
            common,
        } => cmd_map(&image, &spec, &common, stdout),
        Command::Eval {
            manifest,
            metrics,
            spec,
            common,
        } => cmd_eval(&manifest, &metrics, &spec, &common, stdout, stderr),
        Command::Sweep {
            manifest,
            windows,
            levels,
            full_levels,
            strides,
            common,
        } => {
            let levels = if full_levels {
                eval::FULL_SWEEP_LEVELS.collect()
            } else {
                levels.map_or_else(|| eval::DEFAULT_SWEEP_LEVELS.to_vec(), |l| l.0)
            };
            let grid = SweepGrid {
                windows: windows.map_or_else(|| eval::DEFAULT_SWEEP_WINDOWS.collect(), |w| w.0),
                levels,
                strides,
            };
            cmd_sweep(&manifest, &grid, &common, stdout, stderr)
        }
        Command::Bench {
            size,
            reps,
            spec,
            common,
        } => cmd_bench(size, reps, &spec, &common, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn emit(bytes: &[u8], out: Option<&Path>, stdout: &mut dyn Write) -> CmdResult {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?,
        None => stdout
            .write_all(bytes)
            .map_err(|e| Error::Output(format!("stdout: {e}")))?,
    }
    Ok(())
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report types always serialize");
    bytes.push(b'\n');
    bytes
}

fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

fn opt_cell(v: Option<f64>) -> String {
    v.map_or_else(|| UNDEFINED.to_owned(), format_score)
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| (*s).to_owned()).collect()
}

fn check_metrics(names: &[String], allow_external: bool) -> Result<(), Error> {
    if names.is_empty() {
        return Err(Error::Precondition("no metrics requested".into()));
    }
    for name in names {
        if name.is_empty()
            || (!allow_external && !metrics::BUILTIN_METRICS.contains(&name.as_str()))
        {
            return Err(Error::UnknownMetric(name.clone()));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ScoreRecord<'a> {
    test: &'a Path,
    reference: &'a Path,
    spec: WindowSpec,
    engine: Engine,
    gray: GrayMode,
    scores: Vec<MetricScore>,
}

fn cmd_score(
    test: &Path,
    reference: &Path,
    names: &[String],
    spec: &SpecArgs,
    common: &CommonArgs,
    stdout: &mut dyn Write,
) -> CmdResult {
    check_metrics(names, false)?;
    let spec = spec.resolve(5, 32)?;
    let a = load_gray(test, common.gray())?;
    let b = load_gray(reference, common.gray())?;
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(Failure {
            code: EXIT_DIMENSION,
            message: format!(
                "dimension mismatch: {} is {}x{} but {} is {}x{}",
                test.display(),
                a.width(),
                a.height(),
                reference.display(),
                b.width(),
                b.height()
            ),
        });
    }
    let scores = names
        .iter()
        .map(|m| metrics::score_by_name(m, &a, &b, &spec, common.engine()))
        .collect::<Result<Vec<_>, _>>()?;
    let record = ScoreRecord {
        test,
        reference,
        spec,
        engine: common.engine(),
        gray: common.gray(),
        scores,
    };
    let bytes = match common.format {
        Format::Json => json_bytes(&record),
        Format::Csv => csv_bytes(
            &strings(&["metric_name", "value", "higher_is_better"]),
            record.scores.iter().map(|s| {
                vec![
                    s.metric_name.clone(),
                    format_score(s.value),
                    s.higher_is_better.to_string(),
                ]
            }),
        ),
        Format::Text => record
            .scores
            .iter()
            .map(|s| {
                let dir = if s.higher_is_better {
                    "higher is better"
                } else {
                    "lower is better"
                };
                format!("{:<5} {} ({dir})\n", s.metric_name, format_score(s.value))
            })
            .collect::<String>()
            .into_bytes(),
    };
    emit(&bytes, common.out.as_deref(), stdout)
}

#[derive(Serialize)]
struct MapRecord<'a> {
    image: &'a Path,
    output: &'a Path,
    spec: WindowSpec,
    rows: usize,
    cols: usize,
    max_entropy: f64,
}

fn cmd_map(
    image: &Path,
    spec: &SpecArgs,
    common: &CommonArgs,
    stdout: &mut dyn Write,
) -> CmdResult {
    let spec = spec.resolve(5, 32)?;
    let out = common.out.as_deref().ok_or_else(|| Failure {
        code: EXIT_USAGE,
        message: "map needs --out PATH for the PNG".into(),
    })?;
    let img = load_gray(image, common.gray())?;
    let map = common
        .engine()
        .entropy_map(&img, &spec)
        .map_err(|e| Failure {
            code: exit_code(&e),
            message: format!("{}: {e}", image.display()),
        })?;
    save_gray(&metrics::map_to_image(&map), out)?;
    let record = MapRecord {
        image,
        output: out,
        spec,
        rows: map.rows(),
        cols: map.cols(),
        max_entropy: spec.max_entropy(),
    };
    let bytes = match common.format {
        Format::Json => json_bytes(&record),
        Format::Csv => csv_bytes(
            &strings(&["image", "output", "spec", "rows", "cols", "max_entropy"]),
            [vec![
                image.display().to_string(),
                out.display().to_string(),
                spec.to_string(),
                map.rows().to_string(),
                map.cols().to_string(),
                format_score(record.max_entropy),
            ]],
        ),
        Format::Text => format!(
            "wrote {}x{} entropy map of {} to {}\n",
            map.cols(),
            map.rows(),
            image.display(),
            out.display()
        )
        .into_bytes(),
    };
    stdout
        .write_all(&bytes)
        .map_err(|e| Error::Output(format!("stdout: {e}")))?;
    Ok(())
}

/// A scored row with scores keyed by metric name, in request order.
struct RowView<'a> {
    metrics: &'a [String],
    row: &'a ScoredRow,
}

impl Serialize for RowView<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Scores<'a>(#[serde(serialize_with = "serialize_named")] (&'a [String], &'a [f64]));
        let mut m = s.serialize_map(Some(7))?;
        m.serialize_entry("index", &self.row.index)?;
        m.serialize_entry("test_path", &self.row.test_path)?;
        m.serialize_entry("ref_path", &self.row.ref_path)?;
        m.serialize_entry("method", &self.row.method)?;
        m.serialize_entry("category", &self.row.category)?;
        m.serialize_entry("mos", &self.row.mos)?;
        m.serialize_entry("scores", &Scores((self.metrics, &self.row.scores)))?;
        m.end()
    }
}

fn serialize_named<S: Serializer>(pair: &(&[String], &[f64]), s: S) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Score(#[serde(serialize_with = "metrics::serialize_score")] f64);
    let mut m = s.serialize_map(Some(pair.0.len()))?;
    for (name, &v) in pair.0.iter().zip(pair.1) {
        m.serialize_entry(name, &Score(v))?;
    }
    m.end()
}

#[derive(Serialize)]
struct EvalRecord<'a> {
    manifest: &'a Path,
    spec: WindowSpec,
    engine: Engine,
    gray: GrayMode,
    metrics: &'a [String],
    scores: Vec<RowView<'a>>,
    failures: &'a [eval::RowFailure],
    reports: &'a [CorrelationReport],
}

fn scores_csv(metrics: &[String], rows: &[ScoredRow]) -> Vec<u8> {
    let mut header = strings(&[
        "index",
        "test_path",
        "ref_path",
        "method",
        "category",
        "mos",
    ]);
    header.extend(metrics.iter().cloned());
    csv_bytes(
        &header,
        rows.iter().map(|r| {
            let mut cells = vec![
                r.index.to_string(),
                r.test_path.display().to_string(),
                r.ref_path.display().to_string(),
                r.method.clone(),
                r.category.clone(),
                format_score(r.mos),
            ];
            cells.extend(r.scores.iter().map(|&v| format_score(v)));
            cells
        }),
    )
}

fn failures_csv(failures: &[eval::RowFailure]) -> Vec<u8> {
    csv_bytes(
        &strings(&["index", "test_path", "ref_path", "message"]),
        failures.iter().map(|f| {
            vec![
                f.index.to_string(),
                f.test_path.display().to_string(),
                f.ref_path.display().to_string(),
                f.message.clone(),
            ]
        }),
    )
}

fn reports_csv(reports: &[CorrelationReport]) -> Vec<u8> {
    csv_bytes(
        &strings(&[
            "metric_name",
            "group_kind",
            "group_key",
            "n",
            "srcc",
            "plcc",
            "mean_score",
        ]),
        reports.iter().map(|r| {
            vec![
                r.metric_name.clone(),
                r.group_kind.as_str().to_owned(),
                r.group_key.clone(),
                r.n.to_string(),
                opt_cell(r.srcc),
                opt_cell(r.plcc),
                format_score(r.mean_score),
            ]
        }),
    )
}

fn reports_text(reports: &[CorrelationReport]) -> String {
    let mut out = format!(
        "{:<16} {:<9} {:<20} {:>5} {:>10} {:>10} {:>14}\n",
        "metric", "group", "key", "n", "srcc", "plcc", "mean"
    );
    let cell = |v: Option<f64>| v.map_or_else(|| UNDEFINED.to_owned(), |v| format!("{v:.4}"));
    for r in reports {
        out.push_str(&format!(
            "{:<16} {:<9} {:<20} {:>5} {:>10} {:>10} {:>14.4}\n",
            r.metric_name,
            r.group_kind.as_str(),
            r.group_key,
            r.n,
            cell(r.srcc),
            cell(r.plcc),
            r.mean_score
        ));
    }
    out
}

/// `reports.csv` -> `reports.<suffix>.csv`.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map_or_else(|| "report".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.{suffix}.csv"))
}

fn report_failures(failures: &[eval::RowFailure], stderr: &mut dyn Write) {
    for f in failures {
        let _ = writeln!(
            stderr,
            "warning: row {} ({}) failed: {}",
            f.index,
            f.test_path.display(),
            f.message
        );
    }
}

fn cmd_eval(
    manifest: &Path,
    names: &[String],
    spec: &SpecArgs,
    common: &CommonArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CmdResult {
    check_metrics(names, true)?;
    let opts = ScoreOptions {
        spec: spec.resolve(5, 32)?,
        engine: common.engine(),
        gray: common.gray(),
    };
    let entries = eval::load_manifest(manifest)?;
    let table = eval::score_dataset(&entries, names, &opts);
    report_failures(&table.failures, stderr);
    if table.rows.is_empty() {
        return Err(Failure {
            code: EXIT_NOTHING_SCORED,
            message: format!("{}: no rows could be scored", manifest.display()),
        });
    }
    let reports = eval::aggregate(&table)?;
    let out = common.out.as_deref();
    match common.format {
        Format::Json => {
            let record = EvalRecord {
                manifest,
                spec: opts.spec,
                engine: opts.engine,
                gray: opts.gray,
                metrics: names,
                scores: table
                    .rows
                    .iter()
                    .map(|row| RowView {
                        metrics: names,
                        row,
                    })
                    .collect(),
                failures: &table.failures,
                reports: &reports,
            };
            emit(&json_bytes(&record), out, stdout)
        }
        Format::Csv => {
            if let Some(path) = out {
                let scores = sibling(path, "scores");
                std::fs::write(&scores, scores_csv(names, &table.rows))
                    .map_err(|e| Error::io(&scores, e))?;
                let failures = sibling(path, "failures");
                std::fs::write(&failures, failures_csv(&table.failures))
                    .map_err(|e| Error::io(&failures, e))?;
            }
            emit(&reports_csv(&reports), out, stdout)
        }
        Format::Text => {
            let mut text = reports_text(&reports);
            text.push_str(&format!(
                "{} scored, {} failed\n",
                table.rows.len(),
                table.failures.len()
            ));
            emit(text.as_bytes(), out, stdout)
        }
    }
}

fn sweep_csv(report: &SweepReport) -> Vec<u8> {
    let mut header = strings(&["window", "stride", "levels", "n", "srcc_all"]);
    header.extend(report.categories.iter().map(|c| format!("srcc_{c}")));
    csv_bytes(
        &header,
        report.points.iter().map(|p| {
            let mut cells = vec![
                p.spec.win_w().to_string(),
                p.spec.stride().to_string(),
                p.spec.levels().to_string(),
                p.n.to_string(),
                opt_cell(p.srcc_all),
            ];
            cells.extend(
                report
                    .categories
                    .iter()
                    .map(|c| opt_cell(p.srcc_by_category[c])),
            );
            cells
        }),
    )
}

fn sweep_text(report: &SweepReport) -> String {
    let mut out = format!(
        "{:>6} {:>6} {:>6} {:>5} {:>10}",
        "window", "stride", "levels", "n", "all"
    );
    for c in &report.categories {
        out.push_str(&format!(" {c:>10}"));
    }
    out.push('\n');
    let cell = |v: Option<f64>| v.map_or_else(|| UNDEFINED.to_owned(), |v| format!("{v:.4}"));
    for p in &report.points {
        out.push_str(&format!(
            "{:>6} {:>6} {:>6} {:>5} {:>10}",
            p.spec.win_w(),
            p.spec.stride(),
            p.spec.levels(),
            p.n,
            cell(p.srcc_all)
        ));
        for c in &report.categories {
            out.push_str(&format!(" {:>10}", cell(p.srcc_by_category[c])));
        }
        out.push('\n');
    }
    out
}

fn cmd_sweep(
    manifest: &Path,
    grid: &SweepGrid,
    common: &CommonArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CmdResult {
    grid.specs()?;
    let entries = eval::load_manifest(manifest)?;
    let report = eval::grid_sweep(&entries, grid, common.engine(), common.gray())?;
    report_failures(&report.failures, stderr);
    if report.points.iter().all(|p| p.n == 0) {
        return Err(Failure {
            code: EXIT_NOTHING_SCORED,
            message: format!(
                "{}: no rows could be scored at any spec",
                manifest.display()
            ),
        });
    }
    let bytes = match common.format {
        Format::Json => json_bytes(&report),
        Format::Csv => sweep_csv(&report),
        Format::Text => sweep_text(&report).into_bytes(),
    };
    emit(&bytes, common.out.as_deref(), stdout)
}

fn cmd_bench(
    (width, height): (usize, usize),
    reps: usize,
    spec: &SpecArgs,
    common: &CommonArgs,
    stdout: &mut dyn Write,
) -> CmdResult {
    if reps < bench::MIN_REPETITIONS {
        return Err(Failure {
            code: EXIT_USAGE,
            message: format!(
                "--reps must be at least {}, got {reps}",
                bench::MIN_REPETITIONS
            ),
        });
    }
    let spec = spec.resolve(4, 8)?;
    let img = bench::synthetic_image(width, height, bench::BENCH_SEED)?;
    let results: Vec<BenchResult> = bench::run_bench(&img, &spec, reps)?;
    let bytes = match common.format {
        Format::Json => json_bytes(&results),
        Format::Csv => csv_bytes(
            &strings(&[
                "op_name",
                "width",
                "height",
                "spec",
                "repetitions",
                "median_ms",
                "speedup_vs_naive",
            ]),
            results.iter().map(|r| {
                vec![
                    r.op_name.as_str().to_owned(),
                    r.width.to_string(),
                    r.height.to_string(),
                    r.spec.to_string(),
                    r.repetitions.to_string(),
                    format_score(r.median_ms),
                    format_score(r.speedup_vs_naive),
                ]
            }),
        ),
        Format::Text => bench::render_text(&results).into_bytes(),
    };
    emit(&bytes, common.out.as_deref(), stdout)
}
