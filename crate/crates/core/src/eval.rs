//! Dataset scoring and metric-vs-MOS correlation.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::{GrayImage, GrayMode, WindowSpec};
use crate::error::{Error, Result, RowError};
use crate::io::load_gray;
use crate::metrics::{self, higher_is_better, serialize_score, Engine, BUILTIN_METRICS};

const REQUIRED_COLUMNS: [&str; 5] = ["test_path", "ref_path", "method", "category", "mos"];

/// Window sizes swept when none are given.
pub const DEFAULT_SWEEP_WINDOWS: std::ops::RangeInclusive<usize> = 2..=16;
/// Quantization levels swept when none are given.
pub const DEFAULT_SWEEP_LEVELS: [usize; 9] = [2, 4, 8, 16, 24, 32, 48, 64, 80];
/// Levels swept by the exhaustive option.
pub const FULL_SWEEP_LEVELS: std::ops::RangeInclusive<usize> = 2..=80;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub test_path: PathBuf,
    pub ref_path: PathBuf,
    pub method: String,
    pub category: String,
    pub mos: f64,
    /// Pre-computed scores from columns past the required five.
    pub extra_metrics: BTreeMap<String, f64>,
}

/// Reads a manifest CSV; relative paths resolve against its directory.
pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    parse_manifest(file, base).map_err(|errors| Error::Manifest {
        path: path.to_owned(),
        errors,
    })
}

/// Parses manifest CSV from any reader, collecting every bad row.
pub fn parse_manifest(
    reader: impl std::io::Read,
    base: &Path,
) -> std::result::Result<Vec<ManifestEntry>, Vec<RowError>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header_error = |message: String| vec![RowError { row: 1, message }];
    let headers = rdr
        .headers()
        .map_err(|e| header_error(e.to_string()))?
        .clone();
    let mut index = BTreeMap::new();
    for (i, name) in headers.iter().enumerate() {
        if index.insert(name.to_owned(), i).is_some() {
            return Err(header_error(format!("duplicate column `{name}`")));
        }
    }
    let missing: Vec<_> = REQUIRED_COLUMNS
        .iter()
        .filter(|c| !index.contains_key(**c))
        .copied()
        .collect();
    if !missing.is_empty() {
        return Err(header_error(format!(
            "missing required column(s): {}",
            missing.join(", ")
        )));
    }
    let col = |name: &str| index[name];
    let extras: Vec<(usize, &str)> = headers
        .iter()
        .enumerate()
        .filter(|(_, name)| !REQUIRED_COLUMNS.contains(name))
        .collect();

    let mut entries = Vec::new();
    let mut errors = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let fallback_row = i + 2;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let row = e.position().map_or(fallback_row, |p| p.line() as usize);
                errors.push(RowError {
                    row,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let row = record
            .position()
            .map_or(fallback_row, |p| p.line() as usize);
        let mut problems = Vec::new();
        let field = |name: &str| record.get(col(name)).unwrap_or("");
        for name in ["test_path", "ref_path", "method", "category"] {
            if field(name).is_empty() {
                problems.push(format!("empty `{name}`"));
            }
        }
        let mos = match field("mos").parse::<f64>() {
            Ok(v) if v.is_finite() => v,
            _ => {
                problems.push(format!(
                    "`mos` value {:?} is not a finite number",
                    field("mos")
                ));
                f64::NAN
            }
        };
        let mut extra_metrics = BTreeMap::new();
        for &(c, name) in &extras {
            let raw = record.get(c).unwrap_or("");
            if raw.is_empty() {
                continue;
            }
            match raw.parse::<f64>() {
                Ok(v) if !v.is_nan() => {
                    extra_metrics.insert(name.to_owned(), v);
                }
                _ => problems.push(format!("`{name}` value {raw:?} is not a number")),
            }
        }
        if problems.is_empty() {
            entries.push(ManifestEntry {
                test_path: base.join(field("test_path")),
                ref_path: base.join(field("ref_path")),
                method: field("method").to_owned(),
                category: field("category").to_owned(),
                mos,
                extra_metrics,
            });
        } else {
            errors.push(RowError {
                row,
                message: problems.join("; "),
            });
        }
    }
    if errors.is_empty() {
        Ok(entries)
    } else {
        Err(errors)
    }
}

fn ensure_pair(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two samples"));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::UndefinedCorrelation("NaN in input"));
    }
    Ok(())
}

fn pearson_unchecked(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::UndefinedCorrelation("non-finite value"));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance"));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn srcc(a: &[f64], b: &[f64]) -> Result<f64> {
    ensure_pair(a, b)?;
    let (ra, rb) = (fractional_ranks(a), fractional_ranks(b));
    // doubled ranks are integers, so the moment sums are exact
    let n = ra.len() as i128;
    let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0i128, 0i128, 0i128, 0i128, 0i128);
    for (&x, &y) in ra.iter().zip(&rb) {
        let (x, y) = ((2.0 * x) as i128, (2.0 * y) as i128);
        sa += x;
        sb += y;
        saa += x * x;
        sbb += y * y;
        sab += x * y;
    }
    let cov = n * sab - sa * sb;
    let (va, vb) = (n * saa - sa * sa, n * sbb - sb * sb);
    if va == 0 || vb == 0 {
        return Err(Error::UndefinedCorrelation("zero variance"));
    }
    if let Some(prod) = va.checked_mul(vb) {
        if cov.checked_mul(cov) == Some(prod) {
            return Ok(cov.signum() as f64);
        }
    }
    Ok((cov as f64 / ((va as f64).sqrt() * (vb as f64).sqrt())).clamp(-1.0, 1.0))
}

/// Pearson linear correlation.
pub fn plcc(a: &[f64], b: &[f64]) -> Result<f64> {
    ensure_pair(a, b)?;
    pearson_unchecked(a, b)
}

/// Scoring inputs shared by every row.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScoreOptions {
    pub spec: WindowSpec,
    pub engine: Engine,
    pub gray: GrayMode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredRow {
    /// Position in the input entry list.
    pub index: usize,
    pub test_path: PathBuf,
    pub ref_path: PathBuf,
    pub method: String,
    pub category: String,
    pub mos: f64,
    /// Same order as [`ScoredTable::metrics`].
    #[serde(serialize_with = "serialize_scores")]
    pub scores: Vec<f64>,
}

fn serialize_scores<S: serde::Serializer>(scores: &[f64], s: S) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Score(#[serde(serialize_with = "serialize_score")] f64);
    s.collect_seq(scores.iter().map(|&v| Score(v)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowFailure {
    pub index: usize,
    pub test_path: PathBuf,
    pub ref_path: PathBuf,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredTable {
    pub metrics: Vec<String>,
    pub rows: Vec<ScoredRow>,
    pub failures: Vec<RowFailure>,
}

fn load_pair(entry: &ManifestEntry, gray: GrayMode) -> Result<(GrayImage, GrayImage)> {
    Ok((
        load_gray(&entry.test_path, gray)?,
        load_gray(&entry.ref_path, gray)?,
    ))
}

fn score_entry(entry: &ManifestEntry, metrics: &[String], opts: &ScoreOptions) -> Result<Vec<f64>> {
    let needs_images = metrics
        .iter()
        .any(|m| BUILTIN_METRICS.contains(&m.as_str()));
    let pair = if needs_images {
        Some(load_pair(entry, opts.gray)?)
    } else {
        None
    };
    metrics
        .iter()
        .map(|m| match &pair {
            Some((test, reference)) if BUILTIN_METRICS.contains(&m.as_str()) => {
                Ok(metrics::score_by_name(m, test, reference, &opts.spec, opts.engine)?.value)
            }
            _ => entry
                .extra_metrics
                .get(m)
                .copied()
                .ok_or_else(|| Error::UnknownMetric(format!("{m} (no value in this row)"))),
        })
        .collect()
}

/// Scores every entry; failing rows are collected instead of aborting.
pub fn score_dataset(
    entries: &[ManifestEntry],
    metrics: &[String],
    opts: &ScoreOptions,
) -> ScoredTable {
    let results: Vec<_> = entries
        .par_iter()
        .map(|entry| score_entry(entry, metrics, opts))
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (index, (entry, result)) in entries.iter().zip(results).enumerate() {
        match result {
            Ok(scores) => rows.push(ScoredRow {
                index,
                test_path: entry.test_path.clone(),
                ref_path: entry.ref_path.clone(),
                method: entry.method.clone(),
                category: entry.category.clone(),
                mos: entry.mos,
                scores,
            }),
            Err(e) => failures.push(RowFailure {
                index,
                test_path: entry.test_path.clone(),
                ref_path: entry.ref_path.clone(),
                message: e.to_string(),
            }),
        }
    }
    ScoredTable {
        metrics: metrics.to_vec(),
        rows,
        failures,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    All,
    Category,
    Method,
}

impl GroupKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupKind::All => "all",
            GroupKind::Category => "category",
            GroupKind::Method => "method",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub metric_name: String,
    pub group_kind: GroupKind,
    pub group_key: String,
    pub n: usize,
    /// `None` when undefined (fewer than two rows or a constant vector).
    pub srcc: Option<f64>,
    pub plcc: Option<f64>,
    #[serde(serialize_with = "serialize_score")]
    pub mean_score: f64,
}

/// Scores oriented so that larger always means better.
fn oriented(metric: &str, scores: &[f64]) -> Vec<f64> {
    if higher_is_better(metric) {
        scores.to_vec()
    } else {
        scores.iter().map(|v| -v).collect()
    }
}

fn correlate(metric: &str, scores: &[f64], mos: &[f64]) -> (Option<f64>, Option<f64>) {
    let scores = oriented(metric, scores);
    (srcc(&scores, mos).ok(), plcc(&scores, mos).ok())
}

/// Row indices of `rows` keyed by group, in a fixed order: all, then
/// categories, then methods, each sorted by name.
fn groups(rows: &[ScoredRow]) -> Vec<(GroupKind, String, Vec<usize>)> {
    let mut out = vec![(GroupKind::All, "all".to_owned(), (0..rows.len()).collect())];
    for (kind, key) in [
        (
            GroupKind::Category,
            (|r: &ScoredRow| r.category.clone()) as fn(&ScoredRow) -> String,
        ),
        (GroupKind::Method, |r: &ScoredRow| r.method.clone()),
    ] {
        let mut by_key: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, r) in rows.iter().enumerate() {
            by_key.entry(key(r)).or_default().push(i);
        }
        out.extend(by_key.into_iter().map(|(k, idx)| (kind, k, idx)));
    }
    out
}

/// Per-metric, per-group correlation against MOS plus mean score.
pub fn aggregate(table: &ScoredTable) -> Result<Vec<CorrelationReport>> {
    if table.rows.is_empty() {
        return Err(Error::Precondition("no scored rows to aggregate".into()));
    }
    let groups = groups(&table.rows);
    let mut reports = Vec::new();
    for (m, metric) in table.metrics.iter().enumerate() {
        for (kind, key, idx) in &groups {
            let scores: Vec<f64> = idx.iter().map(|&i| table.rows[i].scores[m]).collect();
            let mos: Vec<f64> = idx.iter().map(|&i| table.rows[i].mos).collect();
            let (srcc, plcc) = correlate(metric, &scores, &mos);
            reports.push(CorrelationReport {
                metric_name: metric.clone(),
                group_kind: *kind,
                group_key: key.clone(),
                n: idx.len(),
                srcc,
                plcc,
                mean_score: scores.iter().sum::<f64>() / scores.len() as f64,
            });
        }
    }
    Ok(reports)
}

/// How strides are chosen in a sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrideChoice {
    /// Stride equal to the window size.
    MatchWindow,
    List(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepGrid {
    pub windows: Vec<usize>,
    pub levels: Vec<usize>,
    pub strides: StrideChoice,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            windows: DEFAULT_SWEEP_WINDOWS.collect(),
            levels: DEFAULT_SWEEP_LEVELS.to_vec(),
            strides: StrideChoice::MatchWindow,
        }
    }
}

impl SweepGrid {
    /// Square-window specs in window, level, stride order.
    pub fn specs(&self) -> Result<Vec<WindowSpec>> {
        if self.windows.is_empty() || self.levels.is_empty() {
            return Err(Error::Precondition("sweep ranges must be non-empty".into()));
        }
        if matches!(&self.strides, StrideChoice::List(s) if s.is_empty()) {
            return Err(Error::Precondition("sweep ranges must be non-empty".into()));
        }
        let mut specs = Vec::new();
        for &w in &self.windows {
            for &l in &self.levels {
                match &self.strides {
                    StrideChoice::MatchWindow => specs.push(WindowSpec::new(w, w, w, l)?),
                    StrideChoice::List(strides) => {
                        for &s in strides {
                            specs.push(WindowSpec::new(w, w, s, l)?);
                        }
                    }
                }
            }
        }
        Ok(specs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub spec: WindowSpec,
    /// Rows scored at this spec.
    pub n: usize,
    pub srcc_all: Option<f64>,
    pub srcc_by_category: BTreeMap<String, Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub categories: Vec<String>,
    pub points: Vec<SweepPoint>,
    /// Rows that could not be loaded or scored at some spec.
    pub failures: Vec<RowFailure>,
}

/// RDIE-vs-MOS SRCC for every spec of `grid`. Images are decoded once.
pub fn grid_sweep(
    entries: &[ManifestEntry],
    grid: &SweepGrid,
    engine: Engine,
    gray: GrayMode,
) -> Result<SweepReport> {
    let specs = grid.specs()?;
    let loaded: Vec<_> = entries.par_iter().map(|e| load_pair(e, gray)).collect();
    let mut failures = Vec::new();
    let mut pairs = Vec::new();
    for (index, (entry, result)) in entries.iter().zip(loaded).enumerate() {
        match result {
            Ok(pair) => pairs.push((index, entry, pair)),
            Err(e) => failures.push(RowFailure {
                index,
                test_path: entry.test_path.clone(),
                ref_path: entry.ref_path.clone(),
                message: e.to_string(),
            }),
        }
    }
    let categories: Vec<String> = entries
        .iter()
        .map(|e| e.category.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let cells: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|s| (0..pairs.len()).map(move |p| (s, p)))
        .collect();
    let scores: Vec<Result<f64>> = cells
        .par_iter()
        .map(|&(s, p)| {
            let (_, _, (test, reference)) = &pairs[p];
            metrics::rdie_score(test, reference, &specs[s], engine).map(|m| m.value)
        })
        .collect();

    let mut points = Vec::with_capacity(specs.len());
    let mut failed_at_some_spec = BTreeMap::new();
    for (s, spec) in specs.iter().enumerate() {
        let mut rows = Vec::new();
        for (p, (index, entry, _)) in pairs.iter().enumerate() {
            match &scores[s * pairs.len() + p] {
                Ok(v) => rows.push(ScoredRow {
                    index: *index,
                    test_path: entry.test_path.clone(),
                    ref_path: entry.ref_path.clone(),
                    method: entry.method.clone(),
                    category: entry.category.clone(),
                    mos: entry.mos,
                    scores: vec![*v],
                }),
                Err(e) => {
                    failed_at_some_spec
                        .entry(*index)
                        .or_insert_with(|| format!("at {spec}: {e}"));
                }
            }
        }
        let table = ScoredTable {
            metrics: vec![metrics::RDIE.to_owned()],
            rows,
            failures: Vec::new(),
        };
        let mut srcc_by_category: BTreeMap<String, Option<f64>> =
            categories.iter().map(|c| (c.clone(), None)).collect();
        let mut srcc_all = None;
        if !table.rows.is_empty() {
            for report in aggregate(&table)? {
                match report.group_kind {
                    GroupKind::All => srcc_all = report.srcc,
                    GroupKind::Category => {
                        srcc_by_category.insert(report.group_key, report.srcc);
                    }
                    GroupKind::Method => {}
                }
            }
        }
        points.push(SweepPoint {
            spec: *spec,
            n: table.rows.len(),
            srcc_all,
            srcc_by_category,
        });
    }
    for (index, message) in failed_at_some_spec {
        let entry = &entries[index];
        failures.push(RowFailure {
            index,
            test_path: entry.test_path.clone(),
            ref_path: entry.ref_path.clone(),
            message,
        });
    }
    failures.sort_by_key(|f| f.index);
    Ok(SweepReport {
        categories,
        points,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> std::result::Result<Vec<ManifestEntry>, Vec<RowError>> {
        parse_manifest(text.as_bytes(), Path::new("data"))
    }

    #[test]
    fn manifest_valid_rows() {
        let entries = parse(
            "test_path,ref_path,method,category,mos\n\
             a.png,r.png,edsr,sr,3.5\n\
             b.png,r.png,srgan,gan,4\n\
             c.png,r.png,bicubic,trad,1.25\n",
        )
        .unwrap();
        assert_eq!(entries.len(), 3);
        assert_eq!(entries[0].test_path, Path::new("data/a.png"));
        assert_eq!(entries[2].mos, 1.25);
        assert!(entries[1].extra_metrics.is_empty());
    }

    #[test]
    fn manifest_bad_mos_names_row() {
        let errors =
            parse("test_path,ref_path,method,category,mos\na.png,r.png,m,c,abc\n").unwrap_err();
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].row, 2);
        assert!(errors[0].message.contains("mos"));
    }

    #[test]
    fn manifest_extra_columns_pass_through() {
        let entries = parse(
            "test_path,ref_path,method,category,mos,psnr_published\na.png,r.png,m,c,1,27.5\n",
        )
        .unwrap();
        assert_eq!(entries[0].extra_metrics["psnr_published"], 27.5);
    }

    #[test]
    fn manifest_missing_column_and_multiple_errors() {
        let errors = parse("test_path,ref_path,method,mos\na,b,c,1\n").unwrap_err();
        assert_eq!(errors[0].row, 1);
        assert!(errors[0].message.contains("category"));

        let errors =
            parse("test_path,ref_path,method,category,mos\n,r,m,c,1\nok,r,m,c,2\nt,r,m,c,inf\n")
                .unwrap_err();
        let rows: Vec<_> = errors.iter().map(|e| e.row).collect();
        assert_eq!(rows, [2, 4]);
    }

    #[test]
    fn srcc_examples() {
        assert_eq!(
            srcc(&[1.0, 2.0, 3.0, 4.0], &[10.0, 20.0, 30.0, 40.0]).unwrap(),
            1.0
        );
        assert_eq!(
            srcc(&[1.0, 2.0, 3.0, 4.0], &[40.0, 30.0, 20.0, 10.0]).unwrap(),
            -1.0
        );
        assert_eq!(
            fractional_ranks(&[1.0, 2.0, 2.0, 4.0]),
            [1.0, 2.5, 2.5, 4.0]
        );
        assert!(matches!(
            srcc(&[1.0], &[1.0]),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(matches!(
            srcc(&[1.0, 2.0], &[1.0]),
            Err(Error::LengthMismatch(2, 1))
        ));
        assert!(matches!(
            srcc(&[1.0, 1.0], &[1.0, 2.0]),
            Err(Error::UndefinedCorrelation(_))
        ));
    }

    #[test]
    fn srcc_with_ties_matches_brute_force() {
        let (a, b) = ([1.0, 2.0, 2.0, 4.0], [1.0, 3.0, 2.0, 4.0]);
        let rank = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .map(|&x| {
                    let less = v.iter().filter(|&&y| y < x).count() as f64;
                    let same = v.iter().filter(|&&y| y == x).count() as f64;
                    less + (same + 1.0) / 2.0
                })
                .collect()
        };
        let (ra, rb) = (rank(&a), rank(&b));
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (ma, mb) = (mean(&ra), mean(&rb));
        let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
        let want = cov / (va * vb).sqrt();
        assert!((srcc(&a, &b).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn plcc_examples() {
        let a = [1.0, 4.0, 2.0, 8.0, 5.0];
        let affine: Vec<f64> = a.iter().map(|x| 2.0 * x + 3.0).collect();
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        assert!((plcc(&a, &affine).unwrap() - 1.0).abs() < 1e-15);
        assert!((plcc(&a, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert!(plcc(&a, &[3.0; 5]).is_err());
        assert!(plcc(&[1.0, f64::INFINITY], &[1.0, 2.0]).is_err());
        assert_eq!(
            srcc(&[1.0, f64::INFINITY, 3.0], &[1.0, 3.0, 2.0]).unwrap(),
            1.0
        );
    }

    fn row(index: usize, method: &str, category: &str, mos: f64, score: f64) -> ScoredRow {
        ScoredRow {
            index,
            test_path: PathBuf::new(),
            ref_path: PathBuf::new(),
            method: method.into(),
            category: category.into(),
            mos,
            scores: vec![score],
        }
    }

    fn table(metric: &str, rows: Vec<ScoredRow>) -> ScoredTable {
        ScoredTable {
            metrics: vec![metric.into()],
            rows,
            failures: vec![],
        }
    }

    #[test]
    fn aggregate_perfect_and_constant() {
        let rows: Vec<_> = (0..6)
            .map(|i| {
                row(
                    i,
                    ["a", "b"][i % 2],
                    ["x", "y", "z"][i % 3],
                    i as f64,
                    i as f64,
                )
            })
            .collect();
        let reports = aggregate(&table("ssim", rows.clone())).unwrap();
        assert_eq!(reports.len(), 1 + 3 + 2);
        for r in &reports {
            assert_eq!(r.srcc, Some(1.0), "{}", r.group_key);
            assert!((r.plcc.unwrap() - 1.0).abs() < 1e-15);
        }
        let lower: Vec<_> = rows
            .iter()
            .map(|r| ScoredRow {
                scores: vec![-r.mos],
                ..r.clone()
            })
            .collect();
        for r in aggregate(&table("rdie", lower)).unwrap() {
            assert_eq!(r.srcc, Some(1.0));
        }

        let constant: Vec<_> = rows
            .iter()
            .map(|r| ScoredRow {
                scores: vec![7.0],
                ..r.clone()
            })
            .collect();
        for r in aggregate(&table("mse", constant)).unwrap() {
            assert_eq!(r.srcc, None);
            assert_eq!(r.plcc, None);
            assert_eq!(r.mean_score, 7.0);
        }
        assert!(aggregate(&table("mse", vec![])).is_err());
    }

    #[test]
    fn aggregate_single_sample_group() {
        let rows = vec![
            row(0, "a", "solo", 1.0, 2.0),
            row(1, "a", "pair", 1.0, 1.0),
            row(2, "a", "pair", 2.0, 3.0),
        ];
        let reports = aggregate(&table("ssim", rows)).unwrap();
        let solo = reports.iter().find(|r| r.group_key == "solo").unwrap();
        assert_eq!((solo.n, solo.srcc, solo.mean_score), (1, None, 2.0));
        let pair = reports.iter().find(|r| r.group_key == "pair").unwrap();
        assert_eq!(pair.srcc, Some(1.0));
    }

    #[test]
    fn sweep_grid_shapes() {
        let grid = SweepGrid {
            windows: vec![4, 5],
            levels: vec![32],
            strides: StrideChoice::MatchWindow,
        };
        let specs = grid.specs().unwrap();
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[1], WindowSpec::default());

        let grid = SweepGrid {
            windows: vec![3],
            levels: vec![2, 8],
            strides: StrideChoice::List((1..=5).collect()),
        };
        assert_eq!(grid.specs().unwrap().len(), 10);

        let default = SweepGrid::default();
        assert_eq!(default.windows, (2..=16).collect::<Vec<_>>());
        assert_eq!(default.specs().unwrap().len(), 15 * 9);
        assert!(SweepGrid {
            windows: vec![],
            ..SweepGrid::default()
        }
        .specs()
        .is_err());
    }
}
