//! Batch harness: image ingestion, running the enhancement algorithms over
//! sampled input sets, quality aggregation into CSV reports, and tile-size /
//! metric parameter sweeps.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::clahe::{self, ClaheParams};
use crate::ghe;
use crate::image::GrayImage;
use crate::metrics::Metric;
use crate::pgm::{self, PgmError};
use crate::quality::{self, QualityReport};
use crate::search::{self, SearchParams};

/// CSV header, version 1. Missing fields are written empty, never as zero.
pub const CSV_HEADER: [&str; 11] = [
    "image",
    "algorithm",
    "ts",
    "clip_factor",
    "metric",
    "score",
    "edge_count",
    "edge_density",
    "mean_value",
    "entropy",
    "avg_gradient",
];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Pgm(#[from] PgmError),
    #[error("{path}: png: {reason}")]
    Png { path: String, reason: String },
    #[error("{path}: unsupported format {ext:?} (supported: pgm, png)")]
    UnsupportedFormat { path: String, ext: String },
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("no input images found")]
    NoInputs,
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("writing report: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Ghe,
    Clahe,
    Gclahe,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Ghe, Algorithm::Clahe, Algorithm::Gclahe];

    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Ghe => "ghe",
            Algorithm::Clahe => "clahe",
            Algorithm::Gclahe => "gclahe",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ghe" => Ok(Algorithm::Ghe),
            "clahe" => Ok(Algorithm::Clahe),
            "gclahe" => Ok(Algorithm::Gclahe),
            _ => Err(format!(
                "unknown algorithm {s:?} (valid: ghe, clahe, gclahe, all)"
            )),
        }
    }
}

/// Everything one batch run needs. The seed makes the "select images at
/// random" step reproducible and is recorded in the emitted report.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Files and/or directories to draw images from.
    pub inputs: Vec<PathBuf>,
    /// Where enhanced images and the report land; no images are written
    /// when unset.
    pub output_dir: Option<PathBuf>,
    pub algorithms: Vec<Algorithm>,
    pub clahe: ClaheParams,
    pub gclahe: SearchParams,
    pub canny_low: f64,
    pub canny_high: f64,
    /// How many images to sample from the discovered set.
    pub sample_size: usize,
    pub seed: u64,
    /// Report file name, resolved against `output_dir` when set.
    pub report_name: String,
}

/// One CSV data or mean row.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub image: String,
    pub algorithm: String,
    pub ts: Option<u32>,
    pub clip_factor: Option<f64>,
    pub metric: Option<String>,
    pub score: Option<f64>,
    pub edge_count: f64,
    pub edge_density: f64,
    pub mean_value: f64,
    pub entropy: f64,
    pub avg_gradient: f64,
}

impl BenchRow {
    fn fields(&self) -> [String; 11] {
        fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
            v.as_ref().map(|x| x.to_string()).unwrap_or_default()
        }
        [
            self.image.clone(),
            self.algorithm.clone(),
            opt(&self.ts),
            opt(&self.clip_factor),
            opt(&self.metric),
            opt(&self.score),
            self.edge_count.to_string(),
            self.edge_density.to_string(),
            self.mean_value.to_string(),
            self.entropy.to_string(),
            self.avg_gradient.to_string(),
        ]
    }
}

/// A skipped image (or image/parameter combination) and why.
#[derive(Debug, Clone)]
pub struct SkippedInput {
    pub what: String,
    pub reason: String,
}

#[derive(Debug)]
pub struct SuiteOutcome {
    pub rows: Vec<BenchRow>,
    pub csv_path: PathBuf,
    pub skipped: Vec<SkippedInput>,
}

/// Load a grayscale image from a PGM (P5) or PNG file. Color inputs collapse
/// to luma `round(0.299 R + 0.587 G + 0.114 B)`; 16-bit samples shift right
/// by 8.
pub fn ingest(path: &Path) -> Result<GrayImage, IngestError> {
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "pgm" => Ok(pgm::read(path)?),
        "png" => read_png(path),
        _ => Err(IngestError::UnsupportedFormat {
            path: path.display().to_string(),
            ext,
        }),
    }
}

#[inline]
fn luma(r: u8, g: u8, b: u8) -> u8 {
    (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64).round() as u8
}

fn read_png(path: &Path) -> Result<GrayImage, IngestError> {
    let err = |reason: String| IngestError::Png {
        path: path.display().to_string(),
        reason,
    };
    let file = fs::File::open(path).map_err(|e| err(e.to_string()))?;
    let decoder = png::Decoder::new(std::io::BufReader::new(file));
    let mut reader = decoder.read_info().map_err(|e| err(e.to_string()))?;
    let mut buf = vec![
        0u8;
        reader
            .output_buffer_size()
            .ok_or_else(|| err("image too large".into()))?
    ];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| err(e.to_string()))?;
    let data = &buf[..info.buffer_size()];
    let (w, h) = (info.width, info.height);

    use png::{BitDepth, ColorType};
    let sixteen = match info.bit_depth {
        BitDepth::Eight => false,
        BitDepth::Sixteen => true,
        other => return Err(err(format!("unsupported bit depth {other:?}"))),
    };
    // Channel samples narrowed to 8 bits.
    let sample = |i: usize| -> u8 {
        if sixteen {
            (u16::from_be_bytes([data[2 * i], data[2 * i + 1]]) >> 8) as u8
        } else {
            data[i]
        }
    };
    let count = w as usize * h as usize;
    let pixels: Vec<u8> = match info.color_type {
        ColorType::Grayscale => (0..count).map(sample).collect(),
        ColorType::GrayscaleAlpha => (0..count).map(|i| sample(2 * i)).collect(),
        ColorType::Rgb => (0..count)
            .map(|i| luma(sample(3 * i), sample(3 * i + 1), sample(3 * i + 2)))
            .collect(),
        ColorType::Rgba => (0..count)
            .map(|i| luma(sample(4 * i), sample(4 * i + 1), sample(4 * i + 2)))
            .collect(),
        other => return Err(err(format!("unsupported color type {other:?}"))),
    };
    GrayImage::new(w, h, pixels).map_err(|e| err(e.to_string()))
}

/// SplitMix64: a small pinned generator so report sampling never shifts
/// under dependency upgrades.
struct SplitMix64(u64);

impl SplitMix64 {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// Fisher-Yates over the lexicographically sorted file list, then the first
/// `sample_size` entries.
fn seeded_sample(mut files: Vec<PathBuf>, seed: u64, sample_size: usize) -> Vec<PathBuf> {
    files.sort();
    files.dedup();
    let mut rng = SplitMix64(seed);
    for i in (1..files.len()).rev() {
        let j = (rng.next() % (i as u64 + 1)) as usize;
        files.swap(i, j);
    }
    files.truncate(sample_size.max(1).min(files.len()));
    files
}

fn discover(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, BenchError> {
    let mut files = Vec::new();
    for input in inputs {
        let meta = fs::metadata(input).map_err(|source| BenchError::Io {
            path: input.display().to_string(),
            source,
        })?;
        if meta.is_dir() {
            let entries = fs::read_dir(input).map_err(|source| BenchError::Io {
                path: input.display().to_string(),
                source,
            })?;
            for entry in entries {
                let entry = entry.map_err(|source| BenchError::Io {
                    path: input.display().to_string(),
                    source,
                })?;
                let path = entry.path();
                let ext = path
                    .extension()
                    .map(|e| e.to_string_lossy().to_ascii_lowercase())
                    .unwrap_or_default();
                if path.is_file() && matches!(ext.as_str(), "pgm" | "png") {
                    files.push(path);
                }
            }
        } else {
            files.push(input.clone());
        }
    }
    if files.is_empty() {
        return Err(BenchError::NoInputs);
    }
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn data_row(
    image_id: &str,
    algorithm: Algorithm,
    ts: Option<u32>,
    clip_factor: Option<f64>,
    metric: Option<String>,
    score: Option<f64>,
    report: &QualityReport,
) -> BenchRow {
    BenchRow {
        image: image_id.to_string(),
        algorithm: algorithm.as_str().to_string(),
        ts,
        clip_factor,
        metric,
        score,
        edge_count: report.edge_count as f64,
        edge_density: report.edge_density,
        mean_value: report.mean_value,
        entropy: report.entropy,
        avg_gradient: report.average_gradient,
    }
}

/// Arithmetic mean of a group of data rows, labeled `image = "mean"`.
/// Optional columns are averaged when present in every group row, else empty.
fn mean_row(group: &[&BenchRow]) -> BenchRow {
    let n = group.len() as f64;
    let mean_of = |f: &dyn Fn(&BenchRow) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
    let mean_opt = |f: &dyn Fn(&BenchRow) -> Option<f64>| -> Option<f64> {
        let values: Vec<f64> = group.iter().filter_map(|r| f(r)).collect();
        (values.len() == group.len()).then(|| values.iter().sum::<f64>() / n)
    };
    let first = group[0];
    let same_ts = group.iter().all(|r| r.ts == first.ts);
    let same_metric = group.iter().all(|r| r.metric == first.metric);
    BenchRow {
        image: "mean".to_string(),
        algorithm: first.algorithm.clone(),
        ts: if same_ts { first.ts } else { None },
        clip_factor: mean_opt(&|r| r.clip_factor),
        metric: if same_metric {
            first.metric.clone()
        } else {
            None
        },
        score: mean_opt(&|r| r.score),
        edge_count: mean_of(&|r| r.edge_count),
        edge_density: mean_of(&|r| r.edge_density),
        mean_value: mean_of(&|r| r.mean_value),
        entropy: mean_of(&|r| r.entropy),
        avg_gradient: mean_of(&|r| r.avg_gradient),
    }
}

fn write_enhanced(
    config: &RunConfig,
    image_id: &str,
    label: &str,
    image: &GrayImage,
    skipped: &mut Vec<SkippedInput>,
) {
    if let Some(dir) = &config.output_dir {
        let path = dir.join(format!("{image_id}__{label}.pgm"));
        if let Err(e) = pgm::write(image, &path) {
            skipped.push(SkippedInput {
                what: path.display().to_string(),
                reason: e.to_string(),
            });
        }
    }
}

fn csv_path(config: &RunConfig) -> PathBuf {
    match &config.output_dir {
        Some(dir) => dir.join(&config.report_name),
        None => PathBuf::from(&config.report_name),
    }
}

/// The output directory must exist before any enhanced image is written.
fn prepare_output_dir(config: &RunConfig) -> Result<(), BenchError> {
    if let Some(dir) = &config.output_dir {
        fs::create_dir_all(dir).map_err(|source| BenchError::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    Ok(())
}

fn write_csv(config: &RunConfig, rows: &[BenchRow]) -> Result<PathBuf, BenchError> {
    let path = csv_path(config);
    let mut file = fs::File::create(&path).map_err(|source| BenchError::Io {
        path: path.display().to_string(),
        source,
    })?;
    writeln!(
        file,
        "# gclahe-bench v1 seed={} sample={}",
        config.seed, config.sample_size
    )
    .map_err(|source| BenchError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        writer.write_record(row.fields())?;
    }
    writer.flush().map_err(|source| BenchError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}

struct Enhanced {
    image: GrayImage,
    ts: Option<u32>,
    clip_factor: Option<f64>,
    metric: Option<String>,
    score: Option<f64>,
}

fn enhance_one(
    image: &GrayImage,
    algorithm: Algorithm,
    config: &RunConfig,
) -> Result<Enhanced, String> {
    match algorithm {
        Algorithm::Ghe => Ok(Enhanced {
            image: ghe::equalize(image),
            ts: None,
            clip_factor: None,
            metric: None,
            score: None,
        }),
        Algorithm::Clahe => {
            let out = clahe::enhance(image, &config.clahe).map_err(|e| e.to_string())?;
            let clip = match config.clahe.clip {
                clahe::ClipLimit::Factor(f) => Some(f),
                clahe::ClipLimit::Unlimited => None,
            };
            Ok(Enhanced {
                image: out,
                ts: Some(config.clahe.grid_size),
                clip_factor: clip,
                metric: None,
                score: None,
            })
        }
        Algorithm::Gclahe => {
            let outcome = search::run(image, &config.gclahe).map_err(|e| e.to_string())?;
            Ok(Enhanced {
                ts: Some(config.gclahe.grid_size),
                clip_factor: Some(outcome.chosen_clip_factor as f64),
                metric: Some(config.gclahe.metric.as_str().to_string()),
                score: Some(outcome.trace.final_score),
                image: outcome.image,
            })
        }
    }
}

/// Enhance every sampled image with every selected algorithm, evaluate the
/// quality statistics, and write the CSV report (data rows first, then one
/// mean row per algorithm). Per-image failures are recorded and skipped.
pub fn run_suite(config: &RunConfig) -> Result<SuiteOutcome, BenchError> {
    prepare_output_dir(config)?;
    let sample = seeded_sample(discover(&config.inputs)?, config.seed, config.sample_size);
    let mut rows = Vec::new();
    let mut skipped = Vec::new();

    for path in &sample {
        let image = match ingest(path) {
            Ok(img) => img,
            Err(e) => {
                skipped.push(SkippedInput {
                    what: path.display().to_string(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let id = stem(path);
        for &alg in &config.algorithms {
            match enhance_one(&image, alg, config) {
                Ok(enhanced) => {
                    match quality::quality_report(
                        &enhanced.image,
                        config.canny_low,
                        config.canny_high,
                    ) {
                        Ok(report) => {
                            write_enhanced(
                                config,
                                &id,
                                alg.as_str(),
                                &enhanced.image,
                                &mut skipped,
                            );
                            rows.push(data_row(
                                &id,
                                alg,
                                enhanced.ts,
                                enhanced.clip_factor,
                                enhanced.metric,
                                enhanced.score,
                                &report,
                            ));
                        }
                        Err(e) => skipped.push(SkippedInput {
                            what: format!("{id} ({alg})"),
                            reason: e.to_string(),
                        }),
                    }
                }
                Err(reason) => skipped.push(SkippedInput {
                    what: format!("{id} ({alg})"),
                    reason,
                }),
            }
        }
    }

    let mut means = Vec::new();
    for &alg in &config.algorithms {
        let group: Vec<&BenchRow> = rows
            .iter()
            .filter(|r| r.algorithm == alg.as_str())
            .collect();
        if !group.is_empty() {
            means.push(mean_row(&group));
        }
    }
    rows.extend(means);

    let csv_path = write_csv(config, &rows)?;
    Ok(SuiteOutcome {
        rows,
        csv_path,
        skipped,
    })
}

/// Run the clip-factor search at each tile size over the sampled set;
/// data rows grouped by tile size, then one mean row per tile size.
pub fn sweep_tile_size(config: &RunConfig, sizes: &[u32]) -> Result<SuiteOutcome, BenchError> {
    prepare_output_dir(config)?;
    let sample = seeded_sample(discover(&config.inputs)?, config.seed, config.sample_size);
    let mut rows = Vec::new();
    let mut skipped = Vec::new();

    let mut images = Vec::new();
    for path in &sample {
        match ingest(path) {
            Ok(img) => images.push((stem(path), img)),
            Err(e) => skipped.push(SkippedInput {
                what: path.display().to_string(),
                reason: e.to_string(),
            }),
        }
    }

    for &ts in sizes {
        for (id, image) in &images {
            let params = SearchParams {
                grid_size: ts,
                ..config.gclahe
            };
            let outcome = match search::run(image, &params) {
                Ok(o) => o,
                Err(e) => {
                    skipped.push(SkippedInput {
                        what: format!("{id} (ts={ts})"),
                        reason: e.to_string(),
                    });
                    continue;
                }
            };
            match quality::quality_report(&outcome.image, config.canny_low, config.canny_high) {
                Ok(report) => rows.push(data_row(
                    id,
                    Algorithm::Gclahe,
                    Some(ts),
                    Some(outcome.chosen_clip_factor as f64),
                    Some(params.metric.as_str().to_string()),
                    Some(outcome.trace.final_score),
                    &report,
                )),
                Err(e) => skipped.push(SkippedInput {
                    what: format!("{id} (ts={ts})"),
                    reason: e.to_string(),
                }),
            }
        }
    }

    let mut means = Vec::new();
    for &ts in sizes {
        let group: Vec<&BenchRow> = rows.iter().filter(|r| r.ts == Some(ts)).collect();
        if !group.is_empty() {
            means.push(mean_row(&group));
        }
    }
    rows.extend(means);

    let csv_path = write_csv(config, &rows)?;
    Ok(SuiteOutcome {
        rows,
        csv_path,
        skipped,
    })
}

/// Run the clip-factor search under each similarity metric over the sampled
/// set; data rows grouped by metric, then one mean row per metric.
pub fn sweep_metric(config: &RunConfig, metrics: &[Metric]) -> Result<SuiteOutcome, BenchError> {
    prepare_output_dir(config)?;
    let sample = seeded_sample(discover(&config.inputs)?, config.seed, config.sample_size);
    let mut rows = Vec::new();
    let mut skipped = Vec::new();

    let mut images = Vec::new();
    for path in &sample {
        match ingest(path) {
            Ok(img) => images.push((stem(path), img)),
            Err(e) => skipped.push(SkippedInput {
                what: path.display().to_string(),
                reason: e.to_string(),
            }),
        }
    }

    for &metric in metrics {
        for (id, image) in &images {
            let params = SearchParams {
                metric,
                ..config.gclahe
            };
            let outcome = match search::run(image, &params) {
                Ok(o) => o,
                Err(e) => {
                    skipped.push(SkippedInput {
                        what: format!("{id} ({metric})"),
                        reason: e.to_string(),
                    });
                    continue;
                }
            };
            match quality::quality_report(&outcome.image, config.canny_low, config.canny_high) {
                Ok(report) => rows.push(data_row(
                    id,
                    Algorithm::Gclahe,
                    Some(params.grid_size),
                    Some(outcome.chosen_clip_factor as f64),
                    Some(metric.as_str().to_string()),
                    Some(outcome.trace.final_score),
                    &report,
                )),
                Err(e) => skipped.push(SkippedInput {
                    what: format!("{id} ({metric})"),
                    reason: e.to_string(),
                }),
            }
        }
    }

    let mut means = Vec::new();
    for &metric in metrics {
        let group: Vec<&BenchRow> = rows
            .iter()
            .filter(|r| r.metric.as_deref() == Some(metric.as_str()))
            .collect();
        if !group.is_empty() {
            means.push(mean_row(&group));
        }
    }
    rows.extend(means);

    let csv_path = write_csv(config, &rows)?;
    Ok(SuiteOutcome {
        rows,
        csv_path,
        skipped,
    })
}
