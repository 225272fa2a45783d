//! Similarity and dissimilarity metrics between equally sized grayscale
//! images, plus a scorer that orients every metric so that a greater score
//! always means "more similar".

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::image::GrayImage;

/// Finite stand-in for "identical" under PSNR, which would otherwise be
/// unbounded at zero error.
pub const PSNR_CAP_DB: f64 = 100.0;

/// SSIM sliding-window side length.
pub const SSIM_WINDOW: u32 = 8;

const SSIM_C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const SSIM_C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("image dimensions differ: {}x{} vs {}x{}", a.0, a.1, b.0, b.1)]
    DimensionMismatch { a: (u32, u32), b: (u32, u32) },
    #[error("structural content is undefined for an all-zero test image")]
    AllZeroTest,
    #[error("unknown metric id {name:?} (valid: ssim, psnr, mse, sci, rmse, mae)")]
    UnknownMetric { name: String },
}

fn check_dims(a: &GrayImage, b: &GrayImage) -> Result<(), MetricError> {
    if a.dimensions() != b.dimensions() {
        return Err(MetricError::DimensionMismatch {
            a: a.dimensions(),
            b: b.dimensions(),
        });
    }
    Ok(())
}

/// Mean squared error: `(1/N) * sum((a - b)^2)`.
pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64, MetricError> {
    check_dims(a, b)?;
    let sum: u64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    Ok(sum as f64 / a.pixel_count() as f64)
}

/// Root mean squared error.
pub fn rmse(a: &GrayImage, b: &GrayImage) -> Result<f64, MetricError> {
    Ok(mse(a, b)?.sqrt())
}

/// Mean absolute error: `(1/N) * sum(|a - b|)`.
pub fn mae(a: &GrayImage, b: &GrayImage) -> Result<f64, MetricError> {
    check_dims(a, b)?;
    let sum: u64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| (x as i64 - y as i64).unsigned_abs())
        .sum();
    Ok(sum as f64 / a.pixel_count() as f64)
}

/// Peak signal-to-noise ratio in decibels: `10 * log10(255^2 / mse)`,
/// capped at [`PSNR_CAP_DB`] when the images are identical.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64, MetricError> {
    let e = mse(a, b)?;
    if e == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok(10.0 * (255.0 * 255.0 / e).log10())
}

/// Structural content: `sum(reference^2) / sum(test^2)`. Values near 1 mean
/// the two images carry similar overall energy. Not symmetric.
pub fn sci(reference: &GrayImage, test: &GrayImage) -> Result<f64, MetricError> {
    check_dims(reference, test)?;
    let sq_sum =
        |img: &GrayImage| -> u64 { img.pixels().iter().map(|&p| (p as u64) * (p as u64)).sum() };
    let denom = sq_sum(test);
    if denom == 0 {
        return Err(MetricError::AllZeroTest);
    }
    Ok(sq_sum(reference) as f64 / denom as f64)
}

/// Summed-area tables over u8 pixels and their pairwise products, all exact
/// in u64, so window moments are independent of evaluation order.
struct WindowSums {
    width: usize,
    sum_a: Vec<u64>,
    sum_b: Vec<u64>,
    sum_aa: Vec<u64>,
    sum_bb: Vec<u64>,
    sum_ab: Vec<u64>,
}

impl WindowSums {
    fn build(a: &GrayImage, b: &GrayImage) -> Self {
        let (w, h) = (a.width() as usize, a.height() as usize);
        let stride = w + 1;
        let len = stride * (h + 1);
        let mut tables = Self {
            width: stride,
            sum_a: vec![0; len],
            sum_b: vec![0; len],
            sum_aa: vec![0; len],
            sum_bb: vec![0; len],
            sum_ab: vec![0; len],
        };
        let (pa, pb) = (a.pixels(), b.pixels());
        for y in 0..h {
            for x in 0..w {
                let va = pa[y * w + x] as u64;
                let vb = pb[y * w + x] as u64;
                let idx = (y + 1) * stride + (x + 1);
                let up = y * stride + (x + 1);
                let left = (y + 1) * stride + x;
                let diag = y * stride + x;
                tables.sum_a[idx] = va + tables.sum_a[up] + tables.sum_a[left] - tables.sum_a[diag];
                tables.sum_b[idx] = vb + tables.sum_b[up] + tables.sum_b[left] - tables.sum_b[diag];
                tables.sum_aa[idx] =
                    va * va + tables.sum_aa[up] + tables.sum_aa[left] - tables.sum_aa[diag];
                tables.sum_bb[idx] =
                    vb * vb + tables.sum_bb[up] + tables.sum_bb[left] - tables.sum_bb[diag];
                tables.sum_ab[idx] =
                    va * vb + tables.sum_ab[up] + tables.sum_ab[left] - tables.sum_ab[diag];
            }
        }
        tables
    }

    /// Window sums over `[x, x+ww) x [y, y+wh)`.
    fn rect(&self, table: &[u64], x: usize, y: usize, ww: usize, wh: usize) -> u64 {
        let s = self.width;
        table[(y + wh) * s + (x + ww)] + table[y * s + x]
            - table[y * s + (x + ww)]
            - table[(y + wh) * s + x]
    }
}

fn ssim_window(sums: &WindowSums, x: usize, y: usize, ww: usize, wh: usize) -> f64 {
    let n = (ww * wh) as f64;
    let sa = sums.rect(&sums.sum_a, x, y, ww, wh) as f64;
    let sb = sums.rect(&sums.sum_b, x, y, ww, wh) as f64;
    let saa = sums.rect(&sums.sum_aa, x, y, ww, wh) as f64;
    let sbb = sums.rect(&sums.sum_bb, x, y, ww, wh) as f64;
    let sab = sums.rect(&sums.sum_ab, x, y, ww, wh) as f64;
    let mu_a = sa / n;
    let mu_b = sb / n;
    let var_a = saa / n - mu_a * mu_a;
    let var_b = sbb / n - mu_b * mu_b;
    let cov = sab / n - mu_a * mu_b;
    let num = (2.0 * mu_a * mu_b + SSIM_C1) * (2.0 * cov + SSIM_C2);
    let den = (mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (var_a + var_b + SSIM_C2);
    num / den
}

/// Structural similarity index in [-1, 1]: luminance/contrast/structure
/// product averaged over every 8x8 window at stride 1 (uniform weights,
/// population moments). Images smaller than the window on either axis are
/// scored as one window covering the whole image.
pub fn ssim(a: &GrayImage, b: &GrayImage) -> Result<f64, MetricError> {
    check_dims(a, b)?;
    let (w, h) = (a.width() as usize, a.height() as usize);
    let win = SSIM_WINDOW as usize;
    let sums = WindowSums::build(a, b);
    if w < win || h < win {
        return Ok(ssim_window(&sums, 0, 0, w, h));
    }
    let mut total = 0.0;
    let mut count = 0u64;
    for y in 0..=(h - win) {
        for x in 0..=(w - win) {
            total += ssim_window(&sums, x, y, win, win);
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// The six supported similarity/dissimilarity metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Ssim,
    Psnr,
    Mse,
    Sci,
    Rmse,
    Mae,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Ssim,
        Metric::Psnr,
        Metric::Mse,
        Metric::Sci,
        Metric::Rmse,
        Metric::Mae,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Ssim => "ssim",
            Metric::Psnr => "psnr",
            Metric::Mse => "mse",
            Metric::Sci => "sci",
            Metric::Rmse => "rmse",
            Metric::Mae => "mae",
        }
    }

    /// Whether the raw metric value already grows with similarity.
    pub fn higher_is_better(&self) -> bool {
        matches!(self, Metric::Ssim | Metric::Psnr)
    }

    /// Raw metric value, unoriented.
    pub fn raw(&self, reference: &GrayImage, candidate: &GrayImage) -> Result<f64, MetricError> {
        match self {
            Metric::Ssim => ssim(reference, candidate),
            Metric::Psnr => psnr(reference, candidate),
            Metric::Mse => mse(reference, candidate),
            Metric::Sci => sci(reference, candidate),
            Metric::Rmse => rmse(reference, candidate),
            Metric::Mae => mae(reference, candidate),
        }
    }

    /// Orient a raw value so that greater always means more similar:
    /// dissimilarity metrics are negated and structural content becomes
    /// `-|1 - SC|`.
    pub fn orient(&self, raw: f64) -> f64 {
        match self {
            Metric::Ssim | Metric::Psnr => raw,
            Metric::Mse | Metric::Rmse | Metric::Mae => -raw,
            Metric::Sci => -(1.0 - raw).abs(),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ssim" => Ok(Metric::Ssim),
            "psnr" => Ok(Metric::Psnr),
            "mse" => Ok(Metric::Mse),
            "sci" => Ok(Metric::Sci),
            "rmse" => Ok(Metric::Rmse),
            "mae" => Ok(Metric::Mae),
            _ => Err(MetricError::UnknownMetric {
                name: s.to_string(),
            }),
        }
    }
}

/// An oriented score; comparable only against scores of the same metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricScore {
    pub metric: Metric,
    pub value: f64,
}

/// Anything that can judge how similar a candidate is to a reference.
/// Greater scores mean more similar.
pub trait Similarity {
    fn name(&self) -> &str;
    fn score(&self, reference: &GrayImage, candidate: &GrayImage) -> Result<f64, MetricError>;
}

/// [`Similarity`] backed by one of the six [`Metric`]s.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimilarityScorer {
    metric: Metric,
}

impl SimilarityScorer {
    pub fn new(metric: Metric) -> Self {
        Self { metric }
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn score(
        &self,
        reference: &GrayImage,
        candidate: &GrayImage,
    ) -> Result<MetricScore, MetricError> {
        let raw = self.metric.raw(reference, candidate)?;
        Ok(MetricScore {
            metric: self.metric,
            value: self.metric.orient(raw),
        })
    }
}

impl Similarity for SimilarityScorer {
    fn name(&self) -> &str {
        self.metric.as_str()
    }

    fn score(&self, reference: &GrayImage, candidate: &GrayImage) -> Result<f64, MetricError> {
        Ok(SimilarityScorer::score(self, reference, candidate)?.value)
    }
}
