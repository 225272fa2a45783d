//! C ABI for the gclahe library: opaque image handles, status codes, and
//! plain-C entry points for the enhancement algorithms, similarity scoring,
//! and quality statistics. `include/gclahe.h` is generated by cbindgen at
//! build time.
//!
//! Every function that can fail returns a [`GclaheStatus`]; out-parameters
//! are written only on `Ok`. Images returned through out-pointers are owned
//! by the caller and must be released with [`gclahe_image_free`].

use std::ffi::{c_char, CStr};
use std::path::Path;

use gclahe::clahe::{self, ClaheParams, ClipLimit, ParamError};
use gclahe::ghe;
use gclahe::image::GrayImage;
use gclahe::metrics::{Metric, MetricError, SimilarityScorer};
use gclahe::pgm;
use gclahe::quality;
use gclahe::search::{self, SearchError, SearchParams};

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GclaheStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A parameter was out of range (tile grid, clip factor, thresholds,
    /// buffer sizes, image dimensions).
    InvalidArgument = 2,
    /// The two images have different dimensions.
    DimensionMismatch = 3,
    /// Reading or writing a file failed.
    IoError = 4,
    /// The metric is undefined for this input (all-zero test image).
    MetricUndefined = 5,
}

/// Similarity metric selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GclaheMetric {
    Ssim = 0,
    Psnr = 1,
    Mse = 2,
    Sci = 3,
    Rmse = 4,
    Mae = 5,
}

impl From<GclaheMetric> for Metric {
    fn from(m: GclaheMetric) -> Self {
        match m {
            GclaheMetric::Ssim => Metric::Ssim,
            GclaheMetric::Psnr => Metric::Psnr,
            GclaheMetric::Mse => Metric::Mse,
            GclaheMetric::Sci => Metric::Sci,
            GclaheMetric::Rmse => Metric::Rmse,
            GclaheMetric::Mae => Metric::Mae,
        }
    }
}

/// Quality statistics of one image.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GclaheQualityReport {
    pub edge_count: u64,
    pub edge_density: f64,
    pub mean_value: f64,
    pub entropy: f64,
    pub average_gradient: f64,
}

/// Opaque 8-bit grayscale image.
pub struct GclaheImage(GrayImage);

fn status_of_param(err: &ParamError) -> GclaheStatus {
    match err {
        ParamError::GridOutOfRange { .. } | ParamError::ClipFactorTooSmall { .. } => {
            GclaheStatus::InvalidArgument
        }
    }
}

fn status_of_metric(err: &MetricError) -> GclaheStatus {
    match err {
        MetricError::DimensionMismatch { .. } => GclaheStatus::DimensionMismatch,
        MetricError::AllZeroTest => GclaheStatus::MetricUndefined,
        MetricError::UnknownMetric { .. } => GclaheStatus::InvalidArgument,
    }
}

unsafe fn cstr_path<'a>(path: *const c_char) -> Option<&'a Path> {
    if path.is_null() {
        return None;
    }
    CStr::from_ptr(path).to_str().ok().map(Path::new)
}

unsafe fn write_image(out: *mut *mut GclaheImage, image: GrayImage) -> GclaheStatus {
    *out = Box::into_raw(Box::new(GclaheImage(image)));
    GclaheStatus::Ok
}

/// Create an image from `width * height` row-major pixels.
///
/// # Safety
/// `pixels` must point to at least `pixels_len` readable bytes and `out`
/// must be a valid pointer to a `GclaheImage*`.
#[no_mangle]
pub unsafe extern "C" fn gclahe_image_create(
    width: u32,
    height: u32,
    pixels: *const u8,
    pixels_len: usize,
    out: *mut *mut GclaheImage,
) -> GclaheStatus {
    if pixels.is_null() || out.is_null() {
        return GclaheStatus::NullPointer;
    }
    let data = std::slice::from_raw_parts(pixels, pixels_len);
    match GrayImage::new(width, height, data.to_vec()) {
        Ok(image) => write_image(out, image),
        Err(_) => GclaheStatus::InvalidArgument,
    }
}

/// Release an image previously returned by this library. Null is a no-op.
///
/// # Safety
/// `image` must be null or a pointer obtained from this library that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn gclahe_image_free(image: *mut GclaheImage) {
    if !image.is_null() {
        drop(Box::from_raw(image));
    }
}

/// Width in pixels, or 0 when `image` is null.
///
/// # Safety
/// `image` must be null or a live image handle.
#[no_mangle]
pub unsafe extern "C" fn gclahe_image_width(image: *const GclaheImage) -> u32 {
    image.as_ref().map_or(0, |img| img.0.width())
}

/// Height in pixels, or 0 when `image` is null.
///
/// # Safety
/// `image` must be null or a live image handle.
#[no_mangle]
pub unsafe extern "C" fn gclahe_image_height(image: *const GclaheImage) -> u32 {
    image.as_ref().map_or(0, |img| img.0.height())
}

/// Copy the row-major pixels into `buffer` (at least `width * height`
/// bytes).
///
/// # Safety
/// `image` must be a live handle and `buffer` writable for `buffer_len`
/// bytes.
#[no_mangle]
pub unsafe extern "C" fn gclahe_image_pixels(
    image: *const GclaheImage,
    buffer: *mut u8,
    buffer_len: usize,
) -> GclaheStatus {
    let Some(img) = image.as_ref() else {
        return GclaheStatus::NullPointer;
    };
    if buffer.is_null() {
        return GclaheStatus::NullPointer;
    }
    let pixels = img.0.pixels();
    if buffer_len < pixels.len() {
        return GclaheStatus::InvalidArgument;
    }
    std::ptr::copy_nonoverlapping(pixels.as_ptr(), buffer, pixels.len());
    GclaheStatus::Ok
}

/// Load a binary PGM (P5) file; 16-bit samples are narrowed by a right
/// shift of 8.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gclahe_image_read_pgm(
    path: *const c_char,
    out: *mut *mut GclaheImage,
) -> GclaheStatus {
    if out.is_null() {
        return GclaheStatus::NullPointer;
    }
    let Some(path) = cstr_path(path) else {
        return GclaheStatus::NullPointer;
    };
    match pgm::read(path) {
        Ok(image) => write_image(out, image),
        Err(_) => GclaheStatus::IoError,
    }
}

/// Write the image as a binary PGM (P5) file.
///
/// # Safety
/// `image` must be a live handle and `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gclahe_image_write_pgm(
    image: *const GclaheImage,
    path: *const c_char,
) -> GclaheStatus {
    let Some(img) = image.as_ref() else {
        return GclaheStatus::NullPointer;
    };
    let Some(path) = cstr_path(path) else {
        return GclaheStatus::NullPointer;
    };
    match pgm::write(&img.0, path) {
        Ok(()) => GclaheStatus::Ok,
        Err(_) => GclaheStatus::IoError,
    }
}

/// Global histogram equalization.
///
/// # Safety
/// `image` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gclahe_ghe(
    image: *const GclaheImage,
    out: *mut *mut GclaheImage,
) -> GclaheStatus {
    let Some(img) = image.as_ref() else {
        return GclaheStatus::NullPointer;
    };
    if out.is_null() {
        return GclaheStatus::NullPointer;
    }
    write_image(out, ghe::equalize(&img.0))
}

/// Contrast-limited adaptive histogram equalization over a
/// `grid_size x grid_size` tile grid. A `clip_factor` of 0 or below disables
/// clipping (plain adaptive equalization); finite factors must be >= 1.
///
/// # Safety
/// `image` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gclahe_clahe(
    image: *const GclaheImage,
    grid_size: u32,
    clip_factor: f64,
    out: *mut *mut GclaheImage,
) -> GclaheStatus {
    let Some(img) = image.as_ref() else {
        return GclaheStatus::NullPointer;
    };
    if out.is_null() {
        return GclaheStatus::NullPointer;
    }
    let clip = if clip_factor <= 0.0 {
        ClipLimit::Unlimited
    } else {
        ClipLimit::Factor(clip_factor)
    };
    match clahe::enhance(&img.0, &ClaheParams::new(grid_size, clip)) {
        Ok(enhanced) => write_image(out, enhanced),
        Err(err) => status_of_param(&err),
    }
}

/// Iterative clip-factor search: repeated CLAHE at a growing clip factor,
/// accepted while the result grows more similar to its own globally
/// equalized image. Writes the enhanced image, the chosen clip factor, and
/// the final similarity score.
///
/// # Safety
/// `image` must be a live handle; `out`, `chosen_clip_factor`, and
/// `final_score` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gclahe_enhance(
    image: *const GclaheImage,
    grid_size: u32,
    initial_clip_factor: u32,
    metric: GclaheMetric,
    out: *mut *mut GclaheImage,
    chosen_clip_factor: *mut u32,
    final_score: *mut f64,
) -> GclaheStatus {
    let Some(img) = image.as_ref() else {
        return GclaheStatus::NullPointer;
    };
    if out.is_null() || chosen_clip_factor.is_null() || final_score.is_null() {
        return GclaheStatus::NullPointer;
    }
    let params = SearchParams {
        grid_size,
        initial_clip_factor,
        metric: metric.into(),
    };
    match search::run(&img.0, &params) {
        Ok(outcome) => {
            *chosen_clip_factor = outcome.chosen_clip_factor;
            *final_score = outcome.trace.final_score;
            write_image(out, outcome.image)
        }
        Err(SearchError::Param(err)) => status_of_param(&err),
        Err(SearchError::Metric(err)) => status_of_metric(&err),
        Err(SearchError::InitialClipTooSmall { .. }) => GclaheStatus::InvalidArgument,
    }
}

/// Oriented similarity of `candidate` to `reference` (greater means more
/// similar; dissimilarity metrics are negated).
///
/// # Safety
/// `reference` and `candidate` must be live handles and `score` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn gclahe_similarity(
    metric: GclaheMetric,
    reference: *const GclaheImage,
    candidate: *const GclaheImage,
    score: *mut f64,
) -> GclaheStatus {
    let (Some(reference), Some(candidate)) = (reference.as_ref(), candidate.as_ref()) else {
        return GclaheStatus::NullPointer;
    };
    if score.is_null() {
        return GclaheStatus::NullPointer;
    }
    let scorer = SimilarityScorer::new(metric.into());
    match scorer.score(&reference.0, &candidate.0) {
        Ok(result) => {
            *score = result.value;
            GclaheStatus::Ok
        }
        Err(err) => status_of_metric(&err),
    }
}

/// Quality statistics with a Canny pass at the given hysteresis thresholds.
///
/// # Safety
/// `image` must be a live handle and `report` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gclahe_quality(
    image: *const GclaheImage,
    canny_low: f64,
    canny_high: f64,
    report: *mut GclaheQualityReport,
) -> GclaheStatus {
    let Some(img) = image.as_ref() else {
        return GclaheStatus::NullPointer;
    };
    if report.is_null() {
        return GclaheStatus::NullPointer;
    }
    match quality::quality_report(&img.0, canny_low, canny_high) {
        Ok(q) => {
            *report = GclaheQualityReport {
                edge_count: q.edge_count,
                edge_density: q.edge_density,
                mean_value: q.mean_value,
                entropy: q.entropy,
                average_gradient: q.average_gradient,
            };
            GclaheStatus::Ok
        }
        Err(_) => GclaheStatus::InvalidArgument,
    }
}
