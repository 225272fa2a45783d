//! Core raster and histogram types: 8-bit grayscale images, 256-bin
//! histograms and their cumulative / normalized-cumulative views.

use thiserror::Error;

/// Number of representable gray levels.
pub const LEVELS: usize = 256;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImageError {
    #[error("image dimensions must be positive (got {width}x{height})")]
    EmptyDimensions { width: u32, height: u32 },
    #[error("pixel buffer length {len} does not match {width}x{height}")]
    PixelCountMismatch { width: u32, height: u32, len: usize },
}

/// An 8-bit single-channel raster stored in row-major order.
///
/// Both dimensions are at least 1, so the pixel count is never zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyDimensions { width, height });
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(ImageError::PixelCountMismatch {
                width,
                height,
                len: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Image filled with a single intensity.
    pub fn constant(width: u32, height: u32, value: u8) -> Result<Self, ImageError> {
        Self::new(width, height, vec![value; width as usize * height as usize])
    }

    /// Build an image from a per-pixel function of (x, y).
    pub fn from_fn(
        width: u32,
        height: u32,
        mut f: impl FnMut(u32, u32) -> u8,
    ) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyDimensions { width, height });
        }
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    /// Total number of pixels.
    pub fn pixel_count(&self) -> u64 {
        self.width as u64 * self.height as u64
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y as usize * self.width as usize + x as usize]
    }
}

/// Per-level pixel counts of an image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    bins: [u64; LEVELS],
}

impl Histogram {
    pub fn from_bins(bins: [u64; LEVELS]) -> Self {
        Self { bins }
    }

    pub fn bins(&self) -> &[u64; LEVELS] {
        &self.bins
    }

    pub(crate) fn bins_mut(&mut self) -> &mut [u64; LEVELS] {
        &mut self.bins
    }

    /// Sum of all bins, i.e. the pixel count of the source image.
    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }
}

/// Running prefix sums of a histogram; the last entry equals the pixel count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cdf {
    values: [u64; LEVELS],
}

impl Cdf {
    pub fn values(&self) -> &[u64; LEVELS] {
        &self.values
    }

    /// The final entry, equal to the source image's pixel count.
    pub fn total(&self) -> u64 {
        self.values[LEVELS - 1]
    }
}

/// A CDF divided by the pixel count; non-decreasing with final entry 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedCdf {
    values: [f64; LEVELS],
}

impl NormalizedCdf {
    pub fn values(&self) -> &[f64; LEVELS] {
        &self.values
    }
}

/// Count how many pixels hold each gray level.
pub fn compute_histogram(image: &GrayImage) -> Histogram {
    let mut bins = [0u64; LEVELS];
    for &p in image.pixels() {
        bins[p as usize] += 1;
    }
    Histogram { bins }
}

/// Prefix-sum a histogram into its cumulative distribution.
pub fn compute_cdf(hist: &Histogram) -> Cdf {
    let mut values = [0u64; LEVELS];
    let mut running = 0u64;
    for (i, &count) in hist.bins.iter().enumerate() {
        running += count;
        values[i] = running;
    }
    Cdf { values }
}

/// Divide a CDF by the pixel count `n` so every entry lands in [0, 1].
///
/// The caller supplies `n` equal to the CDF's final entry, which makes the
/// last normalized value exactly 1.
pub fn normalize_cdf(cdf: &Cdf, n: u64) -> NormalizedCdf {
    debug_assert!(n > 0);
    debug_assert_eq!(cdf.total(), n);
    let mut values = [0f64; LEVELS];
    for (i, &v) in cdf.values.iter().enumerate() {
        values[i] = v as f64 / n as f64;
    }
    NormalizedCdf { values }
}
