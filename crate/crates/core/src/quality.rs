//! Evaluation metrics for enhanced images: Canny edge detection built from
//! scratch, edge counts and density, entropy, mean intensity, and average
//! gradient magnitude.

use thiserror::Error;

use crate::image::{compute_histogram, GrayImage};

/// 5x5 Gaussian for sigma = 1.4, integer weights summing to [`GAUSSIAN_SUM`].
/// Integer weights keep the smoothing stage exact and order-independent.
const GAUSSIAN_KERNEL: [[u32; 5]; 5] = [
    [2, 4, 5, 4, 2],
    [4, 9, 12, 9, 4],
    [5, 12, 15, 12, 5],
    [4, 9, 12, 9, 4],
    [2, 4, 5, 4, 2],
];
const GAUSSIAN_SUM: u32 = 159;

#[derive(Debug, Error, PartialEq)]
pub enum QualityError {
    #[error("canny thresholds must satisfy 0 <= low <= high (got low {low}, high {high})")]
    InvalidThresholds { low: f64, high: f64 },
    #[error("average gradient needs at least a 2x2 image (got {width}x{height})")]
    NoGradientSupport { width: u32, height: u32 },
}

/// Per-pixel edge flags, same dimensions as the evaluated image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    width: u32,
    height: u32,
    flags: Vec<bool>,
}

impl EdgeMap {
    pub fn new(width: u32, height: u32, flags: Vec<bool>) -> Self {
        assert_eq!(flags.len(), width as usize * height as usize);
        Self {
            width,
            height,
            flags,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn is_edge(&self, x: u32, y: u32) -> bool {
        self.flags[y as usize * self.width as usize + x as usize]
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    /// Number of edge pixels.
    pub fn edge_count(&self) -> u64 {
        self.flags.iter().filter(|&&f| f).count() as u64
    }

    /// Edge pixels divided by total pixels.
    pub fn edge_density(&self) -> f64 {
        self.edge_count() as f64 / (self.width as u64 * self.height as u64) as f64
    }
}

/// The five Table-style evaluation statistics of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub edge_count: u64,
    pub edge_density: f64,
    pub mean_value: f64,
    pub entropy: f64,
    pub average_gradient: f64,
}

/// Smooth with the integer 5x5 Gaussian (replicate border), rounding each
/// output to the nearest intensity. Interior pixels take a clamp-free path;
/// integer sums keep both paths bit-identical.
fn gaussian_smooth(image: &GrayImage) -> GrayImage {
    let w = image.width() as usize;
    let h = image.height() as usize;
    let src = image.pixels();
    let mut pixels = vec![0u8; w * h];

    let clamped = |x: i64, y: i64| -> u32 {
        let cx = x.clamp(0, w as i64 - 1) as usize;
        let cy = y.clamp(0, h as i64 - 1) as usize;
        src[cy * w + cx] as u32
    };

    for y in 0..h {
        for x in 0..w {
            let acc = if x >= 2 && x + 2 < w && y >= 2 && y + 2 < h {
                let mut acc = 0u32;
                for (ky, row_weights) in GAUSSIAN_KERNEL.iter().enumerate() {
                    let base = (y + ky - 2) * w + (x - 2);
                    for (&weight, &p) in row_weights.iter().zip(&src[base..base + 5]) {
                        acc += weight * p as u32;
                    }
                }
                acc
            } else {
                let mut acc = 0u32;
                for (ky, row_weights) in GAUSSIAN_KERNEL.iter().enumerate() {
                    for (kx, &weight) in row_weights.iter().enumerate() {
                        acc += weight * clamped(x as i64 + kx as i64 - 2, y as i64 + ky as i64 - 2);
                    }
                }
                acc
            };
            // Nearest integer; 159 is odd so exact ties cannot occur.
            pixels[y * w + x] = ((acc + GAUSSIAN_SUM / 2) / GAUSSIAN_SUM) as u8;
        }
    }
    GrayImage::new(image.width(), image.height(), pixels).expect("smoothing preserves dimensions")
}

/// Sobel gradients at an interior pixel of the smoothed image.
#[inline]
fn sobel_at(img: &GrayImage, x: u32, y: u32) -> (i32, i32) {
    let p = |dx: i32, dy: i32| -> i32 {
        img.get((x as i32 + dx) as u32, (y as i32 + dy) as u32) as i32
    };
    let gx = -p(-1, -1) + p(1, -1) - 2 * p(-1, 0) + 2 * p(1, 0) - p(-1, 1) + p(1, 1);
    let gy = -p(-1, -1) - 2 * p(0, -1) - p(1, -1) + p(-1, 1) + 2 * p(0, 1) + p(1, 1);
    (gx, gy)
}

/// Classic Canny pipeline with pinned conventions so independent
/// implementations can agree bit-for-bit:
///
/// 1. integer 5x5 Gaussian (sigma 1.4), replicate border, rounded to u8;
/// 2. 3x3 Sobel on interior pixels (border gradients are zero);
/// 3. magnitude `hypot(gx, gy)`, the raw L2 Sobel response (at most
///    `sqrt(5) * 2 * 255`, about 1442, on 8-bit input);
/// 4. non-maximum suppression along the gradient direction quantized to 4
///    bins: a pixel survives iff its magnitude is `>=` the neighbor at
///    `+d` and `>` the neighbor at `-d`, so ties thin to one pixel;
/// 5. hysteresis: pixels at or above `high` seed edges, pixels in
///    `[low, high)` are kept iff 8-connected to a seed, transitively
///    through other kept pixels.
///
/// Images smaller than 3x3 yield an empty map.
pub fn canny(image: &GrayImage, low: f64, high: f64) -> Result<EdgeMap, QualityError> {
    if low.is_nan() || high.is_nan() || low < 0.0 || high < low {
        return Err(QualityError::InvalidThresholds { low, high });
    }
    let (w, h) = (image.width(), image.height());
    let len = w as usize * h as usize;
    if w < 3 || h < 3 {
        return Ok(EdgeMap::new(w, h, vec![false; len]));
    }

    let smoothed = gaussian_smooth(image);

    let mut magnitude = vec![0f64; len];
    let mut gradient = vec![(0i32, 0i32); len];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let (gx, gy) = sobel_at(&smoothed, x, y);
            let idx = y as usize * w as usize + x as usize;
            gradient[idx] = (gx, gy);
            magnitude[idx] = (gx as f64).hypot(gy as f64);
        }
    }

    // Non-maximum suppression. The 4-bin direction (0/45/90/135 degrees in
    // 22.5-degree-centered sectors) comes from tangent comparisons instead
    // of atan2; boundary angles have irrational tangents, so integer
    // gradients can never land on a sector edge and the binning is exact.
    const TAN_22_5: f64 = std::f64::consts::SQRT_2 - 1.0;
    const TAN_67_5: f64 = std::f64::consts::SQRT_2 + 1.0;
    let mut thinned = vec![0f64; len];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let idx = y as usize * w as usize + x as usize;
            let (gx, gy) = gradient[idx];
            let (ax, ay) = (gx.unsigned_abs() as f64, gy.unsigned_abs() as f64);
            let (dx, dy) = if ay < TAN_22_5 * ax || (gx == 0 && gy == 0) {
                (1i64, 0i64)
            } else if ay > TAN_67_5 * ax {
                (0, 1)
            } else if (gx > 0) == (gy > 0) {
                (1, 1)
            } else {
                (1, -1)
            };
            let at = |xx: i64, yy: i64| magnitude[yy as usize * w as usize + xx as usize];
            let m = magnitude[idx];
            let forward = at(x as i64 + dx, y as i64 + dy);
            let backward = at(x as i64 - dx, y as i64 - dy);
            if m >= forward && m > backward {
                thinned[idx] = m;
            }
        }
    }

    // Hysteresis flood from strong seeds through weak pixels.
    let mut flags = vec![false; len];
    let mut stack = Vec::new();
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let idx = y as usize * w as usize + x as usize;
            if thinned[idx] >= high && !flags[idx] {
                flags[idx] = true;
                stack.push((x, y));
                while let Some((cx, cy)) = stack.pop() {
                    for ny in cy.saturating_sub(1)..=(cy + 1).min(h - 1) {
                        for nx in cx.saturating_sub(1)..=(cx + 1).min(w - 1) {
                            let nidx = ny as usize * w as usize + nx as usize;
                            if !flags[nidx] && thinned[nidx] >= low {
                                flags[nidx] = true;
                                stack.push((nx, ny));
                            }
                        }
                    }
                }
            }
        }
    }

    Ok(EdgeMap::new(w, h, flags))
}

/// Shannon entropy of the intensity distribution, in bits.
pub fn entropy(image: &GrayImage) -> f64 {
    let hist = compute_histogram(image);
    let n = image.pixel_count() as f64;
    let mut e = 0.0;
    for &count in hist.bins() {
        if count > 0 {
            let p = count as f64 / n;
            e -= p * p.log2();
        }
    }
    e
}

/// Arithmetic mean intensity.
pub fn mean_value(image: &GrayImage) -> f64 {
    let sum: u64 = image.pixels().iter().map(|&p| p as u64).sum();
    sum as f64 / image.pixel_count() as f64
}

/// Mean of `sqrt((gx^2 + gy^2) / 2)` over forward differences
/// `gx = I(x+1,y) - I(x,y)`, `gy = I(x,y+1) - I(x,y)`, taken wherever both
/// exist.
pub fn average_gradient(image: &GrayImage) -> Result<f64, QualityError> {
    let (w, h) = (image.width(), image.height());
    if w < 2 || h < 2 {
        return Err(QualityError::NoGradientSupport {
            width: w,
            height: h,
        });
    }
    let mut sum = 0.0;
    for y in 0..h - 1 {
        for x in 0..w - 1 {
            let here = image.get(x, y) as f64;
            let gx = image.get(x + 1, y) as f64 - here;
            let gy = image.get(x, y + 1) as f64 - here;
            sum += ((gx * gx + gy * gy) / 2.0).sqrt();
        }
    }
    Ok(sum / ((w - 1) as u64 * (h - 1) as u64) as f64)
}

/// All five statistics with a single Canny pass.
pub fn quality_report(
    image: &GrayImage,
    canny_low: f64,
    canny_high: f64,
) -> Result<QualityReport, QualityError> {
    let edges = canny(image, canny_low, canny_high)?;
    Ok(QualityReport {
        edge_count: edges.edge_count(),
        edge_density: edges.edge_density(),
        mean_value: mean_value(image),
        entropy: entropy(image),
        average_gradient: average_gradient(image)?,
    })
}
