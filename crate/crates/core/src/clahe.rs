//! Tile-based adaptive equalization with contrast limiting: per-tile
//! histograms are clipped and redistributed, equalized independently, and the
//! per-tile mappings are blended bilinearly to suppress tile-border seams.

use thiserror::Error;

use crate::ghe::{build_equalization_lut, MappingLut};
use crate::image::{compute_cdf, normalize_cdf, GrayImage, Histogram, LEVELS};

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("tile grid {ts} out of range: need 1 <= ts <= min(width, height) = {max}")]
    GridOutOfRange { ts: u32, max: u32 },
    #[error("clip factor {clip} must be at least 1")]
    ClipFactorTooSmall { clip: f64 },
}

/// Contrast limit: a finite multiplier of the average per-tile bin height, or
/// no limit at all (plain adaptive equalization).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClipLimit {
    Unlimited,
    Factor(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaheParams {
    /// Tiles per axis; the image is split into `grid_size x grid_size` tiles.
    pub grid_size: u32,
    pub clip: ClipLimit,
}

impl ClaheParams {
    pub fn new(grid_size: u32, clip: ClipLimit) -> Self {
        Self { grid_size, clip }
    }

    pub fn validate(&self, image: &GrayImage) -> Result<(), ParamError> {
        let max = image.width().min(image.height());
        if self.grid_size < 1 || self.grid_size > max {
            return Err(ParamError::GridOutOfRange {
                ts: self.grid_size,
                max,
            });
        }
        if let ClipLimit::Factor(f) = self.clip {
            if f < 1.0 || f.is_nan() {
                return Err(ParamError::ClipFactorTooSmall { clip: f });
            }
        }
        Ok(())
    }
}

/// A balanced partition of an image into `ts x ts` tiles.
///
/// Tile `(tx, ty)` spans columns `[x_bounds[tx], x_bounds[tx+1])` and the
/// analogous rows; widths along an axis differ by at most one pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct TileGrid {
    ts: u32,
    x_bounds: Vec<u32>,
    y_bounds: Vec<u32>,
    centers_x: Vec<f64>,
    centers_y: Vec<f64>,
}

impl TileGrid {
    pub fn ts(&self) -> u32 {
        self.ts
    }

    pub fn x_bounds(&self) -> &[u32] {
        &self.x_bounds
    }

    pub fn y_bounds(&self) -> &[u32] {
        &self.y_bounds
    }

    /// Tile-center x coordinates in pixel space.
    pub fn centers_x(&self) -> &[f64] {
        &self.centers_x
    }

    pub fn centers_y(&self) -> &[f64] {
        &self.centers_y
    }

    pub fn tile_span(&self, tx: u32, ty: u32) -> (u32, u32, u32, u32) {
        (
            self.x_bounds[tx as usize],
            self.x_bounds[tx as usize + 1],
            self.y_bounds[ty as usize],
            self.y_bounds[ty as usize + 1],
        )
    }
}

/// A grid together with one equalization table per tile (row-major by tile).
#[derive(Debug, Clone, PartialEq)]
pub struct TileMapping {
    grid: TileGrid,
    luts: Vec<MappingLut>,
}

impl TileMapping {
    pub fn grid(&self) -> &TileGrid {
        &self.grid
    }

    pub fn luts(&self) -> &[MappingLut] {
        &self.luts
    }

    pub fn lut(&self, tx: u32, ty: u32) -> &MappingLut {
        &self.luts[ty as usize * self.grid.ts as usize + tx as usize]
    }
}

fn bounds(extent: u32, ts: u32) -> Vec<u32> {
    (0..=ts as u64)
        .map(|t| (t * extent as u64 / ts as u64) as u32)
        .collect()
}

fn centers(bounds: &[u32]) -> Vec<f64> {
    bounds
        .windows(2)
        .map(|w| (w[0] as f64 + w[1] as f64 - 1.0) / 2.0)
        .collect()
}

/// Split an image into a balanced `ts x ts` tile grid.
pub fn partition(image: &GrayImage, ts: u32) -> Result<TileGrid, ParamError> {
    let max = image.width().min(image.height());
    if ts < 1 || ts > max {
        return Err(ParamError::GridOutOfRange { ts, max });
    }
    let x_bounds = bounds(image.width(), ts);
    let y_bounds = bounds(image.height(), ts);
    let centers_x = centers(&x_bounds);
    let centers_y = centers(&y_bounds);
    Ok(TileGrid {
        ts,
        x_bounds,
        y_bounds,
        centers_x,
        centers_y,
    })
}

/// Clip bins to `limit` and redistribute the excess: an equal share to every
/// bin, then the remainder one unit each to the lowest-indexed bins. Total
/// mass is preserved exactly; after the pass no bin exceeds
/// `limit + ceil(excess / bins.len())`.
pub(crate) fn clip_bins(bins: &mut [u64], limit: u64) {
    assert!(limit >= 1, "clip limit must be at least 1");
    let mut excess = 0u64;
    for b in bins.iter_mut() {
        if *b > limit {
            excess += *b - limit;
            *b = limit;
        }
    }
    if excess == 0 {
        return;
    }
    let n = bins.len() as u64;
    let share = excess / n;
    let rem = (excess % n) as usize;
    if share > 0 {
        for b in bins.iter_mut() {
            *b += share;
        }
    }
    for b in bins.iter_mut().take(rem) {
        *b += 1;
    }
}

/// Clip a 256-bin histogram at `clip_limit` and redistribute the excess.
pub fn clip_histogram(hist: &Histogram, clip_limit: u64) -> Histogram {
    let mut out = hist.clone();
    clip_bins(out.bins_mut(), clip_limit);
    out
}

/// Integer clip limit for one tile: `max(1, round(factor * tile_pixels / 256))`.
pub fn tile_clip_limit(factor: f64, tile_pixels: u64) -> u64 {
    let raw = (factor * tile_pixels as f64 / LEVELS as f64).round();
    (raw as u64).max(1)
}

/// Equalization table for each tile: histogram, optional clip, CDF,
/// normalization, scaling — independently per tile.
pub fn build_tile_luts(image: &GrayImage, grid: &TileGrid, clip: ClipLimit) -> TileMapping {
    let ts = grid.ts as usize;
    let mut luts = Vec::with_capacity(ts * ts);
    for ty in 0..grid.ts {
        for tx in 0..grid.ts {
            let (x0, x1, y0, y1) = grid.tile_span(tx, ty);
            let mut bins = [0u64; LEVELS];
            for y in y0..y1 {
                for x in x0..x1 {
                    bins[image.get(x, y) as usize] += 1;
                }
            }
            let tile_pixels = (x1 - x0) as u64 * (y1 - y0) as u64;
            if let ClipLimit::Factor(f) = clip {
                clip_bins(&mut bins, tile_clip_limit(f, tile_pixels));
            }
            let hist = Histogram::from_bins(bins);
            let ncdf = normalize_cdf(&compute_cdf(&hist), tile_pixels);
            luts.push(build_equalization_lut(&ncdf));
        }
    }
    TileMapping {
        grid: grid.clone(),
        luts,
    }
}

/// For coordinate `p`, the two neighboring tile indices along one axis and
/// the interpolation weight toward the second one. Outside the outer ring of
/// centers both indices collapse to the nearest edge tile (weight 0).
fn axis_weights(p: f64, centers: &[f64]) -> (usize, usize, f64) {
    let last = centers.len() - 1;
    if p <= centers[0] {
        return (0, 0, 0.0);
    }
    if p >= centers[last] {
        return (last, last, 0.0);
    }
    let mut k = 0;
    while centers[k + 1] < p {
        k += 1;
    }
    let w = (p - centers[k]) / (centers[k + 1] - centers[k]);
    (k, k + 1, w)
}

/// Remap every pixel through a bilinear blend of the four tile mappings
/// whose centers surround it, rounding once at the end (halves away from
/// zero). Pixels beyond the outer centers interpolate linearly along edges
/// and take the corner tile's mapping verbatim in corners.
pub fn bilinear_blend(image: &GrayImage, mapping: &TileMapping) -> GrayImage {
    let grid = mapping.grid();
    let mut pixels = Vec::with_capacity(image.pixels().len());
    for y in 0..image.height() {
        let (ty0, ty1, wy) = axis_weights(y as f64, grid.centers_y());
        for x in 0..image.width() {
            let (tx0, tx1, wx) = axis_weights(x as f64, grid.centers_x());
            let v = image.get(x, y);
            let top_left = mapping.lut(tx0 as u32, ty0 as u32).map(v) as f64;
            let top_right = mapping.lut(tx1 as u32, ty0 as u32).map(v) as f64;
            let bot_left = mapping.lut(tx0 as u32, ty1 as u32).map(v) as f64;
            let bot_right = mapping.lut(tx1 as u32, ty1 as u32).map(v) as f64;
            let top = (1.0 - wx) * top_left + wx * top_right;
            let bot = (1.0 - wx) * bot_left + wx * bot_right;
            let blended = (1.0 - wy) * top + wy * bot;
            pixels.push(blended.round() as u8);
        }
    }
    GrayImage::new(image.width(), image.height(), pixels).expect("blend preserves dimensions")
}

/// Contrast-limited adaptive histogram equalization.
pub fn enhance(image: &GrayImage, params: &ClaheParams) -> Result<GrayImage, ParamError> {
    params.validate(image)?;
    let grid = partition(image, params.grid_size)?;
    let mapping = build_tile_luts(image, &grid, params.clip);
    Ok(bilinear_blend(image, &mapping))
}
