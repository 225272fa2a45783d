//! Shared test support: a pinned RNG, straight-line oracle implementations
//! of every pipeline stage (kept independent of the library's code paths),
//! and synthetic chest-radiograph phantoms.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)] // oracles are deliberately written as naive index loops

use gclahe::image::{GrayImage, LEVELS};
use gclahe::metrics::Metric;

// ---------------------------------------------------------------------------
// Pinned RNG
// ---------------------------------------------------------------------------

pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    pub fn byte(&mut self) -> u8 {
        (self.next_u64() & 0xFF) as u8
    }
}

pub fn random_image(rng: &mut SplitMix64, width: u32, height: u32) -> GrayImage {
    GrayImage::from_fn(width, height, |_, _| rng.byte()).unwrap()
}

/// A random monotone non-decreasing 256-entry table.
pub fn random_monotone_lut(rng: &mut SplitMix64) -> [u8; LEVELS] {
    let mut values: Vec<u8> = (0..LEVELS).map(|_| rng.byte()).collect();
    values.sort_unstable();
    let mut table = [0u8; LEVELS];
    table.copy_from_slice(&values);
    table
}

// ---------------------------------------------------------------------------
// Histogram pipeline oracles (brute force, no shared state with the library)
// ---------------------------------------------------------------------------

/// Per-level tally: one full image scan per gray level.
pub fn oracle_histogram(image: &GrayImage) -> [u64; LEVELS] {
    let mut bins = [0u64; LEVELS];
    for (level, bin) in bins.iter_mut().enumerate() {
        *bin = image
            .pixels()
            .iter()
            .filter(|&&p| p as usize == level)
            .count() as u64;
    }
    bins
}

/// O(L^2) prefix sums.
pub fn oracle_cdf(bins: &[u64; LEVELS]) -> [u64; LEVELS] {
    let mut values = [0u64; LEVELS];
    for i in 0..LEVELS {
        for j in 0..=i {
            values[i] += bins[j];
        }
    }
    values
}

pub fn oracle_ncdf(cdf: &[u64; LEVELS], n: u64) -> [f64; LEVELS] {
    let mut values = [0f64; LEVELS];
    for i in 0..LEVELS {
        values[i] = cdf[i] as f64 / n as f64;
    }
    values
}

pub fn oracle_lut(ncdf: &[f64; LEVELS]) -> [u8; LEVELS] {
    let mut table = [0u8; LEVELS];
    for i in 0..LEVELS {
        table[i] = (ncdf[i] * 255.0).round() as u8;
    }
    table
}

pub fn oracle_apply(image: &GrayImage, table: &[u8; LEVELS]) -> GrayImage {
    let mut pixels = vec![0u8; image.pixels().len()];
    for y in 0..image.height() {
        for x in 0..image.width() {
            pixels[y as usize * image.width() as usize + x as usize] =
                table[image.get(x, y) as usize];
        }
    }
    GrayImage::new(image.width(), image.height(), pixels).unwrap()
}

pub fn oracle_ghe(image: &GrayImage) -> GrayImage {
    let bins = oracle_histogram(image);
    let cdf = oracle_cdf(&bins);
    let ncdf = oracle_ncdf(&cdf, image.pixel_count());
    oracle_apply(image, &oracle_lut(&ncdf))
}

// ---------------------------------------------------------------------------
// CLAHE oracles
// ---------------------------------------------------------------------------

/// Clip-and-redistribute re-implemented: explicit excess scan, flat share via
/// a separate pass, remainder by index.
pub fn oracle_clip(bins: &[u64], limit: u64) -> Vec<u64> {
    let mut excess = 0u64;
    let mut out: Vec<u64> = bins.to_vec();
    for v in out.iter_mut() {
        if *v > limit {
            excess += *v - limit;
            *v = limit;
        }
    }
    let n = out.len() as u64;
    let share = excess / n;
    let remainder = (excess % n) as usize;
    for v in out.iter_mut() {
        *v += share;
    }
    for (i, v) in out.iter_mut().enumerate() {
        if i < remainder {
            *v += 1;
        }
    }
    out
}

fn tile_bounds(extent: u32, ts: u32, t: u32) -> (u32, u32) {
    let lo = (t as u64 * extent as u64 / ts as u64) as u32;
    let hi = ((t as u64 + 1) * extent as u64 / ts as u64) as u32;
    (lo, hi)
}

/// Full equalization table of one tile, recomputed from scratch.
fn oracle_tile_lut(
    image: &GrayImage,
    ts: u32,
    tx: u32,
    ty: u32,
    clip_factor: Option<f64>,
) -> [u8; LEVELS] {
    let (x0, x1) = tile_bounds(image.width(), ts, tx);
    let (y0, y1) = tile_bounds(image.height(), ts, ty);
    let mut bins = vec![0u64; LEVELS];
    for y in y0..y1 {
        for x in x0..x1 {
            bins[image.get(x, y) as usize] += 1;
        }
    }
    let tile_pixels = (x1 - x0) as u64 * (y1 - y0) as u64;
    if let Some(f) = clip_factor {
        let limit = ((f * tile_pixels as f64 / 256.0).round() as u64).max(1);
        bins = oracle_clip(&bins, limit);
    }
    let mut table = [0u8; LEVELS];
    let mut running = 0u64;
    for i in 0..LEVELS {
        running += bins[i];
        table[i] = (running as f64 / tile_pixels as f64 * 255.0).round() as u8;
    }
    table
}

fn oracle_center(extent: u32, ts: u32, t: u32) -> f64 {
    let (lo, hi) = tile_bounds(extent, ts, t);
    (lo as f64 + hi as f64 - 1.0) / 2.0
}

fn oracle_axis(p: f64, extent: u32, ts: u32) -> (u32, u32, f64) {
    let first = oracle_center(extent, ts, 0);
    let last = oracle_center(extent, ts, ts - 1);
    if p <= first {
        return (0, 0, 0.0);
    }
    if p >= last {
        return (ts - 1, ts - 1, 0.0);
    }
    let mut k = 0;
    while oracle_center(extent, ts, k + 1) < p {
        k += 1;
    }
    let c0 = oracle_center(extent, ts, k);
    let c1 = oracle_center(extent, ts, k + 1);
    (k, k + 1, (p - c0) / (c1 - c0))
}

/// Straight-line CLAHE: every pixel rebuilds the four surrounding tile
/// tables from scratch, with no caching anywhere.
pub fn oracle_clahe(image: &GrayImage, ts: u32, clip_factor: Option<f64>) -> GrayImage {
    let mut pixels = vec![0u8; image.pixels().len()];
    for y in 0..image.height() {
        for x in 0..image.width() {
            let (tx0, tx1, wx) = oracle_axis(x as f64, image.width(), ts);
            let (ty0, ty1, wy) = oracle_axis(y as f64, image.height(), ts);
            let v = image.get(x, y) as usize;
            let tl = oracle_tile_lut(image, ts, tx0, ty0, clip_factor)[v] as f64;
            let tr = oracle_tile_lut(image, ts, tx1, ty0, clip_factor)[v] as f64;
            let bl = oracle_tile_lut(image, ts, tx0, ty1, clip_factor)[v] as f64;
            let br = oracle_tile_lut(image, ts, tx1, ty1, clip_factor)[v] as f64;
            let top = (1.0 - wx) * tl + wx * tr;
            let bot = (1.0 - wx) * bl + wx * br;
            let blended = (1.0 - wy) * top + wy * bot;
            pixels[y as usize * image.width() as usize + x as usize] = blended.round() as u8;
        }
    }
    GrayImage::new(image.width(), image.height(), pixels).unwrap()
}

// ---------------------------------------------------------------------------
// Metric oracles
// ---------------------------------------------------------------------------

pub fn oracle_mse(a: &GrayImage, b: &GrayImage) -> f64 {
    let mut sum = 0.0;
    for (&x, &y) in a.pixels().iter().zip(b.pixels()) {
        let d = x as f64 - y as f64;
        sum += d * d;
    }
    sum / a.pixel_count() as f64
}

pub fn oracle_mae(a: &GrayImage, b: &GrayImage) -> f64 {
    let mut sum = 0.0;
    for (&x, &y) in a.pixels().iter().zip(b.pixels()) {
        sum += (x as f64 - y as f64).abs();
    }
    sum / a.pixel_count() as f64
}

pub fn oracle_psnr(a: &GrayImage, b: &GrayImage) -> f64 {
    let e = oracle_mse(a, b);
    if e == 0.0 {
        100.0
    } else {
        10.0 * (255.0 * 255.0 / e).log10()
    }
}

pub fn oracle_sci(reference: &GrayImage, test: &GrayImage) -> f64 {
    let mut num = 0.0;
    for &p in reference.pixels() {
        num += p as f64 * p as f64;
    }
    let mut den = 0.0;
    for &p in test.pixels() {
        den += p as f64 * p as f64;
    }
    num / den
}

/// Direct-convolution SSIM: naive window sums, same pinned formula
/// (8x8 windows, stride 1, uniform weights, population moments,
/// C1 = (0.01*255)^2, C2 = (0.03*255)^2).
pub fn oracle_ssim(a: &GrayImage, b: &GrayImage) -> f64 {
    let c1 = (0.01f64 * 255.0) * (0.01 * 255.0);
    let c2 = (0.03f64 * 255.0) * (0.03 * 255.0);
    let (w, h) = (a.width() as usize, a.height() as usize);
    let win = 8usize;

    let window_value = |x0: usize, y0: usize, ww: usize, wh: usize| -> f64 {
        let mut sa = 0u64;
        let mut sb = 0u64;
        let mut saa = 0u64;
        let mut sbb = 0u64;
        let mut sab = 0u64;
        for y in y0..y0 + wh {
            for x in x0..x0 + ww {
                let va = a.get(x as u32, y as u32) as u64;
                let vb = b.get(x as u32, y as u32) as u64;
                sa += va;
                sb += vb;
                saa += va * va;
                sbb += vb * vb;
                sab += va * vb;
            }
        }
        let n = (ww * wh) as f64;
        let mu_a = sa as f64 / n;
        let mu_b = sb as f64 / n;
        let var_a = saa as f64 / n - mu_a * mu_a;
        let var_b = sbb as f64 / n - mu_b * mu_b;
        let cov = sab as f64 / n - mu_a * mu_b;
        let num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
        let den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
        num / den
    };

    if w < win || h < win {
        return window_value(0, 0, w, h);
    }
    let mut total = 0.0;
    let mut count = 0u64;
    for y in 0..=(h - win) {
        for x in 0..=(w - win) {
            total += window_value(x, y, win, win);
            count += 1;
        }
    }
    total / count as f64
}

pub fn oracle_score(metric: Metric, reference: &GrayImage, candidate: &GrayImage) -> f64 {
    match metric {
        Metric::Ssim => oracle_ssim(reference, candidate),
        Metric::Psnr => oracle_psnr(reference, candidate),
        Metric::Mse => -oracle_mse(reference, candidate),
        Metric::Rmse => -oracle_mse(reference, candidate).sqrt(),
        Metric::Mae => -oracle_mae(reference, candidate),
        Metric::Sci => -(1.0 - oracle_sci(reference, candidate)).abs(),
    }
}

// ---------------------------------------------------------------------------
// Search-loop oracle
// ---------------------------------------------------------------------------

/// Straight-line transcription of the iterative search, driven entirely by
/// the oracle implementations above.
pub fn oracle_search_loop(
    image: &GrayImage,
    ts: u32,
    initial_clip: u32,
    metric: Metric,
) -> (GrayImage, u32) {
    let mut enhanced = image.clone();
    let mut prev = oracle_score(metric, &oracle_ghe(&enhanced), &enhanced);
    let mut clip = initial_clip;
    let mut iteration = 0u64;
    while iteration < ts as u64 * ts as u64 - 1 {
        let reference = oracle_ghe(&enhanced);
        let candidate = oracle_clahe(&enhanced, ts, Some(clip as f64));
        let score = oracle_score(metric, &reference, &candidate);
        if score > prev {
            prev = score;
            enhanced = candidate;
            clip += 1;
        } else {
            return (enhanced, clip - 1);
        }
        iteration += 1;
    }
    (enhanced, clip - 1)
}

// ---------------------------------------------------------------------------
// Canny oracle
// ---------------------------------------------------------------------------

/// Independent straight-line Canny with the pinned conventions: integer 5x5
/// sigma-1.4 Gaussian (replicate border, nearest rounding), interior-only
/// Sobel, raw hypot magnitude, 4-bin non-maximum suppression with the
/// `>= forward / > backward` tie-break, and fixpoint-sweep hysteresis.
pub fn oracle_canny(image: &GrayImage, low: f64, high: f64) -> Vec<bool> {
    let (w, h) = (image.width() as i64, image.height() as i64);
    let len = (w * h) as usize;
    if w < 3 || h < 3 {
        return vec![false; len];
    }

    let kernel: [[u32; 5]; 5] = [
        [2, 4, 5, 4, 2],
        [4, 9, 12, 9, 4],
        [5, 12, 15, 12, 5],
        [4, 9, 12, 9, 4],
        [2, 4, 5, 4, 2],
    ];
    let pixel = |x: i64, y: i64| -> u32 {
        image.get(x.clamp(0, w - 1) as u32, y.clamp(0, h - 1) as u32) as u32
    };
    let mut smoothed = vec![0u8; len];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0u32;
            for (ky, row) in kernel.iter().enumerate() {
                for (kx, &weight) in row.iter().enumerate() {
                    acc += weight * pixel(x + kx as i64 - 2, y + ky as i64 - 2);
                }
            }
            smoothed[(y * w + x) as usize] = ((acc + 79) / 159) as u8;
        }
    }

    let sm = |x: i64, y: i64| smoothed[(y * w + x) as usize] as i32;
    let mut mag = vec![0f64; len];
    let mut dirs = vec![(0i64, 0i64); len];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let gx = sm(x + 1, y - 1) + 2 * sm(x + 1, y) + sm(x + 1, y + 1)
                - sm(x - 1, y - 1)
                - 2 * sm(x - 1, y)
                - sm(x - 1, y + 1);
            let gy = sm(x - 1, y + 1) + 2 * sm(x, y + 1) + sm(x + 1, y + 1)
                - sm(x - 1, y - 1)
                - 2 * sm(x, y - 1)
                - sm(x + 1, y - 1);
            mag[(y * w + x) as usize] = (gx as f64).hypot(gy as f64);
            let mut angle = (gy as f64).atan2(gx as f64).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            dirs[(y * w + x) as usize] = if !(22.5..157.5).contains(&angle) {
                (1, 0)
            } else if angle < 67.5 {
                (1, 1)
            } else if angle < 112.5 {
                (0, 1)
            } else {
                (1, -1)
            };
        }
    }

    let mut thinned = vec![0f64; len];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let idx = (y * w + x) as usize;
            let (dx, dy) = dirs[idx];
            let m = mag[idx];
            let forward = mag[((y + dy) * w + (x + dx)) as usize];
            let backward = mag[((y - dy) * w + (x - dx)) as usize];
            if m >= forward && m > backward {
                thinned[idx] = m;
            }
        }
    }

    // Hysteresis by sweeping to a fixpoint instead of an explicit flood.
    let mut flags = vec![false; len];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            if thinned[(y * w + x) as usize] >= high {
                flags[(y * w + x) as usize] = true;
            }
        }
    }
    loop {
        let mut changed = false;
        for y in 0..h {
            for x in 0..w {
                let idx = (y * w + x) as usize;
                if flags[idx] || thinned[idx] < low {
                    continue;
                }
                'neighbors: for dy in -1..=1i64 {
                    for dx in -1..=1i64 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let (nx, ny) = (x + dx, y + dy);
                        if nx >= 0 && nx < w && ny >= 0 && ny < h && flags[(ny * w + nx) as usize] {
                            flags[idx] = true;
                            changed = true;
                            break 'neighbors;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    flags
}

// ---------------------------------------------------------------------------
// Chest-radiograph phantoms
// ---------------------------------------------------------------------------

/// A deterministic low-contrast chest-radiograph phantom.
///
/// Broad smooth intensity gradients keep the global histogram wide (so
/// global equalization stays gentle, as on real radiographs), while fine
/// vascular/grain texture rides on top for local enhancement to latch onto.
/// The overall mean is pinned near 122, the regime of exposure-controlled
/// chest X-rays.
pub fn chest_phantom(seed: u64) -> GrayImage {
    let (w, h) = (224u32, 224u32);
    let mut rng = SplitMix64(seed.wrapping_mul(0x9E37_79B9).wrapping_add(17));
    // Per-phantom anatomical jitter.
    let torso_rx = 92.0 + rng.below(9) as f64;
    let torso_ry = 102.0 + rng.below(9) as f64;
    let lung_dx = 44.0 + rng.below(6) as f64;
    let lung_rx = 28.0 + rng.below(6) as f64;
    let lung_ry = 46.0 + rng.below(7) as f64;
    let rib_spacing = 21.0 + rng.below(5) as f64;
    let rib_phase = rng.below(20) as f64;
    let tex_fx = 0.73 + rng.below(40) as f64 / 100.0;
    let tex_fy = 0.57 + rng.below(40) as f64 / 100.0;
    let tex_phase = rng.below(628) as f64 / 100.0;
    // A few lung vessels: root x offset, slope, curvature per vessel.
    let vessels: Vec<(f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.below(36) as f64 - 18.0,
                rng.below(140) as f64 / 100.0 - 0.7,
                rng.below(16) as f64 / 1000.0 - 0.008,
            )
        })
        .collect();
    let device_y = 28.0 + rng.below(30) as f64;
    let noise_seed = rng.next_u64();

    let raw = |fx: f64, fy: f64, noise: &mut SplitMix64| -> f64 {
        let cx = 112.0;
        let cy = 116.0;
        let inside = |ex: f64, ey: f64, rx: f64, ry: f64| -> f64 {
            let dx = (fx - ex) / rx;
            let dy = (fy - ey) / ry;
            dx * dx + dy * dy
        };

        let torso = inside(cx, cy, torso_rx, torso_ry);
        // Unexposed background sweeping dark to mid.
        let mut v: f64 = 22.0 + 34.0 * (fy / 224.0);
        if torso <= 1.0 {
            // Soft tissue on a strong vertical exposure gradient.
            v = 112.0 + 40.0 * (fy - cy) / torso_ry;
            let left = inside(cx - lung_dx, cy - 10.0, lung_rx, lung_ry);
            let right = inside(cx + lung_dx, cy - 10.0, lung_rx, lung_ry);
            if left <= 1.0 || right <= 1.0 {
                let d = left.min(right);
                // Lung field: darker periphery, brighter hilum.
                v = 72.0 - 24.0 * d + 20.0 * (fy - cy) / lung_ry;
                // Rib arcs with a soft triangular profile.
                let arc = fy + 0.0024 * (fx - cx) * (fx - cx);
                let band = ((arc + rib_phase) / rib_spacing).fract();
                let profile = 1.0 - (band - 0.5).abs() * 4.0;
                if profile > 0.0 {
                    v += 18.0 * profile;
                }
                // Vessels branching down from the hilum.
                let side = if fx < cx { -1.0 } else { 1.0 };
                let hilum_x = cx + side * lung_dx * 0.6;
                let dy = fy - (cy - 20.0);
                for &(x0, slope, curv) in &vessels {
                    let dx = fx - (hilum_x + x0 * 0.3 + side * (slope * dy + curv * dy * dy));
                    v += 24.0 * (-dx * dx / 4.0).exp();
                }
            } else if (fx - cx).abs() < 11.0 {
                v = 156.0 + 9.0 * ((fy - cy) * 0.45).sin(); // spine, vertebrae
            } else if (fx - cx).abs() < lung_dx - lung_rx + 4.0 {
                v = 132.0 + 16.0 * (fy - cy) / torso_ry; // mediastinum
            }
            if fy > cy + 62.0 {
                v += 22.0; // diaphragm / upper abdomen
            }
            // Fine texture: trabecular pattern / film grain.
            let t = 9.0 * (tex_fx * fx + tex_phase).sin() * (tex_fy * fy - tex_phase).sin()
                + 8.0 * (0.31 * fx + 0.53 * fy + tex_phase).sin();
            v += t;
        }

        // A metallic electrode: the one genuinely high-contrast feature.
        let ex = cx - lung_dx - 4.0;
        let er = (fx - ex) * (fx - ex) + (fy - (cy - device_y)) * (fy - (cy - device_y));
        if er <= 36.0 {
            v = 215.0;
        }

        // Corner vignette.
        let r2 = ((fx - cx) / 160.0).powi(2) + ((fy - cy) / 160.0).powi(2);
        v -= 18.0 * r2;

        // Triangular sensor noise in [-4, 4].
        v + noise.below(5) as f64 - noise.below(5) as f64
    };

    // Pin the mean to the exposure-controlled regime before quantizing.
    let squeeze = 0.64;
    let mut noise = SplitMix64(noise_seed);
    let mut sum = 0.0;
    for y in 0..h {
        for x in 0..w {
            sum += raw(x as f64, y as f64, &mut noise) * squeeze;
        }
    }
    let shift = 122.0 - sum / (w as f64 * h as f64);

    let mut noise = SplitMix64(noise_seed);
    GrayImage::from_fn(w, h, |x, y| {
        let squeezed = raw(x as f64, y as f64, &mut noise) * squeeze + shift;
        squeezed.round().clamp(0.0, 255.0) as u8
    })
    .unwrap()
}

/// The standard phantom set used by the trend suites.
pub fn phantom_set() -> Vec<GrayImage> {
    (1..=6).map(chest_phantom).collect()
}

/// Use real X-rays from `GCLAHE_XRAY_DIR` when provided, else the phantoms.
pub fn xray_set() -> Vec<GrayImage> {
    if let Ok(dir) = std::env::var("GCLAHE_XRAY_DIR") {
        let mut paths: Vec<_> = std::fs::read_dir(&dir)
            .map(|entries| {
                entries
                    .filter_map(|e| e.ok())
                    .map(|e| e.path())
                    .filter(|p| {
                        p.extension()
                            .map(|e| {
                                let e = e.to_string_lossy().to_ascii_lowercase();
                                e == "pgm" || e == "png"
                            })
                            .unwrap_or(false)
                    })
                    .collect()
            })
            .unwrap_or_default();
        paths.sort();
        let images: Vec<GrayImage> = paths
            .iter()
            .filter_map(|p| gclahe::bench::ingest(p).ok())
            .collect();
        if images.len() >= 5 {
            return images;
        }
    }
    phantom_set()
}
