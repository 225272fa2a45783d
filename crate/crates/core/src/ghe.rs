//! Global histogram equalization: one intensity remapping table derived from
//! the whole image's normalized CDF, applied uniformly.

use crate::image::{
    compute_cdf, compute_histogram, normalize_cdf, GrayImage, NormalizedCdf, LEVELS,
};

/// A 256-entry intensity remapping table.
///
/// Tables built from a normalized CDF are monotone non-decreasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingLut {
    table: [u8; LEVELS],
}

impl MappingLut {
    pub fn from_table(table: [u8; LEVELS]) -> Self {
        Self { table }
    }

    /// The identity remapping.
    pub fn identity() -> Self {
        let mut table = [0u8; LEVELS];
        for (i, t) in table.iter_mut().enumerate() {
            *t = i as u8;
        }
        Self { table }
    }

    pub fn table(&self) -> &[u8; LEVELS] {
        &self.table
    }

    #[inline]
    pub fn map(&self, value: u8) -> u8 {
        self.table[value as usize]
    }
}

/// Scale a normalized CDF to output intensities: `table[i] = round(ncdf[i] * 255)`,
/// rounding halves away from zero.
pub fn build_equalization_lut(ncdf: &NormalizedCdf) -> MappingLut {
    let mut table = [0u8; LEVELS];
    for (i, &v) in ncdf.values().iter().enumerate() {
        table[i] = (v * 255.0).round() as u8;
    }
    MappingLut { table }
}

/// Remap every pixel through the table. Dimensions are preserved.
pub fn apply_lut(image: &GrayImage, lut: &MappingLut) -> GrayImage {
    let pixels = image.pixels().iter().map(|&p| lut.map(p)).collect();
    GrayImage::new(image.width(), image.height(), pixels).expect("remapping preserves dimensions")
}

/// The table an image's own histogram induces.
pub fn equalization_lut(image: &GrayImage) -> MappingLut {
    let hist = compute_histogram(image);
    let cdf = compute_cdf(&hist);
    let ncdf = normalize_cdf(&cdf, image.pixel_count());
    build_equalization_lut(&ncdf)
}

/// Global histogram equalization of an image.
pub fn equalize(image: &GrayImage) -> GrayImage {
    apply_lut(image, &equalization_lut(image))
}
