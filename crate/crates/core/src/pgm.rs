//! Binary PGM (P5) reading and writing, the bit-exact interchange format for
//! enhanced images and golden files. 16-bit inputs are narrowed to 8 bits by
//! a right shift of 8.

use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::image::{GrayImage, ImageError};

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: not a binary PGM (expected magic P5, got {magic:?})")]
    BadMagic { path: String, magic: String },
    #[error("{path}: malformed header: {reason}")]
    BadHeader { path: String, reason: String },
    #[error("{path}: pixel data truncated (expected {expected} bytes, found {found})")]
    Truncated {
        path: String,
        expected: usize,
        found: usize,
    },
    #[error("{path}: {source}")]
    Image { path: String, source: ImageError },
}

struct HeaderScanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderScanner<'a> {
    /// Next whitespace-delimited token, skipping `#` comments.
    fn token(&mut self) -> Option<&'a [u8]> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        if self.pos >= self.bytes.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        Some(&self.bytes[start..self.pos])
    }
}

/// Decode a binary PGM from raw bytes. `path` is used only in error messages.
pub fn decode(bytes: &[u8], path: &str) -> Result<GrayImage, PgmError> {
    let path_owned = || path.to_string();
    let mut scanner = HeaderScanner { bytes, pos: 0 };

    let magic = scanner.token().unwrap_or(b"");
    if magic != b"P5" {
        return Err(PgmError::BadMagic {
            path: path_owned(),
            magic: String::from_utf8_lossy(magic).into_owned(),
        });
    }

    let mut field = |name: &str| -> Result<u64, PgmError> {
        let tok = scanner.token().ok_or_else(|| PgmError::BadHeader {
            path: path_owned(),
            reason: format!("missing {name}"),
        })?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| PgmError::BadHeader {
                path: path_owned(),
                reason: format!("{name} is not a number: {:?}", String::from_utf8_lossy(tok)),
            })
    };

    let width = field("width")?;
    let height = field("height")?;
    let maxval = field("maxval")?;
    if !(1..=65535).contains(&maxval) {
        return Err(PgmError::BadHeader {
            path: path_owned(),
            reason: format!("maxval {maxval} out of range 1..=65535"),
        });
    }
    if width > u32::MAX as u64 || height > u32::MAX as u64 {
        return Err(PgmError::BadHeader {
            path: path_owned(),
            reason: format!("dimensions {width}x{height} too large"),
        });
    }

    // Exactly one whitespace byte separates the header from the raster.
    let data_start = (scanner.pos + 1).min(bytes.len());
    let data = &bytes[data_start..];
    let count = width as usize * height as usize;
    let pixels = if maxval < 256 {
        if data.len() < count {
            return Err(PgmError::Truncated {
                path: path_owned(),
                expected: count,
                found: data.len(),
            });
        }
        data[..count].to_vec()
    } else {
        if data.len() < count * 2 {
            return Err(PgmError::Truncated {
                path: path_owned(),
                expected: count * 2,
                found: data.len(),
            });
        }
        data[..count * 2]
            .chunks_exact(2)
            .map(|pair| (u16::from_be_bytes([pair[0], pair[1]]) >> 8) as u8)
            .collect()
    };

    GrayImage::new(width as u32, height as u32, pixels).map_err(|source| PgmError::Image {
        path: path_owned(),
        source,
    })
}

pub fn read(path: &Path) -> Result<GrayImage, PgmError> {
    let bytes = fs::read(path).map_err(|source| PgmError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode(&bytes, &path.display().to_string())
}

/// Encode as binary PGM with maxval 255.
pub fn encode(image: &GrayImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(image.pixels().len() + 32);
    let _ = write!(out, "P5\n{} {}\n255\n", image.width(), image.height());
    out.extend_from_slice(image.pixels());
    out
}

pub fn write(image: &GrayImage, path: &Path) -> Result<(), PgmError> {
    fs::write(path, encode(image)).map_err(|source| PgmError::Io {
        path: path.display().to_string(),
        source,
    })
}
