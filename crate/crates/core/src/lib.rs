//! Grayscale contrast enhancement built around histogram equalization.
//!
//! Three enhancement algorithms share one 8-bit raster type:
//!
//! - [`ghe::equalize`] — global histogram equalization;
//! - [`clahe::enhance`] — contrast-limited adaptive histogram equalization
//!   over a tile grid with bilinear blending;
//! - [`search::run`] — an iterative clip-factor search that keeps enhancing
//!   locally while the result grows more similar to its own globally
//!   equalized image, stopping at the first similarity drop.
//!
//! [`metrics`] provides the six similarity measures driving the search,
//! [`quality`] the evaluation statistics (Canny edge counts, entropy, mean,
//! average gradient), and [`mod@bench`] a batch harness with CSV reports behind
//! the `gclahe` command-line tool.

pub mod bench;
pub mod clahe;
pub mod ghe;
pub mod image;
pub mod metrics;
pub mod pgm;
pub mod quality;
pub mod search;

pub use image::GrayImage;
pub use metrics::Metric;
