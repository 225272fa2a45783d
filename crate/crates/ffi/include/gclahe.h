#ifndef GCLAHE_H
#define GCLAHE_H

/* Generated by cbindgen from the gclahe-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible entry point.
typedef enum GclaheStatus {
  GCLAHE_STATUS_OK = 0,
  // A required pointer argument was null.
  GCLAHE_STATUS_NULL_POINTER = 1,
  // A parameter was out of range (tile grid, clip factor, thresholds,
  // buffer sizes, image dimensions).
  GCLAHE_STATUS_INVALID_ARGUMENT = 2,
  // The two images have different dimensions.
  GCLAHE_STATUS_DIMENSION_MISMATCH = 3,
  // Reading or writing a file failed.
  GCLAHE_STATUS_IO_ERROR = 4,
  // The metric is undefined for this input (all-zero test image).
  GCLAHE_STATUS_METRIC_UNDEFINED = 5,
} GclaheStatus;

// Similarity metric selector.
typedef enum GclaheMetric {
  GCLAHE_METRIC_SSIM = 0,
  GCLAHE_METRIC_PSNR = 1,
  GCLAHE_METRIC_MSE = 2,
  GCLAHE_METRIC_SCI = 3,
  GCLAHE_METRIC_RMSE = 4,
  GCLAHE_METRIC_MAE = 5,
} GclaheMetric;

// Opaque 8-bit grayscale image.
typedef struct GclaheImage GclaheImage;

// Quality statistics of one image.
typedef struct GclaheQualityReport {
  uint64_t edge_count;
  double edge_density;
  double mean_value;
  double entropy;
  double average_gradient;
} GclaheQualityReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create an image from `width * height` row-major pixels.
//
// # Safety
// `pixels` must point to at least `pixels_len` readable bytes and `out`
// must be a valid pointer to a `GclaheImage*`.
enum GclaheStatus gclahe_image_create(uint32_t width,
                                      uint32_t height,
                                      const uint8_t *pixels,
                                      size_t pixels_len,
                                      struct GclaheImage **out);

// Release an image previously returned by this library. Null is a no-op.
//
// # Safety
// `image` must be null or a pointer obtained from this library that has
// not been freed yet.
void gclahe_image_free(struct GclaheImage *image);

// Width in pixels, or 0 when `image` is null.
//
// # Safety
// `image` must be null or a live image handle.
uint32_t gclahe_image_width(const struct GclaheImage *image);

// Height in pixels, or 0 when `image` is null.
//
// # Safety
// `image` must be null or a live image handle.
uint32_t gclahe_image_height(const struct GclaheImage *image);

// Copy the row-major pixels into `buffer` (at least `width * height`
// bytes).
//
// # Safety
// `image` must be a live handle and `buffer` writable for `buffer_len`
// bytes.
enum GclaheStatus gclahe_image_pixels(const struct GclaheImage *image,
                                      uint8_t *buffer,
                                      size_t buffer_len);

// Load a binary PGM (P5) file; 16-bit samples are narrowed by a right
// shift of 8.
//
// # Safety
// `path` must be a valid NUL-terminated string and `out` a valid pointer.
enum GclaheStatus gclahe_image_read_pgm(const char *path, struct GclaheImage **out);

// Write the image as a binary PGM (P5) file.
//
// # Safety
// `image` must be a live handle and `path` a valid NUL-terminated string.
enum GclaheStatus gclahe_image_write_pgm(const struct GclaheImage *image, const char *path);

// Global histogram equalization.
//
// # Safety
// `image` must be a live handle and `out` a valid pointer.
enum GclaheStatus gclahe_ghe(const struct GclaheImage *image, struct GclaheImage **out);

// Contrast-limited adaptive histogram equalization over a
// `grid_size x grid_size` tile grid. A `clip_factor` of 0 or below disables
// clipping (plain adaptive equalization); finite factors must be >= 1.
//
// # Safety
// `image` must be a live handle and `out` a valid pointer.
enum GclaheStatus gclahe_clahe(const struct GclaheImage *image,
                               uint32_t grid_size,
                               double clip_factor,
                               struct GclaheImage **out);

// Iterative clip-factor search: repeated CLAHE at a growing clip factor,
// accepted while the result grows more similar to its own globally
// equalized image. Writes the enhanced image, the chosen clip factor, and
// the final similarity score.
//
// # Safety
// `image` must be a live handle; `out`, `chosen_clip_factor`, and
// `final_score` must be valid pointers.
enum GclaheStatus gclahe_enhance(const struct GclaheImage *image,
                                 uint32_t grid_size,
                                 uint32_t initial_clip_factor,
                                 enum GclaheMetric metric,
                                 struct GclaheImage **out,
                                 uint32_t *chosen_clip_factor,
                                 double *final_score);

// Oriented similarity of `candidate` to `reference` (greater means more
// similar; dissimilarity metrics are negated).
//
// # Safety
// `reference` and `candidate` must be live handles and `score` a valid
// pointer.
enum GclaheStatus gclahe_similarity(enum GclaheMetric metric,
                                    const struct GclaheImage *reference,
                                    const struct GclaheImage *candidate,
                                    double *score);

// Quality statistics with a Canny pass at the given hysteresis thresholds.
//
// # Safety
// `image` must be a live handle and `report` a valid pointer.
enum GclaheStatus gclahe_quality(const struct GclaheImage *image,
                                 double canny_low,
                                 double canny_high,
                                 struct GclaheQualityReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GCLAHE_H */
