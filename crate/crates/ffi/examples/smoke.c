/* Minimal C consumer of the gclahe C ABI.
 *
 * Build (from the workspace root, after `cargo build -p gclahe-ffi --release`):
 *   cc -std=c99 -I crates/ffi/include crates/ffi/examples/smoke.c \
 *      target/release/libgclahe_ffi.a -lm -o smoke
 */
#include <assert.h>
#include <stdio.h>
#include <stdint.h>
#include "gclahe.h"

int main(void) {
    uint8_t pixels[32 * 32];
    for (int i = 0; i < 32 * 32; i++) pixels[i] = (uint8_t)((i * 37) % 256);

    GclaheImage *img = NULL;
    assert(gclahe_image_create(32, 32, pixels, sizeof pixels, &img) == GCLAHE_STATUS_OK);
    assert(gclahe_image_width(img) == 32 && gclahe_image_height(img) == 32);

    GclaheImage *enhanced = NULL;
    uint32_t clip = 0;
    double score = 0.0;
    assert(gclahe_enhance(img, 8, 3, GCLAHE_METRIC_SSIM, &enhanced, &clip, &score) == GCLAHE_STATUS_OK);

    GclaheQualityReport report;
    assert(gclahe_quality(enhanced, 50.0, 150.0, &report) == GCLAHE_STATUS_OK);

    double similarity = 0.0;
    assert(gclahe_similarity(GCLAHE_METRIC_MSE, img, enhanced, &similarity) == GCLAHE_STATUS_OK);

    printf("clip=%u score=%.4f edges=%llu similarity=%.2f\n",
           clip, score, (unsigned long long)report.edge_count, similarity);
    gclahe_image_free(enhanced);
    gclahe_image_free(img);
    return 0;
}
