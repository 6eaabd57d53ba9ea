/* C interface to the de-identification toolkit. Every function returns a
 * deid_status; on failure deid_last_error() describes the problem for the
 * calling thread until the next call into the library. */
#ifndef DEID_DEID_H
#define DEID_DEID_H

#include <stddef.h>
#include <stdint.h>

#if defined(DEID_BUILDING_LIBRARY)
#define DEID_API __attribute__((visibility("default")))
#else
#define DEID_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum deid_status {
  DEID_OK = 0,
  DEID_ERR_CONFIG = 1,
  DEID_ERR_DATA = 2,
  DEID_ERR_INTERNAL = 3,
  DEID_ERR_ARGUMENT = 4 /* null handle or out-of-range argument */
} deid_status;

DEID_API const char* deid_version(void);
DEID_API const char* deid_last_error(void);

/* ---- rasters ---------------------------------------------------------- */

typedef struct deid_image deid_image;

typedef struct deid_box {
  int x, y, w, h;
} deid_box;

/* .png, .ppm, .pgm or .pnm, chosen by extension. */
DEID_API deid_status deid_image_read(const char* path, deid_image** out);
DEID_API deid_status deid_image_create(int width, int height, int channels, uint8_t fill,
                                       deid_image** out);
DEID_API deid_status deid_image_write(const deid_image* image, const char* path);
DEID_API void deid_image_free(deid_image* image);
DEID_API int deid_image_width(const deid_image* image);
DEID_API int deid_image_height(const deid_image* image);
DEID_API int deid_image_channels(const deid_image* image);
/* Row-major interleaved samples, width * height * channels bytes. */
DEID_API uint8_t* deid_image_data(deid_image* image);

/* Both return a new image in *out; the input is untouched. */
DEID_API deid_status deid_image_mask(const deid_image* image, deid_box box, deid_image** out);
DEID_API deid_status deid_image_blur(const deid_image* image, deid_box box, deid_image** out);

/* ---- metrics ---------------------------------------------------------- */

/* gt and pred hold 17 COCO keypoints as x, y, confidence triples (51
 * doubles). Default per-keypoint constants, visibility threshold 0 and
 * scale factor 0.53. DEID_ERR_DATA when no ground-truth keypoint is
 * visible. */
DEID_API deid_status deid_oks(const double* gt, const double* pred, double* out);

DEID_API deid_status deid_roc_auc(const double* genuine, size_t n_genuine,
                                  const double* impostor, size_t n_impostor, double* out);

DEID_API deid_status deid_euclidean_distance(const double* a, const double* b, size_t dim,
                                             double* out);

/* ---- toy face swap ---------------------------------------------------- */

typedef struct deid_swap_model deid_swap_model;

DEID_API deid_status deid_swap_model_init(uint64_t seed, deid_swap_model** out);
DEID_API deid_status deid_swap_model_load(const char* path, deid_swap_model** out);
DEID_API deid_status deid_swap_model_save(const deid_swap_model* model, const char* path);
DEID_API void deid_swap_model_free(deid_swap_model* model);
/* face and out hold 256 intensities in [0, 1], row-major 16x16. */
DEID_API deid_status deid_swap_model_swap(const deid_swap_model* model, const double* face,
                                          double* out);

/* ---- pipeline --------------------------------------------------------- */

typedef struct deid_pipeline deid_pipeline;

typedef enum deid_ap_mode { DEID_AP_FRACTION = 0, DEID_AP_RANKED = 1 } deid_ap_mode;

/* config_path may be NULL for commands that need no configuration (synth). */
DEID_API deid_status deid_pipeline_create(const char* config_path, deid_pipeline** out);
DEID_API void deid_pipeline_destroy(deid_pipeline* pipeline);
DEID_API deid_status deid_pipeline_set_output(deid_pipeline* pipeline, const char* dir);
DEID_API deid_status deid_pipeline_set_seed(deid_pipeline* pipeline, uint64_t seed);
DEID_API deid_status deid_pipeline_set_mode(deid_pipeline* pipeline, deid_ap_mode mode);
DEID_API deid_status deid_pipeline_set_select_largest(deid_pipeline* pipeline, int enabled);
/* One of deid-mask, deid-blur, swap-train, swap-apply, eval-keypoints,
 * eval-identity, synth, report, run-all. */
DEID_API deid_status deid_pipeline_run(deid_pipeline* pipeline, const char* command);
/* Human-readable lines for the stages completed by the last run; valid until
 * the next call on this pipeline. */
DEID_API const char* deid_pipeline_summary(const deid_pipeline* pipeline);

/* Writes the synthetic dataset (frames, manifest, poses, descriptors,
 * pipeline.ini) under out_dir. */
DEID_API deid_status deid_synth_write(const char* out_dir, uint64_t seed);

#ifdef __cplusplus
}
#endif

#endif
