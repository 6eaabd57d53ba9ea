#include "deid/deid.h"

#include <exception>
#include <new>
#include <string>
#include <vector>

#include "deid/config.hpp"
#include "deid/error.hpp"
#include "deid/identity.hpp"
#include "deid/oks.hpp"
#include "deid/pipeline.hpp"
#include "deid/raster.hpp"
#include "deid/swap_model.hpp"
#include "deid/transforms.hpp"

struct deid_image {
  deid::RasterImage image;
};

struct deid_swap_model {
  deid::SwapModel model;
};

struct deid_pipeline {
  deid::PipelineConfig config;
  deid::RunOptions options;
  std::string summary;
};

namespace {

thread_local std::string last_error;

deid_status fail(deid_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs f, translating exceptions into status codes.
template <typename F>
deid_status guarded(F&& f) {
  last_error.clear();
  try {
    f();
    return DEID_OK;
  } catch (const deid::Error& e) {
    return fail(static_cast<deid_status>(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(DEID_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(DEID_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(DEID_ERR_INTERNAL, "unknown error");
  }
}

deid::FaceBox to_box(deid_box b) { return deid::FaceBox{"", b.x, b.y, b.w, b.h}; }

deid::KeypointInstance coco_from(const double* triples) {
  deid::KeypointInstance kp;
  kp.skeleton = deid::Skeleton::coco17;
  kp.points.resize(17);
  for (int i = 0; i < 17; ++i)
    kp.points[i] = {triples[3 * i], triples[3 * i + 1], triples[3 * i + 2]};
  return kp;
}

}  // namespace

#define DEID_REQUIRE(cond, what) \
  if (!(cond)) return fail(DEID_ERR_ARGUMENT, what)

extern "C" {

const char* deid_version(void) { return DEID_VERSION; }

const char* deid_last_error(void) { return last_error.c_str(); }

deid_status deid_image_read(const char* path, deid_image** out) {
  DEID_REQUIRE(path && out, "null argument");
  return guarded([&] { *out = new deid_image{deid::read_raster(path)}; });
}

deid_status deid_image_create(int width, int height, int channels, uint8_t fill,
                              deid_image** out) {
  DEID_REQUIRE(out, "null argument");
  DEID_REQUIRE(width > 0 && height > 0, "image dimensions must be positive");
  DEID_REQUIRE(channels == 1 || channels == 3, "channels must be 1 or 3");
  return guarded([&] { *out = new deid_image{deid::RasterImage(width, height, channels, fill)}; });
}

deid_status deid_image_write(const deid_image* image, const char* path) {
  DEID_REQUIRE(image && path, "null argument");
  return guarded([&] { deid::write_raster(image->image, path); });
}

void deid_image_free(deid_image* image) { delete image; }

int deid_image_width(const deid_image* image) { return image ? image->image.width() : 0; }
int deid_image_height(const deid_image* image) { return image ? image->image.height() : 0; }
int deid_image_channels(const deid_image* image) { return image ? image->image.channels() : 0; }
uint8_t* deid_image_data(deid_image* image) { return image ? image->image.data().data() : nullptr; }

deid_status deid_image_mask(const deid_image* image, deid_box box, deid_image** out) {
  DEID_REQUIRE(image && out, "null argument");
  return guarded([&] { *out = new deid_image{deid::apply_mask(image->image, to_box(box))}; });
}

deid_status deid_image_blur(const deid_image* image, deid_box box, deid_image** out) {
  DEID_REQUIRE(image && out, "null argument");
  return guarded([&] { *out = new deid_image{deid::apply_blur(image->image, to_box(box))}; });
}

deid_status deid_oks(const double* gt, const double* pred, double* out) {
  DEID_REQUIRE(gt && pred && out, "null argument");
  return guarded([&] {
    *out = deid::oks(coco_from(gt), coco_from(pred), deid::OksConfig{}).oks;
  });
}

deid_status deid_roc_auc(const double* genuine, size_t n_genuine, const double* impostor,
                         size_t n_impostor, double* out) {
  DEID_REQUIRE(genuine && impostor && out, "null argument");
  return guarded([&] {
    *out = deid::roc({genuine, n_genuine}, {impostor, n_impostor}).auc;
  });
}

deid_status deid_euclidean_distance(const double* a, const double* b, size_t dim, double* out) {
  DEID_REQUIRE(a && b && out, "null argument");
  return guarded([&] { *out = deid::euclidean_distance({a, dim}, {b, dim}); });
}

deid_status deid_swap_model_init(uint64_t seed, deid_swap_model** out) {
  DEID_REQUIRE(out, "null argument");
  return guarded([&] { *out = new deid_swap_model{deid::init_model(seed)}; });
}

deid_status deid_swap_model_load(const char* path, deid_swap_model** out) {
  DEID_REQUIRE(path && out, "null argument");
  return guarded([&] { *out = new deid_swap_model{deid::load_checkpoint(path)}; });
}

deid_status deid_swap_model_save(const deid_swap_model* model, const char* path) {
  DEID_REQUIRE(model && path, "null argument");
  return guarded([&] { deid::save_checkpoint(model->model, path); });
}

void deid_swap_model_free(deid_swap_model* model) { delete model; }

deid_status deid_swap_model_swap(const deid_swap_model* model, const double* face, double* out) {
  DEID_REQUIRE(model && face && out, "null argument");
  return guarded([&] {
    deid::TinyFaceSample sample;
    sample.pixels = Eigen::Map<const Eigen::VectorXd>(face, deid::kFacePixels);
    Eigen::Map<Eigen::VectorXd>(out, deid::kFacePixels) = deid::swap(model->model, sample);
  });
}

deid_status deid_pipeline_create(const char* config_path, deid_pipeline** out) {
  DEID_REQUIRE(out, "null argument");
  return guarded([&] {
    auto* p = new deid_pipeline{};
    try {
      if (config_path) p->config = deid::PipelineConfig::load(config_path);
    } catch (...) {
      delete p;
      throw;
    }
    *out = p;
  });
}

void deid_pipeline_destroy(deid_pipeline* pipeline) { delete pipeline; }

deid_status deid_pipeline_set_output(deid_pipeline* pipeline, const char* dir) {
  DEID_REQUIRE(pipeline && dir, "null argument");
  return guarded([&] { pipeline->options.out = std::filesystem::path(dir); });
}

deid_status deid_pipeline_set_seed(deid_pipeline* pipeline, uint64_t seed) {
  DEID_REQUIRE(pipeline, "null argument");
  pipeline->options.seed = seed;
  return DEID_OK;
}

deid_status deid_pipeline_set_mode(deid_pipeline* pipeline, deid_ap_mode mode) {
  DEID_REQUIRE(pipeline, "null argument");
  DEID_REQUIRE(mode == DEID_AP_FRACTION || mode == DEID_AP_RANKED, "unknown AP mode");
  pipeline->options.mode = mode == DEID_AP_RANKED ? deid::ApMode::ranked : deid::ApMode::fraction;
  return DEID_OK;
}

deid_status deid_pipeline_set_select_largest(deid_pipeline* pipeline, int enabled) {
  DEID_REQUIRE(pipeline, "null argument");
  pipeline->options.select_largest = enabled != 0;
  return DEID_OK;
}

deid_status deid_pipeline_run(deid_pipeline* pipeline, const char* command) {
  DEID_REQUIRE(pipeline && command, "null argument");
  pipeline->summary.clear();
  return guarded([&] {
    deid::Pipeline run(pipeline->config, pipeline->options);
    run.run(command);
    pipeline->summary = run.summary();
  });
}

const char* deid_pipeline_summary(const deid_pipeline* pipeline) {
  return pipeline ? pipeline->summary.c_str() : "";
}

deid_status deid_synth_write(const char* out_dir, uint64_t seed) {
  DEID_REQUIRE(out_dir, "null argument");
  return guarded([&] { deid::write_synthetic_dataset(out_dir, seed); });
}

}  // extern "C"
