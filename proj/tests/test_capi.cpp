#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include "deid/deid.h"
#include "test_support.hpp"

using testing::TempDir;

TEST_SUITE("capi") {
  TEST_CASE("images") {
    TempDir dir("capi_img");
    deid_image* img = nullptr;
    REQUIRE(deid_image_create(4, 4, 1, 200, &img) == DEID_OK);
    CHECK(deid_image_width(img) == 4);
    deid_image* masked = nullptr;
    REQUIRE(deid_image_mask(img, {1, 1, 2, 2}, &masked) == DEID_OK);
    CHECK(deid_image_data(masked)[5] == 0);
    CHECK(deid_image_data(masked)[0] == 200);
    const std::string path = (dir / "m.pgm").string();
    REQUIRE(deid_image_write(masked, path.c_str()) == DEID_OK);
    CHECK(testing::read_bytes(path) == testing::read_bytes(testing::golden("mask_4x4_expected.pgm")));

    deid_image* blurred = nullptr;
    deid_image* in3 = nullptr;
    REQUIRE(deid_image_read(testing::golden("blur_3x3_input.pgm").c_str(), &in3) == DEID_OK);
    REQUIRE(deid_image_blur(in3, {-2, -2, 7, 7}, &blurred) == DEID_OK);
    CHECK(deid_image_data(blurred)[0] == 64);

    deid_image* none = nullptr;
    CHECK(deid_image_read((dir / "missing.ppm").c_str(), &none) == DEID_ERR_DATA);
    CHECK(std::strstr(deid_last_error(), "missing.ppm") != nullptr);
    CHECK(none == nullptr);
    CHECK(deid_image_create(0, 4, 1, 0, &none) == DEID_ERR_ARGUMENT);
    CHECK(deid_image_mask(nullptr, {0, 0, 1, 1}, &none) == DEID_ERR_ARGUMENT);
    deid_image_free(img);
    deid_image_free(masked);
    deid_image_free(blurred);
    deid_image_free(in3);
    deid_image_free(nullptr);
  }

  TEST_CASE("metrics") {
    double gt[51] = {}, pred[51] = {};
    for (int i = 0; i < 17; ++i) {
      gt[3 * i] = pred[3 * i] = 10.0 * i;
      gt[3 * i + 1] = pred[3 * i + 1] = 7.0 * i * i;
      gt[3 * i + 2] = pred[3 * i + 2] = 1;
    }
    double v = 0;
    REQUIRE(deid_oks(gt, pred, &v) == DEID_OK);
    CHECK(v == 1.0);
    for (int i = 0; i < 17; ++i) gt[3 * i + 2] = 0;
    CHECK(deid_oks(gt, pred, &v) == DEID_ERR_DATA);

    const double g[] = {0.1, 0.2}, im[] = {0.15, 0.3};
    REQUIRE(deid_roc_auc(g, 2, im, 2, &v) == DEID_OK);
    CHECK(v == 0.75);
    CHECK(deid_roc_auc(g, 0, im, 2, &v) == DEID_ERR_DATA);
    const double a[] = {1, 0}, b[] = {0, 1};
    REQUIRE(deid_euclidean_distance(a, b, 2, &v) == DEID_OK);
    CHECK(v == std::sqrt(2.0));
  }

  TEST_CASE("swap model") {
    TempDir dir("capi_swap");
    deid_swap_model* m = nullptr;
    REQUIRE(deid_swap_model_init(3, &m) == DEID_OK);
    const std::string path = (dir / "m.bin").string();
    REQUIRE(deid_swap_model_save(m, path.c_str()) == DEID_OK);
    deid_swap_model* back = nullptr;
    REQUIRE(deid_swap_model_load(path.c_str(), &back) == DEID_OK);
    double face[256], out1[256], out2[256];
    for (int i = 0; i < 256; ++i) face[i] = (i % 17) / 16.0;
    REQUIRE(deid_swap_model_swap(m, face, out1) == DEID_OK);
    REQUIRE(deid_swap_model_swap(back, face, out2) == DEID_OK);
    CHECK(std::memcmp(out1, out2, sizeof out1) == 0);
    deid_swap_model_free(m);
    deid_swap_model_free(back);
    CHECK(deid_swap_model_load((dir / "none.bin").c_str(), &back) == DEID_ERR_DATA);
  }

  TEST_CASE("pipeline handle") {
    TempDir dir("capi_pipe");
    REQUIRE(deid_synth_write((dir / "data").c_str(), 4) == DEID_OK);
    deid_pipeline* p = nullptr;
    REQUIRE(deid_pipeline_create((dir / "data" / "pipeline.ini").c_str(), &p) == DEID_OK);
    REQUIRE(deid_pipeline_set_output(p, (dir / "out").c_str()) == DEID_OK);
    REQUIRE(deid_pipeline_set_mode(p, DEID_AP_RANKED) == DEID_OK);
    REQUIRE(deid_pipeline_run(p, "eval-keypoints") == DEID_OK);
    CHECK(std::string(deid_pipeline_summary(p)).find("eval-keypoints") != std::string::npos);
    CHECK(deid_pipeline_run(p, "nonsense") == DEID_ERR_CONFIG);
    CHECK(deid_pipeline_set_mode(p, static_cast<deid_ap_mode>(7)) == DEID_ERR_ARGUMENT);
    deid_pipeline_destroy(p);

    testing::write_bytes(dir / "bad.ini", "[bogus]\n");
    CHECK(deid_pipeline_create((dir / "bad.ini").c_str(), &p) == DEID_ERR_CONFIG);
    CHECK(std::string(deid_last_error()).find("bogus") != std::string::npos);
    CHECK(std::string(deid_version()) == DEID_VERSION);
  }
}
