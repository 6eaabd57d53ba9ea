#include <doctest.h>

#include <nlohmann/json.hpp>

#include "deid/error.hpp"
#include "deid/formats.hpp"
#include "deid/pipeline.hpp"
#include "deid/report.hpp"
#include "deid/svg.hpp"
#include "deid/transforms.hpp"
#include "test_support.hpp"

using namespace deid;
using testing::TempDir;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

std::string slurp(const fs::path& p) {
  const auto b = testing::read_bytes(p);
  return {b.begin(), b.end()};
}

std::size_t file_count(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) n += e.is_regular_file();
  return n;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("deid skips frames without boxes and touches only the boxes") {
    TempDir dir("deid");
    fs::create_directories(dir / "frames");
    Rng rng(1);
    std::vector<RasterImage> frames;
    for (int i = 0; i < 3; ++i) {
      frames.push_back(testing::random_image(rng, 20, 16, 3));
      write_raster(frames.back(), dir / "frames" / ("f" + std::to_string(i) + ".ppm"));
    }
    testing::write_bytes(dir / "m.csv", "frame_id,x,y,w,h\nf0,2,2,10,10\nf2,-3,8,9,12\n");
    const DeidSection s{dir / "frames", dir / "m.csv"};

    const DeidLog mask = run_deid(s, DeidMethod::mask, dir / "masked");
    CHECK(mask.inputs == 3);
    CHECK(mask.processed == 2);
    CHECK(mask.skipped == 1);
    CHECK(mask.processed + mask.skipped == mask.inputs);
    CHECK(mask.skipped_frames == std::vector<std::string>{"f1"});
    CHECK_FALSE(fs::exists(dir / "masked" / "f1.ppm"));
    const auto first = testing::read_bytes(dir / "masked" / "f0.ppm");
    run_deid(s, DeidMethod::mask, dir / "masked");
    CHECK(testing::read_bytes(dir / "masked" / "f0.ppm") == first);

    run_deid(s, DeidMethod::blur, dir / "blurred");
    const RasterImage blurred = read_raster(dir / "blurred" / "f0.ppm");
    CHECK(blurred == apply_blur(frames[0], {"f0", 2, 2, 10, 10}));
    bool changed_inside = false;
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 20; ++x)
        for (int c = 0; c < 3; ++c) {
          const bool inside = x >= 2 && x < 12 && y >= 2 && y < 12;
          if (!inside)
            CHECK(blurred.at(x, y, c) == frames[0].at(x, y, c));
          else
            changed_inside |= blurred.at(x, y, c) != frames[0].at(x, y, c);
        }
    CHECK(changed_inside);
  }

  TEST_CASE("synthetic dataset evaluates end to end") {
    TempDir dir("synth_eval");
    write_synthetic_dataset(dir.path(), 5);
    const auto cfg = PipelineConfig::load(dir / "pipeline.ini");

    KeypointSection self = *cfg.keypoints;
    self.methods = {{"self", self.original}};
    const auto same = evaluate_keypoints(self);
    CHECK(same[0].summary.ap_mean == 1.0);
    CHECK(same[0].summary.ar_mean == 1.0);

    const auto evals = evaluate_keypoints(*cfg.keypoints);
    REQUIRE(evals.size() == 3);
    std::map<std::string, EvalSummary> by;
    for (const auto& e : evals) by[e.method] = e.summary;
    const std::size_t last = by["swapped"].ap.size() - 1;
    CHECK(by["swapped"].ap[last] > by["masked"].ap[last]);
    CHECK(by["swapped"].ap[last] > by["blurred"].ap[last]);

    const IdentityEval id = evaluate_identity(*cfg.identity);
    CHECK(id.roc.auc > 0.999);
    CHECK(id.verification[0].matches_target == id.verification[0].count);
    CHECK(id.verification[0].matches_original == 0);

    IdentitySection missing = *cfg.identity;
    missing.target = "original_Q";
    CHECK_THROWS_AS(evaluate_identity(missing), DataError);
  }

  TEST_CASE("missing method poses are logged, an empty join is an error") {
    TempDir dir("join");
    write_synthetic_dataset(dir.path(), 6);
    auto cfg = PipelineConfig::load(dir / "pipeline.ini");
    fs::remove(dir / "poses" / "masked" / "frame_000003.json");
    const auto evals = evaluate_keypoints(*cfg.keypoints);
    for (const auto& e : evals)
      if (e.method == "masked") CHECK(e.unmatched_frames == std::vector<std::string>{"frame_000003"});
    fs::create_directories(dir / "empty");
    cfg.keypoints->methods = {{"none", dir / "empty"}};
    CHECK_THROWS_AS(evaluate_keypoints(*cfg.keypoints), DataError);
  }

  TEST_CASE("config errors surface before any output exists") {
    TempDir dir("failfast");
    write_synthetic_dataset(dir.path(), 7);
    fs::remove(dir / "descriptors.csv");
    Pipeline p(PipelineConfig::load(dir / "pipeline.ini"), {dir / "out", {}, {}, {}});
    CHECK_THROWS_AS(p.run("run-all"), ConfigError);
    CHECK_THROWS_AS(p.run("eval-identity"), ConfigError);
    CHECK_THROWS_AS(p.run("report"), ConfigError);
    CHECK_FALSE(fs::exists(dir / "out"));
    CHECK_THROWS_AS(p.run("swap-apply"), ConfigError);
    CHECK_THROWS_AS(p.run("dance"), ConfigError);
    CHECK_FALSE(fs::exists(dir / "out"));
  }

  TEST_CASE("run-all output is reproducible and reconciles") {
    TempDir dir("runall");
    write_synthetic_dataset(dir / "data", 8);
    auto cfg = PipelineConfig::load(dir / "data" / "pipeline.ini");
    cfg.swap->train.steps = 20;
    Pipeline a(cfg, {dir / "a", {}, {}, {}});
    a.run("run-all");
    Pipeline b(cfg, {dir / "b", {}, {}, {}});
    b.run("run-all");
    for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
      if (!e.is_regular_file()) continue;
      const fs::path rel = fs::relative(e.path(), dir / "a");
      CHECK(testing::read_bytes(e.path()) == testing::read_bytes(dir / "b" / rel));
    }
    CHECK(file_count(dir / "a") == file_count(dir / "b"));

    const auto report = nlohmann::json::parse(slurp(dir / "a" / "report.json"));
    CHECK(report["schema_version"] == kReportSchemaVersion);
    for (const auto& log : report["deid"])
      CHECK(log["processed"].get<int>() + log["skipped"].get<int>() == log["inputs"].get<int>());
    CHECK(report["provenance"]["seed"] == 8);
    CHECK(report["provenance"]["config_sha256"] == cfg.sha256);
    CHECK(slurp(dir / "a" / "report.json").find(dir.path().string()) == std::string::npos);

    const std::string kp = slurp(dir / "a" / "plots" / "keypoints_masked.svg");
    CHECK(count(kp, "<g class=\"panel\"") == 17);
    CHECK(count(slurp(dir / "a" / "plots" / "oks_histogram.svg"), "<g class=\"panel\"") == 3);

    // A different seed changes the report.
    Pipeline c(cfg, {dir / "c", 9, {}, {}});
    c.run("swap-train");
    c.run("report");
    CHECK(slurp(dir / "c" / "report.json") != slurp(dir / "a" / "report.json"));
  }

  TEST_CASE("report json is stable and sorted") {
    Report r;
    r.provenance.tool_version = "x";
    r.provenance.seed = 3;
    r.provenance.input_counts["b"] = 1;
    r.provenance.input_counts["a"] = 2;
    const std::string j = report_json(r);
    CHECK(j == report_json(r));
    CHECK(j.back() == '\n');
    CHECK(j.find("\"a\"") < j.find("\"b\""));
  }

  TEST_CASE("roc svg reaches the top-left corner for a perfect curve") {
    const std::vector<double> g = {0.1, 0.2}, i = {0.5, 0.6};
    const RocCurve r = roc(g, i);
    REQUIRE(r.auc == 1.0);
    const std::string svg = svg::roc_curve(r);
    const auto start = svg.find("<polyline points=\"");
    REQUIRE(start != std::string::npos);
    const std::string pts = svg.substr(start, svg.find('"', start + 18) - start);
    // (FAR 0, TAR 1) in plot coordinates
    CHECK(pts.find("50.00,50.00") != std::string::npos);
    CHECK(svg.find("AUC = 1.000000") != std::string::npos);
  }
}
