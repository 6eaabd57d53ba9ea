#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deid/config.hpp"
#include "deid/report.hpp"

namespace deid {

enum class DeidMethod { mask, blur };

// Applies the transform to every frame in section.frames that has a manifest
// box, writing same-named files to out_dir. Frames without a box are skipped
// and logged.
DeidLog run_deid(const DeidSection& section, DeidMethod method, const fs::path& out_dir);

// Joins each method's pose files to the original ones by frame id and
// evaluates them with the original detections as ground truth.
std::vector<MethodEval> evaluate_keypoints(const KeypointSection& section);

// Distance table, ROC, threshold verification, cluster separation and the
// 2-D embedding for a descriptor CSV. Subsets named "swapped_<S>" pair with
// "original_<S>".
IdentityEval evaluate_identity(const IdentitySection& section);

// Writes a complete synthetic input tree (frames, manifest, pose JSON for
// original and three de-identification methods, descriptors, pairing and a
// pipeline.ini that references them).
void write_synthetic_dataset(const fs::path& dir, std::uint64_t seed);

struct RunOptions {
  std::optional<fs::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<ApMode> mode;
  std::optional<bool> select_largest;
};

// Subcommand driver behind the CLI. Every subcommand validates its inputs
// before creating any output.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, const RunOptions& options);

  static const std::vector<std::string>& commands();

  void run(std::string_view command);

  const PipelineConfig& config() const { return config_; }
  const fs::path& out_dir() const { return out_; }
  const Report& report() const { return report_; }
  // One line per completed stage.
  const std::string& summary() const { return summary_; }

 private:
  void deid(DeidMethod method);
  void swap_train();
  void swap_apply();
  void eval_keypoints();
  void eval_identity();
  void write_report();
  void run_all();

  void require_deid() const;
  void require_keypoints() const;
  void require_identity() const;
  void require_swap_model() const;
  fs::path model_path() const;
  SwapSection swap_section() const;
  void note(const std::string& line);

  PipelineConfig config_;
  fs::path out_;
  Report report_;
  std::string summary_;
};

}  // namespace deid
