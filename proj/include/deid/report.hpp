#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deid/embedding.hpp"
#include "deid/identity.hpp"
#include "deid/oks.hpp"

namespace deid {

inline constexpr int kReportSchemaVersion = 1;

struct DeidLog {
  std::string method;
  std::size_t inputs = 0;
  std::size_t processed = 0;
  std::size_t skipped = 0;
  std::vector<std::string> skipped_frames;
};

struct SwapSummary {
  std::size_t steps = 0;
  std::size_t batch_size = 0;
  double learning_rate = 0.0;
  double momentum = 0.0;
  std::uint64_t model_seed = 0;
  std::uint64_t train_seed = 0;
  std::optional<double> initial_loss;  // loss_x + loss_y at the first step
  std::optional<double> final_loss;    // at the last step
  std::size_t swapped = 0;
  // Held-out synthetic X samples whose swap lands nearer the Y pixel centroid.
  std::optional<std::size_t> nearer_target;
  // Mean latent distance between an input and its re-encoded swap.
  std::optional<double> latent_drift;
};

struct MethodEval {
  std::string method;
  EvalSummary summary;
  std::vector<std::string> unmatched_frames;
};

struct SubsetVerification {
  std::string subset;
  std::size_t count = 0;
  std::size_t matches_target = 0;
  std::size_t matches_original = 0;
};

struct EmbeddedDescriptor {
  std::string id;
  std::string subset;
  Point2 point{};
};

struct IdentityEval {
  DistanceReport table;
  RocCurve roc;
  double threshold = kDefaultMatchThreshold;
  std::vector<SubsetVerification> verification;
  double separation = 0.0;  // +inf when fully separated
  std::vector<EmbeddedDescriptor> embedding;
};

struct Provenance {
  std::string tool_version;
  std::string config_sha256;
  std::uint64_t seed = 0;
  std::map<std::string, std::size_t> input_counts;
};

struct Report {
  Provenance provenance;
  std::vector<DeidLog> deid;
  std::optional<SwapSummary> swap;
  std::vector<MethodEval> keypoints;
  std::optional<IdentityEval> identity;
};

enum class ReportFormat { json, csv };

// Sorted keys, shortest round-trip floats, trailing newline.
std::string report_json(const Report& report);

// json: <dir>/report.json; csv: <dir>/keypoint_eval.csv, distance_table.csv,
// roc.csv, instance_oks.csv (only the tables the report holds).
std::vector<std::filesystem::path> emit_report(const Report& report, ReportFormat format,
                                               const std::filesystem::path& dir);

// ROC curve, per-method OKS histograms, per-keypoint small multiples and the
// descriptor embedding, as far as the report holds the data.
std::vector<std::filesystem::path> emit_plots(const Report& report,
                                              const std::filesystem::path& dir);

}  // namespace deid
