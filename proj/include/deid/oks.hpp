#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deid/keypoints.hpp"

namespace deid {

struct OksConfig {
  // Per-keypoint falloff κ_i (COCO17 order). Defaults are 2σ_i of the COCO
  // keypoint evaluation constants.
  std::array<double, kCocoKeypoints> kappas = default_kappas();
  // A GT keypoint is visible when its confidence exceeds this.
  double visibility_threshold = 0.0;
  // s = sqrt(scale_factor * area of the visible-keypoint bounding box)
  double scale_factor = 0.53;
  std::vector<double> thresholds = default_thresholds();

  static std::array<double, kCocoKeypoints> default_kappas();
  // 0.50, 0.55, ..., 0.95
  static std::vector<double> default_thresholds();

  void validate() const;
};

struct OksResult {
  std::array<std::optional<double>, kCocoKeypoints> per_keypoint{};
  double oks = 0.0;
  int visible_count = 0;
  double scale = 0.0;
};

enum class ApMode { fraction, ranked };

struct KeypointPair {
  KeypointInstance gt;
  KeypointInstance pred;
};

// Fixed-width bins over [0, 1]; the last bin is closed on the right.
struct Histogram {
  static constexpr std::size_t kBins = 100;
  std::vector<std::size_t> counts = std::vector<std::size_t>(kBins, 0);

  void add(double value);
  std::size_t total() const;
  static double edge(std::size_t i) { return static_cast<double>(i) / kBins; }
};

using KeypointHistograms = std::array<Histogram, kCocoKeypoints>;

struct InstanceScore {
  std::string frame_id;
  double oks = 0.0;
  double score = 0.0;  // mean pred confidence over GT-visible keypoints
};

struct EvalSummary {
  ApMode mode = ApMode::fraction;
  std::vector<double> thresholds;
  std::vector<double> ap;
  std::vector<double> ar;
  double ap_mean = 0.0;
  double ar_mean = 0.0;
  std::size_t evaluable = 0;
  std::vector<std::string> unevaluable;  // frame ids
  std::vector<InstanceScore> instances;  // sorted by frame id
  Histogram oks_histogram;
  KeypointHistograms keypoint_histograms;
};

double estimate_scale(const KeypointInstance& gt, const OksConfig& cfg);

double keypoint_similarity(double distance, double scale, double kappa);

// Object keypoint similarity of `pred` against `gt`. The object scale is
// estimated from the GT keypoints unless `object_scale` is given.
OksResult oks(const KeypointInstance& gt, const KeypointInstance& pred,
              const OksConfig& cfg, std::optional<double> object_scale = std::nullopt);

struct ThresholdSweep {
  std::vector<double> ap;
  std::vector<double> ar;
  double ap_mean = 0.0;
  double ar_mean = 0.0;
};

// Fraction protocol: AP^t = AR^t = #(oks >= t) / n.
ThresholdSweep sweep_fraction(std::span<const double> oks_values,
                              std::span<const double> thresholds);

// Ranked protocol over one GT per prediction. Predictions are ordered by
// score descending, ties by frame id; AP^t is the 101-point interpolated
// precision, AR^t the final recall.
ThresholdSweep sweep_ranked(std::span<const InstanceScore> instances,
                            std::span<const double> thresholds);

EvalSummary evaluate_set(std::span<const KeypointPair> pairs, const OksConfig& cfg,
                         ApMode mode = ApMode::fraction);

KeypointHistograms per_keypoint_distribution(std::span<const KeypointPair> pairs,
                                             const OksConfig& cfg);

}  // namespace deid
