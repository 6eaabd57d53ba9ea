#include "deid/oks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "deid/error.hpp"

namespace deid {

std::array<double, kCocoKeypoints> OksConfig::default_kappas() {
  // COCO per-keypoint sigmas; κ = 2σ.
  constexpr std::array<double, kCocoKeypoints> sigmas = {
      .026, .025, .025, .035, .035, .079, .079, .072, .072,
      .062, .062, .107, .107, .087, .087, .089, .089};
  std::array<double, kCocoKeypoints> kappas{};
  for (std::size_t i = 0; i < sigmas.size(); ++i) kappas[i] = 2.0 * sigmas[i];
  return kappas;
}

std::vector<double> OksConfig::default_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((50 + 5 * i) / 100.0);
  return t;
}

void OksConfig::validate() const {
  for (std::size_t i = 0; i < kappas.size(); ++i)
    if (!(kappas[i] > 0.0) || !std::isfinite(kappas[i]))
      throw ConfigError("kappa for " + std::string(kCocoKeypointNames[i]) + " must be positive");
  if (!(visibility_threshold >= 0.0 && visibility_threshold < 1.0))
    throw ConfigError("visibility_threshold must lie in [0, 1)");
  if (!(scale_factor > 0.0) || !std::isfinite(scale_factor))
    throw ConfigError("scale_factor must be positive");
  if (thresholds.empty()) throw ConfigError("at least one OKS threshold is required");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0.0 && thresholds[i] <= 1.0))
      throw ConfigError("OKS thresholds must lie in (0, 1]");
    if (i > 0 && !(thresholds[i] > thresholds[i - 1]))
      throw ConfigError("OKS thresholds must be strictly increasing");
  }
}

void Histogram::add(double value) {
  const double clamped = std::clamp(value, 0.0, 1.0);
  const auto bin = std::min<std::size_t>(kBins - 1, static_cast<std::size_t>(clamped * kBins));
  ++counts[bin];
}

std::size_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

namespace {

void require_coco(const KeypointInstance& kp, const char* role) {
  if (kp.skeleton != Skeleton::coco17)
    throw DataError("frame '" + kp.frame_id + "': " + role + " must be COCO17");
  kp.validate();
}

bool visible(const Keypoint& p, const OksConfig& cfg) {
  return p.confidence > cfg.visibility_threshold;
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double estimate_scale(const KeypointInstance& gt, const OksConfig& cfg) {
  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
  double min_y = min_x, max_y = -min_x;
  int count = 0;
  for (const Keypoint& p : gt.points) {
    if (!visible(p, cfg)) continue;
    ++count;
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  if (count < 2)
    throw UnevaluableInstance("frame '" + gt.frame_id + "': " + std::to_string(count) +
                              " visible keypoint(s), need at least 2 for object scale");
  const double area = (max_x - min_x) * (max_y - min_y);
  if (!(area > 0.0))
    throw UnevaluableInstance("frame '" + gt.frame_id +
                              "': visible keypoints have zero-area extent");
  return std::sqrt(cfg.scale_factor * area);
}

double keypoint_similarity(double distance, double scale, double kappa) {
  if (!(scale > 0.0)) throw DataError("object scale must be positive");
  if (!(kappa > 0.0)) throw DataError("kappa must be positive");
  const double sk = scale * kappa;
  const double value = std::exp(-(distance * distance) / (2.0 * sk * sk));
  return value < 1e-300 ? 0.0 : value;
}

OksResult oks(const KeypointInstance& gt, const KeypointInstance& pred, const OksConfig& cfg,
              std::optional<double> object_scale) {
  require_coco(gt, "ground truth");
  require_coco(pred, "prediction");
  if (gt.frame_id != pred.frame_id)
    throw DataError("frame id mismatch: ground truth '" + gt.frame_id + "' vs prediction '" +
                    pred.frame_id + "'");

  OksResult result;
  if (object_scale) {
    if (!(*object_scale > 0.0)) throw DataError("object scale must be positive");
    result.scale = *object_scale;
  } else {
    result.scale = estimate_scale(gt, cfg);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < kCocoKeypoints; ++i) {
    const Keypoint& g = gt.points[i];
    if (!visible(g, cfg)) continue;
    const Keypoint& p = pred.points[i];
    const double d = std::hypot(g.x - p.x, g.y - p.y);
    const double ks = keypoint_similarity(d, result.scale, cfg.kappas[i]);
    result.per_keypoint[i] = ks;
    sum += ks;
    ++result.visible_count;
  }
  if (result.visible_count == 0)
    throw UnevaluableInstance("frame '" + gt.frame_id + "': no visible ground-truth keypoints");
  result.oks = sum / result.visible_count;
  return result;
}

ThresholdSweep sweep_fraction(std::span<const double> oks_values,
                              std::span<const double> thresholds) {
  if (oks_values.empty()) throw DataError("no evaluable instances");
  ThresholdSweep sweep;
  const double n = static_cast<double>(oks_values.size());
  for (double t : thresholds) {
    const auto hits = std::count_if(oks_values.begin(), oks_values.end(),
                                    [t](double v) { return v >= t; });
    const double frac = static_cast<double>(hits) / n;
    sweep.ap.push_back(frac);
    sweep.ar.push_back(frac);
  }
  sweep.ap_mean = mean(sweep.ap);
  sweep.ar_mean = mean(sweep.ar);
  return sweep;
}

ThresholdSweep sweep_ranked(std::span<const InstanceScore> instances,
                            std::span<const double> thresholds) {
  if (instances.empty()) throw DataError("no evaluable instances");
  std::vector<const InstanceScore*> order;
  for (const InstanceScore& s : instances) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](const InstanceScore* a, const InstanceScore* b) {
    if (a->score != b->score) return a->score > b->score;
    return a->frame_id < b->frame_id;
  });

  const std::size_t n = order.size();
  const double n_gt = static_cast<double>(n);
  constexpr int kRecallPoints = 101;
  ThresholdSweep sweep;
  std::vector<double> precision(n), recall(n);
  for (double t : thresholds) {
    std::size_t tp = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (order[k]->oks >= t) ++tp;
      precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
      recall[k] = static_cast<double>(tp) / n_gt;
    }
    // Precision envelope: non-increasing from the right.
    for (std::size_t k = n - 1; k > 0; --k)
      precision[k - 1] = std::max(precision[k - 1], precision[k]);
    double area = 0.0;
    for (int r = 0; r < kRecallPoints; ++r) {
      const double level = static_cast<double>(r) / (kRecallPoints - 1);
      const auto it = std::lower_bound(recall.begin(), recall.end(), level);
      if (it != recall.end()) area += precision[static_cast<std::size_t>(it - recall.begin())];
    }
    sweep.ap.push_back(area / kRecallPoints);
    sweep.ar.push_back(static_cast<double>(tp) / n_gt);
  }
  sweep.ap_mean = mean(sweep.ap);
  sweep.ar_mean = mean(sweep.ar);
  return sweep;
}

namespace {

struct ScoredPair {
  InstanceScore score;
  OksResult result;
};

// Evaluates every pair; unevaluable ground truth is reported through
// `unevaluable` instead of failing the whole set.
std::vector<ScoredPair> score_pairs(std::span<const KeypointPair> pairs, const OksConfig& cfg,
                                    std::vector<std::string>& unevaluable) {
  std::vector<ScoredPair> scored;
  scored.reserve(pairs.size());
  for (const KeypointPair& pair : pairs) {
    try {
      ScoredPair sp;
      sp.result = oks(pair.gt, pair.pred, cfg);
      sp.score.frame_id = pair.gt.frame_id;
      sp.score.oks = sp.result.oks;
      double conf = 0.0;
      for (std::size_t i = 0; i < kCocoKeypoints; ++i)
        if (sp.result.per_keypoint[i]) conf += pair.pred.points[i].confidence;
      sp.score.score = conf / sp.result.visible_count;
      scored.push_back(std::move(sp));
    } catch (const UnevaluableInstance&) {
      unevaluable.push_back(pair.gt.frame_id);
    }
  }
  std::sort(scored.begin(), scored.end(), [](const ScoredPair& a, const ScoredPair& b) {
    return a.score.frame_id < b.score.frame_id;
  });
  std::sort(unevaluable.begin(), unevaluable.end());
  return scored;
}

}  // namespace

EvalSummary evaluate_set(std::span<const KeypointPair> pairs, const OksConfig& cfg,
                         ApMode mode) {
  cfg.validate();
  if (pairs.empty()) throw DataError("evaluate_set: empty input");
  EvalSummary summary;
  summary.mode = mode;
  summary.thresholds = cfg.thresholds;
  const std::vector<ScoredPair> scored = score_pairs(pairs, cfg, summary.unevaluable);
  if (scored.empty()) throw DataError("evaluate_set: no evaluable pairs");
  summary.evaluable = scored.size();

  std::vector<double> oks_values;
  for (const ScoredPair& sp : scored) {
    summary.instances.push_back(sp.score);
    oks_values.push_back(sp.score.oks);
    summary.oks_histogram.add(sp.score.oks);
    for (std::size_t i = 0; i < kCocoKeypoints; ++i)
      if (sp.result.per_keypoint[i]) summary.keypoint_histograms[i].add(*sp.result.per_keypoint[i]);
  }

  const ThresholdSweep sweep = mode == ApMode::fraction
                                   ? sweep_fraction(oks_values, cfg.thresholds)
                                   : sweep_ranked(summary.instances, cfg.thresholds);
  summary.ap = sweep.ap;
  summary.ar = sweep.ar;
  summary.ap_mean = sweep.ap_mean;
  summary.ar_mean = sweep.ar_mean;
  return summary;
}

KeypointHistograms per_keypoint_distribution(std::span<const KeypointPair> pairs,
                                             const OksConfig& cfg) {
  if (pairs.empty()) throw DataError("per_keypoint_distribution: empty input");
  std::vector<std::string> unevaluable;
  KeypointHistograms hist;
  for (const ScoredPair& sp : score_pairs(pairs, cfg, unevaluable))
    for (std::size_t i = 0; i < kCocoKeypoints; ++i)
      if (sp.result.per_keypoint[i]) hist[i].add(*sp.result.per_keypoint[i]);
  return hist;
}

}  // namespace deid
