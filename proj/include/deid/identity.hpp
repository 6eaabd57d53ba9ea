#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deid {

using Vector = std::vector<double>;

struct FaceDescriptor {
  std::string id;
  std::string subset;
  Vector vector;

  bool operator==(const FaceDescriptor&) const = default;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population convention (divisor n)
};

struct SubsetStats {
  std::string subset;
  Vector centroid;
  double intra_mean = 0.0;
  double intra_std = 0.0;
};

double euclidean_distance(std::span<const double> a, std::span<const double> b);

Vector centroid(std::span<const FaceDescriptor> set);

// Mean and population std of `values`; throws on empty input.
MeanStd mean_std(std::span<const double> values);

SubsetStats intra_stats(std::span<const FaceDescriptor> set);

inline constexpr double kDefaultMatchThreshold = 0.6;

// Strict: a match requires distance < threshold.
bool verify_identity(std::span<const double> descriptor, std::span<const double> centroid,
                     double threshold = kDefaultMatchThreshold);

enum class PairingMode { frame, all_pairs };

// A swapped subset and the original subset it was produced from.
struct SwapRole {
  std::string swapped;
  std::string original;
};

struct DistanceTableRequest {
  std::map<std::string, std::vector<FaceDescriptor>> subsets;
  std::vector<SwapRole> swaps;
  std::string target_subset;
  // swapped descriptor id -> original descriptor id. Empty means the ids
  // themselves pair up.
  std::map<std::string, std::string> pairing;
  PairingMode pairing_mode = PairingMode::frame;
};

struct DistanceRow {
  std::string subset;
  std::size_t count = 0;
  MeanStd intra;
  std::optional<MeanStd> to_original;
  std::optional<MeanStd> to_average_original;
  std::optional<MeanStd> to_average_target;
};

// Rows: swapped subsets in request order, then the remaining subsets by
// label, with the target subset last.
struct DistanceReport {
  std::string target_subset;
  std::vector<DistanceRow> rows;
};

DistanceReport distance_table(const DistanceTableRequest& request);

struct RocPoint {
  double far = 0.0;
  double tar = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  std::vector<double> thresholds;
  double auc = 0.0;
};

// TAR(τ) = fraction of genuine < τ, FAR(τ) = fraction of impostor < τ, swept
// over every observed distance plus one sentinel below and above the range.
// AUC is the trapezoidal area over (FAR, TAR).
RocCurve roc(std::span<const double> genuine, std::span<const double> impostor);

// Genuine/impostor lists in the de-identification sense: distances of every
// swapped descriptor to the target centroid, and to the centroid of the
// original subset it came from.
struct RocInputs {
  std::vector<double> genuine;
  std::vector<double> impostor;
};
RocInputs swap_roc_inputs(const DistanceTableRequest& request);

// min centroid distance over subset pairs / max(intra_mean + 2 intra_std).
// Returns +infinity when every subset has zero radius and centroids differ.
double cluster_separation(const std::vector<std::vector<FaceDescriptor>>& subsets);

}  // namespace deid
