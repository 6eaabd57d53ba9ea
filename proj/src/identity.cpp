#include "deid/identity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "deid/error.hpp"

namespace deid {

namespace {

void check_dims(std::size_t a, std::size_t b) {
  if (a != b)
    throw DataError("descriptor dimension mismatch: " + std::to_string(a) + " vs " +
                    std::to_string(b));
}

const std::vector<FaceDescriptor>& find_subset(const DistanceTableRequest& req,
                                               const std::string& label) {
  auto it = req.subsets.find(label);
  if (it == req.subsets.end()) throw DataError("unknown subset label '" + label + "'");
  if (it->second.empty()) throw DataError("subset '" + label + "' is empty");
  return it->second;
}

MeanStd distances_to(std::span<const FaceDescriptor> set, std::span<const double> point) {
  std::vector<double> d;
  d.reserve(set.size());
  for (const FaceDescriptor& f : set) d.push_back(euclidean_distance(f.vector, point));
  return mean_std(d);
}

MeanStd paired_distances(const DistanceTableRequest& req, const SwapRole& role) {
  const auto& swapped = find_subset(req, role.swapped);
  const auto& original = find_subset(req, role.original);
  std::vector<double> d;
  if (req.pairing_mode == PairingMode::all_pairs) {
    for (const FaceDescriptor& s : swapped)
      for (const FaceDescriptor& o : original) d.push_back(euclidean_distance(s.vector, o.vector));
    return mean_std(d);
  }

  std::map<std::string, const FaceDescriptor*> by_id;
  for (const FaceDescriptor& o : original) by_id.emplace(o.id, &o);
  std::vector<std::string> unmatched;
  for (const FaceDescriptor& s : swapped) {
    std::string key = s.id;
    if (!req.pairing.empty()) {
      auto p = req.pairing.find(s.id);
      if (p == req.pairing.end()) {
        unmatched.push_back(s.id);
        continue;
      }
      key = p->second;
    }
    auto o = by_id.find(key);
    if (o == by_id.end()) {
      unmatched.push_back(s.id);
      continue;
    }
    d.push_back(euclidean_distance(s.vector, o->second->vector));
  }
  if (!unmatched.empty()) {
    std::string list;
    for (std::size_t i = 0; i < unmatched.size() && i < 10; ++i)
      list += (i ? ", " : "") + unmatched[i];
    if (unmatched.size() > 10) list += ", ...";
    throw DataError("subset '" + role.swapped + "': " + std::to_string(unmatched.size()) +
                    " descriptor(s) without a paired original in '" + role.original +
                    "': " + list);
  }
  return mean_std(d);
}

}  // namespace

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  check_dims(a.size(), b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

Vector centroid(std::span<const FaceDescriptor> set) {
  if (set.empty()) throw DataError("centroid of an empty descriptor set");
  Vector c(set.front().vector.size(), 0.0);
  for (const FaceDescriptor& f : set) {
    check_dims(c.size(), f.vector.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += f.vector[i];
  }
  for (double& v : c) v /= static_cast<double>(set.size());
  return c;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw DataError("statistics of an empty set");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  MeanStd out;
  out.mean = sum / n;
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(sq / n);
  return out;
}

SubsetStats intra_stats(std::span<const FaceDescriptor> set) {
  SubsetStats stats;
  stats.centroid = centroid(set);
  stats.subset = set.front().subset;
  const MeanStd ms = distances_to(set, stats.centroid);
  stats.intra_mean = ms.mean;
  stats.intra_std = ms.std;
  return stats;
}

bool verify_identity(std::span<const double> descriptor, std::span<const double> c,
                     double threshold) {
  return euclidean_distance(descriptor, c) < threshold;
}

DistanceReport distance_table(const DistanceTableRequest& req) {
  const auto& target = find_subset(req, req.target_subset);
  const Vector target_centroid = centroid(target);

  DistanceReport report;
  report.target_subset = req.target_subset;
  std::set<std::string> placed;

  for (const SwapRole& role : req.swaps) {
    const auto& swapped = find_subset(req, role.swapped);
    const auto& original = find_subset(req, role.original);
    DistanceRow row;
    row.subset = role.swapped;
    row.count = swapped.size();
    const SubsetStats s = intra_stats(swapped);
    row.intra = {s.intra_mean, s.intra_std};
    row.to_original = paired_distances(req, role);
    row.to_average_original = distances_to(swapped, centroid(original));
    row.to_average_target = distances_to(swapped, target_centroid);
    report.rows.push_back(std::move(row));
    placed.insert(role.swapped);
  }

  for (const auto& [label, members] : req.subsets) {
    if (placed.count(label) || label == req.target_subset) continue;
    if (members.empty()) throw DataError("subset '" + label + "' is empty");
    DistanceRow row;
    row.subset = label;
    row.count = members.size();
    const SubsetStats s = intra_stats(members);
    row.intra = {s.intra_mean, s.intra_std};
    row.to_average_target = distances_to(members, target_centroid);
    report.rows.push_back(std::move(row));
  }

  DistanceRow target_row;
  target_row.subset = req.target_subset;
  target_row.count = target.size();
  const SubsetStats t = intra_stats(target);
  target_row.intra = {t.intra_mean, t.intra_std};
  report.rows.push_back(std::move(target_row));
  return report;
}

RocCurve roc(std::span<const double> genuine, std::span<const double> impostor) {
  if (genuine.empty() || impostor.empty())
    throw DataError("roc: genuine and impostor lists must be non-empty");

  std::vector<double> g(genuine.begin(), genuine.end());
  std::vector<double> im(impostor.begin(), impostor.end());
  std::sort(g.begin(), g.end());
  std::sort(im.begin(), im.end());

  std::vector<double> taus(g);
  taus.insert(taus.end(), im.begin(), im.end());
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
  const double span = taus.back() - taus.front();
  const double pad = span > 0.0 ? span : 1.0;
  taus.insert(taus.begin(), taus.front() - pad);
  taus.push_back(taus.back() + pad);

  auto below = [](const std::vector<double>& sorted, double tau) {
    return static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), tau) -
                               sorted.begin()) /
           static_cast<double>(sorted.size());
  };

  RocCurve curve;
  curve.thresholds = taus;
  for (double tau : taus) curve.points.push_back({below(im, tau), below(g, tau)});
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const RocPoint& a = curve.points[i - 1];
    const RocPoint& b = curve.points[i];
    curve.auc += (b.far - a.far) * (a.tar + b.tar) / 2.0;
  }
  return curve;
}

RocInputs swap_roc_inputs(const DistanceTableRequest& req) {
  const Vector target_centroid = centroid(find_subset(req, req.target_subset));
  RocInputs in;
  for (const SwapRole& role : req.swaps) {
    const Vector original_centroid = centroid(find_subset(req, role.original));
    for (const FaceDescriptor& s : find_subset(req, role.swapped)) {
      in.genuine.push_back(euclidean_distance(s.vector, target_centroid));
      in.impostor.push_back(euclidean_distance(s.vector, original_centroid));
    }
  }
  return in;
}

double cluster_separation(const std::vector<std::vector<FaceDescriptor>>& subsets) {
  if (subsets.size() < 2) throw DataError("cluster_separation needs at least two subsets");
  std::vector<SubsetStats> stats;
  for (const auto& s : subsets) {
    if (s.empty()) throw DataError("cluster_separation: empty subset");
    stats.push_back(intra_stats(s));
  }
  double min_gap = std::numeric_limits<double>::infinity();
  double max_radius = 0.0;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    max_radius = std::max(max_radius, stats[i].intra_mean + 2.0 * stats[i].intra_std);
    for (std::size_t j = i + 1; j < stats.size(); ++j)
      min_gap = std::min(min_gap, euclidean_distance(stats[i].centroid, stats[j].centroid));
  }
  if (max_radius == 0.0)
    return min_gap > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return min_gap / max_radius;
}

}  // namespace deid
