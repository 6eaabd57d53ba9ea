#include "deid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "deid/error.hpp"
#include "deid/rng.hpp"

namespace deid {

void DescriptorClusterSpec::validate() const {
  if (dimension < 1) throw ConfigError("descriptor dimension must be positive");
  std::set<std::string> labels;
  for (const ClusterSpec& c : subsets) {
    if (!labels.insert(c.label).second)
      throw ConfigError("duplicate cluster label '" + c.label + "'");
    if (c.centroid.size() != dimension)
      throw ConfigError("cluster '" + c.label + "' centroid has wrong dimension");
    if (!(c.sigma >= 0.0) || !std::isfinite(c.sigma))
      throw ConfigError("cluster '" + c.label + "' sigma must be finite and >= 0");
    if (c.count < 1) throw ConfigError("cluster '" + c.label + "' needs at least one member");
    if (c.first_noisy_axis > dimension)
      throw ConfigError("cluster '" + c.label + "' first_noisy_axis exceeds the dimension");
  }
}

std::vector<FaceDescriptor> gen_descriptor_clusters(const DescriptorClusterSpec& spec,
                                                    std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  std::vector<FaceDescriptor> out;
  for (const ClusterSpec& c : spec.subsets) {
    for (std::size_t i = 0; i < c.count; ++i) {
      FaceDescriptor d;
      char suffix[16];
      std::snprintf(suffix, sizeof suffix, "_%05zu", i);
      d.id = c.label + suffix;
      d.subset = c.label;
      d.vector.resize(spec.dimension);
      d.vector = c.centroid;
      for (std::size_t k = c.first_noisy_axis; k < spec.dimension; ++k)
        d.vector[k] += rng.normal(0.0, c.sigma);
      out.push_back(std::move(d));
    }
  }
  return out;
}

double chi_mean(std::size_t d) {
  const double k = static_cast<double>(d);
  return std::sqrt(2.0) * std::exp(std::lgamma((k + 1.0) / 2.0) - std::lgamma(k / 2.0));
}

double sigma_for_intra_mean(double intra_mean, std::size_t dimension) {
  return intra_mean / chi_mean(dimension);
}

DescriptorClusterSpec swap_cluster_spec(const SwapGeometry& g) {
  if (g.dimension < 3) throw ConfigError("swap geometry needs dimension >= 3");
  if (!(g.intra_mean >= 0.0) || !(g.count >= 1)) throw ConfigError("invalid swap geometry");
  const double r2 = g.intra_mean * g.intra_mean;
  auto separation = [&](double mean_distance) {
    if (!(mean_distance > g.intra_mean))
      throw ConfigError("swap geometry distances must exceed intra_mean");
    return std::sqrt(mean_distance * mean_distance - r2);
  };
  const double a = separation(g.to_original), b = separation(g.to_target),
               c = separation(g.original_to_target);
  if (!(a + b > c && a + c > b && b + c > a))
    throw ConfigError("swap geometry distances violate the triangle inequality");

  // original at the base point, target along axis 0, swapped in the (0, 1) plane
  const double sx = (a * a - b * b + c * c) / (2.0 * c);
  const double sy = std::sqrt(std::max(0.0, a * a - sx * sx));
  Vector base(g.dimension);
  for (std::size_t i = 0; i < g.dimension; ++i) base[i] = 0.1 * std::cos(0.37 * static_cast<double>(i));

  auto at = [&](double x, double y) {
    Vector v = base;
    v[0] += x;
    v[1] += y;
    return v;
  };
  const double sigma = sigma_for_intra_mean(g.intra_mean, g.dimension - 2);
  DescriptorClusterSpec spec;
  spec.dimension = g.dimension;
  spec.subsets = {{"swapped_F", at(sx, sy), sigma, g.count, 2},
                  {"original_F", at(0.0, 0.0), sigma, g.count, 2},
                  {"original_A", at(c, 0.0), sigma, g.count, 2}};
  return spec;
}

// ---- keypoints -------------------------------------------------------------

const std::vector<Keypoint>& skeleton_template() {
  // x to the person's left (image right for a frontal view), y down; the head
  // top is at y = 0 and the ankles near y = 0.97.
  static const std::vector<Keypoint> kTemplate = {
      {0.00, 0.070, 1}, {0.030, 0.050, 1}, {-0.030, 0.050, 1}, {0.060, 0.060, 1},
      {-0.060, 0.060, 1}, {0.120, 0.180, 1}, {-0.120, 0.180, 1}, {0.160, 0.330, 1},
      {-0.160, 0.330, 1}, {0.180, 0.470, 1}, {-0.180, 0.470, 1}, {0.080, 0.520, 1},
      {-0.080, 0.520, 1}, {0.090, 0.730, 1}, {-0.090, 0.730, 1}, {0.090, 0.970, 1},
      {-0.090, 0.970, 1}};
  return kTemplate;
}

std::vector<KeypointInstance> gen_keypoint_instances(std::size_t n, FrameSize frame,
                                                     std::uint64_t seed,
                                                     SkeletonPlacement placement) {
  if (n < 1) throw ConfigError("gen_keypoint_instances needs n >= 1");
  if (frame.width < 1 || frame.height < 1) throw ConfigError("frame size must be positive");
  if (!(placement.min_height_fraction > 0.0 &&
        placement.min_height_fraction <= placement.max_height_fraction &&
        placement.max_height_fraction <= 1.0))
    throw ConfigError("invalid skeleton placement range");

  const auto& tpl = skeleton_template();
  constexpr double kHalfWidth = 0.18;
  constexpr double kDepth = 0.97;
  Rng rng(seed);
  std::vector<KeypointInstance> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double height = frame.height * rng.uniform(placement.min_height_fraction,
                                               placement.max_height_fraction);
    height = std::min(height, frame.width / (2.0 * kHalfWidth));
    const double cx = rng.uniform(kHalfWidth * height, frame.width - kHalfWidth * height);
    const double top = rng.uniform(0.0, frame.height - kDepth * height);

    KeypointInstance inst;
    char id[32];
    std::snprintf(id, sizeof id, "frame_%06zu", i);
    inst.frame_id = id;
    inst.skeleton = Skeleton::coco17;
    for (const Keypoint& t : tpl)
      inst.points.push_back({cx + t.x * height, top + t.y * height, rng.uniform(0.5, 1.0)});
    out.push_back(std::move(inst));
  }
  return out;
}

void PerturbationModel::validate() const {
  if (!(head_sigma >= 0.0) || !std::isfinite(head_sigma) || !(body_sigma >= 0.0) ||
      !std::isfinite(body_sigma))
    throw ConfigError("perturbation sigmas must be finite and >= 0");
  if (!(head_dropout >= 0.0 && head_dropout < 1.0) || !(body_dropout >= 0.0 && body_dropout < 1.0))
    throw ConfigError("dropout probabilities must lie in [0, 1)");
}

std::vector<KeypointInstance> perturb_keypoints(const std::vector<KeypointInstance>& instances,
                                                const PerturbationModel& model,
                                                std::uint64_t seed) {
  model.validate();
  Rng rng(seed);
  std::vector<KeypointInstance> out = instances;
  for (KeypointInstance& inst : out) {
    if (inst.skeleton != Skeleton::coco17)
      throw DataError("frame '" + inst.frame_id + "': perturbation needs COCO17 instances");
    for (std::size_t i = 0; i < inst.points.size(); ++i) {
      const bool head = is_head_keypoint(i);
      const double sigma = head ? model.head_sigma : model.body_sigma;
      const double drop = head ? model.head_dropout : model.body_dropout;
      // Fixed draw count per keypoint keeps streams aligned across settings.
      const double u = rng.uniform();
      const double nx = rng.normal();
      const double ny = rng.normal();
      Keypoint& p = inst.points[i];
      if (u < drop) {
        p = {0.0, 0.0, 0.0};
      } else {
        p.x += sigma * nx;
        p.y += sigma * ny;
      }
    }
  }
  return out;
}

KeypointInstance lift_coco17_to_body25(const KeypointInstance& coco) {
  if (coco.skeleton != Skeleton::coco17)
    throw DataError("frame '" + coco.frame_id + "': expected a COCO17 instance");
  coco.validate();
  KeypointInstance out;
  out.frame_id = coco.frame_id;
  out.skeleton = Skeleton::body25;
  out.points.assign(kBody25Keypoints, Keypoint{});
  for (std::size_t i = 0; i < kCocoKeypoints; ++i) out.points[kBody25ForCoco[i]] = coco.points[i];

  auto midpoint = [](const Keypoint& a, const Keypoint& b) {
    if (a.confidence == 0.0 || b.confidence == 0.0) return Keypoint{};
    return Keypoint{(a.x + b.x) / 2, (a.y + b.y) / 2, std::min(a.confidence, b.confidence)};
  };
  auto offset = [](const Keypoint& a, double dx, double dy) {
    if (a.confidence == 0.0) return Keypoint{};
    return Keypoint{a.x + dx, a.y + dy, a.confidence};
  };
  const auto& p = coco.points;
  out.points[1] = midpoint(p[5], p[6]);
  out.points[8] = midpoint(p[11], p[12]);
  out.points[19] = offset(p[15], 6.0, 8.0);   // left big toe
  out.points[20] = offset(p[15], 10.0, 7.0);  // left small toe
  out.points[21] = offset(p[15], -2.0, 4.0);  // left heel
  out.points[22] = offset(p[16], -6.0, 8.0);
  out.points[23] = offset(p[16], -10.0, 7.0);
  out.points[24] = offset(p[16], 2.0, 4.0);
  return out;
}

// ---- toy faces -------------------------------------------------------------

void IdentitySpec::validate() const {
  if (!(face_rx > 0.0 && face_ry > 0.0)) throw ConfigError("face axes must be positive");
  if (!(base_intensity >= 0.0 && base_intensity <= 1.0))
    throw ConfigError("base intensity must lie in [0, 1]");
  if (!(jitter_shift >= 0.0 && jitter_intensity >= 0.0 && jitter_mouth >= 0.0))
    throw ConfigError("jitter ranges must be >= 0");
}

IdentitySpec default_identity_x() { return IdentitySpec{}; }

IdentitySpec default_identity_y() {
  IdentitySpec s;
  s.face_rx = 4.3;
  s.face_ry = 7.2;
  s.eye_spacing = 3.4;
  s.eye_height = -2.4;
  s.mouth_curvature = -0.7;
  s.base_intensity = 0.5;
  return s;
}

namespace {

double coverage(double signed_distance) { return std::clamp(0.5 - signed_distance, 0.0, 1.0); }

}  // namespace

TinyFaceSample render_face(const IdentitySpec& spec, Identity id, double dx, double dy,
                           double intensity_shift, double mouth_shift) {
  constexpr double kBackground = 0.05;
  constexpr double kFeature = 0.1;
  constexpr double kEyeRadius = 0.9;
  constexpr double kMouthHalfWidth = 2.5;
  TinyFaceSample s;
  s.identity = id;
  s.jitter = {dx, dy, intensity_shift, mouth_shift};
  const double cx = (kFaceSide - 1) / 2.0 + dx;
  const double cy = (kFaceSide - 1) / 2.0 + dy;
  const double skin = std::clamp(spec.base_intensity + intensity_shift, 0.0, 1.0);
  const double curvature = spec.mouth_curvature + mouth_shift;
  const double rmin = std::min(spec.face_rx, spec.face_ry);

  for (int y = 0; y < kFaceSide; ++y) {
    for (int x = 0; x < kFaceSide; ++x) {
      const double u = (x - cx) / spec.face_rx;
      const double v = (y - cy) / spec.face_ry;
      const double face = coverage((std::sqrt(u * u + v * v) - 1.0) * rmin);
      double value = kBackground + (skin - kBackground) * face;

      double feature = 0.0;
      for (double side : {-0.5, 0.5}) {
        const double ex = cx + side * spec.eye_spacing;
        const double ey = cy + spec.eye_height;
        feature = std::max(feature, coverage(std::hypot(x - ex, y - ey) - kEyeRadius));
      }
      const double mu = (x - cx) / kMouthHalfWidth;
      if (std::abs(mu) <= 1.0) {
        const double mouth_y = cy + 2.8 + curvature * (1.0 - mu * mu);
        feature = std::max(feature, std::clamp(1.0 - std::abs(y - mouth_y) / 0.8, 0.0, 1.0));
      }
      value += (kFeature - value) * feature * face;
      s.pixels(y * kFaceSide + x) = std::clamp(value, 0.0, 1.0);
    }
  }
  return s;
}

std::vector<TinyFaceSample> gen_identity_dataset(const IdentitySpec& spec_x,
                                                 const IdentitySpec& spec_y,
                                                 std::size_t n_per_identity,
                                                 std::uint64_t seed) {
  if (n_per_identity < 1) throw ConfigError("gen_identity_dataset needs n >= 1");
  spec_x.validate();
  spec_y.validate();
  Rng rng(seed);
  std::vector<TinyFaceSample> out;
  out.reserve(2 * n_per_identity);
  for (Identity id : {Identity::x, Identity::y}) {
    const IdentitySpec& spec = id == Identity::x ? spec_x : spec_y;
    for (std::size_t i = 0; i < n_per_identity; ++i) {
      const double dx = rng.uniform(-spec.jitter_shift, spec.jitter_shift);
      const double dy = rng.uniform(-spec.jitter_shift, spec.jitter_shift);
      const double di = rng.uniform(-spec.jitter_intensity, spec.jitter_intensity);
      const double dm = rng.uniform(-spec.jitter_mouth, spec.jitter_mouth);
      out.push_back(render_face(spec, id, dx, dy, di, dm));
    }
  }
  return out;
}

}  // namespace deid
