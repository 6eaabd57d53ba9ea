#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "deid/identity.hpp"
#include "deid/keypoints.hpp"
#include "deid/swap_model.hpp"

namespace deid {

// ---- descriptor clusters ---------------------------------------------------

struct ClusterSpec {
  std::string label;
  Vector centroid;
  double sigma = 0.0;  // per-axis std on the noisy axes
  std::size_t count = 1;
  std::size_t first_noisy_axis = 0;  // axes below this stay at the centroid
};

struct DescriptorClusterSpec {
  std::size_t dimension = 128;
  std::vector<ClusterSpec> subsets;

  void validate() const;
};

// Members are the centroid plus i.i.d. N(0, sigma^2) on every axis from
// first_noisy_axis on; ids are "<label>_<index>".
std::vector<FaceDescriptor> gen_descriptor_clusters(const DescriptorClusterSpec& spec,
                                                    std::uint64_t seed);

// E|z| for z ~ N(0, I_d): the mean of a chi distribution with d degrees of freedom.
double chi_mean(std::size_t d);

// Per-axis sigma whose expected member-to-centroid distance is `intra_mean`.
double sigma_for_intra_mean(double intra_mean, std::size_t dimension);

// Three subsets (swapped_F, original_F, original_A) whose distance table
// reproduces a successful swap: mean member-to-own-centroid distance
// `intra_mean`, mean swapped-to-target-centroid distance `to_target`, mean
// swapped-to-original-centroid distance `to_original`, mean
// original-to-target-centroid distance `original_to_target`. The centroids
// lie in the plane of axes 0 and 1 and noise lives only on the remaining
// axes, so a member's distance to another centroid is sqrt(c^2 + r^2) with
// r its own noise norm; centroid separations c are set so these means land
// on the requested values and the spread stays small.
struct SwapGeometry {
  double intra_mean = 0.19;
  double to_target = 0.46;
  double to_original = 0.63;
  double original_to_target = 0.756;
  std::size_t count = 500;
  std::size_t dimension = 128;
};
DescriptorClusterSpec swap_cluster_spec(const SwapGeometry& geometry);

// ---- keypoints -------------------------------------------------------------

struct FrameSize {
  int width = 640;
  int height = 480;
};

// Upright COCO17 template in units of person height, origin at the nose.
const std::vector<Keypoint>& skeleton_template();

struct SkeletonPlacement {
  double min_height_fraction = 0.5;  // of frame height
  double max_height_fraction = 0.9;
};

// Template scaled and translated inside the frame; confidences in [0.5, 1].
std::vector<KeypointInstance> gen_keypoint_instances(std::size_t n, FrameSize frame,
                                                     std::uint64_t seed,
                                                     SkeletonPlacement placement = {});

struct PerturbationModel {
  double head_sigma = 0.0;  // pixels; nose, eyes, ears
  double body_sigma = 0.0;  // pixels; everything else
  double head_dropout = 0.0;
  double body_dropout = 0.0;

  void validate() const;
};

// Gaussian displacement per coordinate; a dropped keypoint becomes (0, 0, 0).
std::vector<KeypointInstance> perturb_keypoints(const std::vector<KeypointInstance>& instances,
                                                const PerturbationModel& model,
                                                std::uint64_t seed);

// BODY25 instance whose COCO17 slots are `coco`; neck, mid-hip and feet are
// synthesized from the shoulders, hips and ankles.
KeypointInstance lift_coco17_to_body25(const KeypointInstance& coco);

// ---- toy faces -------------------------------------------------------------

struct IdentitySpec {
  double face_rx = 5.5;  // ellipse half-axes, pixels
  double face_ry = 6.5;
  double eye_spacing = 5.0;
  double eye_height = -1.5;  // relative to face centre, pixels
  double mouth_curvature = 0.6;  // > 0 smiles
  double base_intensity = 0.75;
  // Uniform jitter half-ranges per sample.
  double jitter_shift = 0.3;
  double jitter_intensity = 0.05;
  double jitter_mouth = 0.3;

  void validate() const;
};

IdentitySpec default_identity_x();
IdentitySpec default_identity_y();

TinyFaceSample render_face(const IdentitySpec& spec, Identity id, double dx, double dy,
                           double intensity_shift, double mouth_shift);

// n samples of X followed by n samples of Y.
std::vector<TinyFaceSample> gen_identity_dataset(const IdentitySpec& spec_x,
                                                 const IdentitySpec& spec_y,
                                                 std::size_t n_per_identity,
                                                 std::uint64_t seed);

}  // namespace deid
