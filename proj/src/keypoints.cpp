#include "deid/keypoints.hpp"

#include <cmath>

#include "deid/error.hpp"

namespace deid {

std::size_t keypoint_count(Skeleton skeleton) {
  return skeleton == Skeleton::coco17 ? kCocoKeypoints : kBody25Keypoints;
}

std::string_view skeleton_name(Skeleton skeleton) {
  return skeleton == Skeleton::coco17 ? "COCO17" : "BODY25";
}

void KeypointInstance::validate() const {
  if (points.size() != keypoint_count(skeleton))
    throw DataError("frame '" + frame_id + "': " + std::string(skeleton_name(skeleton)) +
                    " instance has " + std::to_string(points.size()) + " points, expected " +
                    std::to_string(keypoint_count(skeleton)));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Keypoint& p = points[i];
    if (!(p.confidence >= 0.0 && p.confidence <= 1.0) || !std::isfinite(p.x) ||
        !std::isfinite(p.y))
      throw DataError("frame '" + frame_id + "': keypoint " + std::to_string(i) +
                      " has invalid coordinates or confidence");
  }
}

KeypointInstance map_body25_to_coco17(const KeypointInstance& kp) {
  if (kp.skeleton != Skeleton::body25)
    throw DataError("frame '" + kp.frame_id + "': expected a BODY25 instance, got " +
                    std::string(skeleton_name(kp.skeleton)));
  kp.validate();
  KeypointInstance out;
  out.frame_id = kp.frame_id;
  out.skeleton = Skeleton::coco17;
  out.points.reserve(kCocoKeypoints);
  for (std::size_t src : kBody25ForCoco) out.points.push_back(kp.points[src]);
  return out;
}

}  // namespace deid
