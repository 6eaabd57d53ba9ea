#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace deid {

enum class Skeleton { coco17, body25 };

inline constexpr std::size_t kCocoKeypoints = 17;
inline constexpr std::size_t kBody25Keypoints = 25;

std::size_t keypoint_count(Skeleton skeleton);
std::string_view skeleton_name(Skeleton skeleton);

// COCO17 keypoint names in index order.
inline constexpr std::array<std::string_view, kCocoKeypoints> kCocoKeypointNames = {
    "nose",           "left_eye",       "right_eye",  "left_ear",    "right_ear",
    "left_shoulder",  "right_shoulder", "left_elbow", "right_elbow", "left_wrist",
    "right_wrist",    "left_hip",       "right_hip",  "left_knee",   "right_knee",
    "left_ankle",     "right_ankle"};

// Nose, eyes and ears.
constexpr bool is_head_keypoint(std::size_t coco_index) { return coco_index < 5; }

// COCO17 slot i takes BODY25 index kBody25ForCoco[i].
inline constexpr std::array<std::size_t, kCocoKeypoints> kBody25ForCoco = {
    0, 16, 15, 18, 17, 5, 2, 6, 3, 7, 4, 12, 9, 13, 10, 14, 11};

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;  // 0 marks an undetected keypoint

  bool operator==(const Keypoint&) const = default;
};

struct KeypointInstance {
  std::string frame_id;
  Skeleton skeleton = Skeleton::coco17;
  std::vector<Keypoint> points;

  // Throws DataError when the point count or a confidence is out of range.
  void validate() const;
  bool operator==(const KeypointInstance&) const = default;
};

KeypointInstance map_body25_to_coco17(const KeypointInstance& kp);

}  // namespace deid
