#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "deid/identity.hpp"
#include "deid/keypoints.hpp"
#include "deid/raster.hpp"

namespace deid {

// ---- pose JSON -------------------------------------------------------------
// {"version": 1.3, "people": [{"pose_keypoints_2d": [x0, y0, c0, x1, ...]}]}

struct PoseParseOptions {
  // With several people, keep the one with the largest keypoint bounding box
  // instead of failing.
  bool select_largest = false;
};

// frame_id is taken from the file stem; the skeleton from the triple count.
KeypointInstance parse_pose_json(const std::filesystem::path& path,
                                 const PoseParseOptions& options = {});
KeypointInstance parse_pose_json_text(const std::string& text, const std::string& frame_id,
                                      const std::string& source_name,
                                      const PoseParseOptions& options = {});

std::string pose_json_text(const std::vector<KeypointInstance>& people);
void write_pose_json(const KeypointInstance& instance, const std::filesystem::path& path);

// ---- face-box manifest: frame_id,x,y,w,h -----------------------------------

using FaceBoxManifest = std::map<std::string, FaceBox>;

FaceBoxManifest parse_facebox_manifest(const std::filesystem::path& path);
void write_facebox_manifest(const FaceBoxManifest& manifest, const std::filesystem::path& path);

// ---- descriptor CSV: id,subset,d0,...,d{D-1} -------------------------------

std::vector<FaceDescriptor> read_descriptor_csv(const std::filesystem::path& path);
void write_descriptor_csv(const std::vector<FaceDescriptor>& descriptors,
                          const std::filesystem::path& path);

// Groups by subset label; every descriptor must share one dimension.
std::map<std::string, std::vector<FaceDescriptor>> group_by_subset(
    const std::vector<FaceDescriptor>& descriptors);

// ---- frame pairing: swapped_id,original_id ---------------------------------

std::map<std::string, std::string> read_pairing_csv(const std::filesystem::path& path);
void write_pairing_csv(const std::map<std::string, std::string>& pairing,
                       const std::filesystem::path& path);

// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

}  // namespace deid
