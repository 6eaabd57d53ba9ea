#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "deid/identity.hpp"
#include "deid/oks.hpp"
#include "deid/swap_model.hpp"

namespace deid {

namespace fs = std::filesystem;

struct DeidSection {
  fs::path frames;
  fs::path manifest;
};

struct SwapSection {
  TrainConfig train;
  std::size_t samples_per_identity = 256;
  std::size_t held_out = 64;
  std::optional<fs::path> model;   // checkpoint for swap-apply
  std::optional<fs::path> inputs;  // directory of 16x16 grayscale faces
};

struct KeypointSection {
  fs::path original;
  std::map<std::string, fs::path> methods;
  ApMode mode = ApMode::fraction;
  bool select_largest = false;
  OksConfig oks;
};

struct IdentitySection {
  fs::path descriptors;
  std::optional<fs::path> pairing;
  std::string target = "original_A";
  PairingMode pairing_mode = PairingMode::frame;
  double threshold = kDefaultMatchThreshold;
};

// Sectioned key = value file. Relative paths resolve against the config
// file's directory. Unknown sections and keys are errors.
//
//   [run]        seed, out
//   [deid]       frames, manifest
//   [swap]       steps, batch_size, learning_rate, momentum,
//                samples_per_identity, held_out, model, inputs
//   [keypoints]  original, mode, select_largest
//   [methods]    <name> = <pose directory>, one per de-identification method
//   [oks]        scale_factor, visibility_threshold, thresholds, kappas
//   [identity]   descriptors, pairing, target, pairing_mode, threshold
struct PipelineConfig {
  fs::path source;
  std::string sha256;  // of the config file bytes
  std::uint64_t seed = 1;
  std::optional<fs::path> out;
  std::optional<DeidSection> deid;
  std::optional<SwapSection> swap;
  std::optional<KeypointSection> keypoints;
  std::optional<IdentitySection> identity;

  static PipelineConfig load(const fs::path& path);
  static PipelineConfig parse(const std::string& text, const fs::path& base_dir,
                              const std::string& source_name);
};

std::string sha256_hex(const std::string& bytes);

}  // namespace deid
