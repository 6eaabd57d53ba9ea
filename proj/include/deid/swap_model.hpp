#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace deid {

enum class Identity { x, y };

inline constexpr int kFaceSide = 16;
inline constexpr int kFacePixels = kFaceSide * kFaceSide;
inline constexpr int kHiddenUnits = 64;
inline constexpr int kLatentUnits = 16;
inline constexpr double kLeakySlope = 0.01;

// 16x16 single-channel face with values in [0, 1], row-major.
struct TinyFaceSample {
  Eigen::VectorXd pixels = Eigen::VectorXd::Zero(kFacePixels);
  Identity identity = Identity::x;
  // Per-sample jitter drawn by the generator: dx, dy, intensity, mouth.
  std::vector<double> jitter;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;

  DenseLayer() = default;
  DenseLayer(int in, int out)
      : weight(Eigen::MatrixXd::Zero(out, in)), bias(Eigen::VectorXd::Zero(out)) {}
  bool operator==(const DenseLayer& o) const { return weight == o.weight && bias == o.bias; }
};

// 256 -> 64 (leaky ReLU) -> 16
struct Encoder {
  DenseLayer hidden{kFacePixels, kHiddenUnits};
  DenseLayer latent{kHiddenUnits, kLatentUnits};
  bool operator==(const Encoder&) const = default;
};

// 16 -> 64 (leaky ReLU) -> 256 (logistic)
struct Decoder {
  DenseLayer hidden{kLatentUnits, kHiddenUnits};
  DenseLayer output{kHiddenUnits, kFacePixels};
  bool operator==(const Decoder&) const = default;
};

// One shared encoder and a decoder per identity. Also used as the gradient
// and momentum container, since it has the same shape.
struct SwapParams {
  Encoder encoder;
  Decoder decoder_x;
  Decoder decoder_y;

  const Decoder& decoder(Identity id) const { return id == Identity::x ? decoder_x : decoder_y; }
  Decoder& decoder(Identity id) { return id == Identity::x ? decoder_x : decoder_y; }

  // Every weight and bias tensor, in a fixed order.
  std::vector<Eigen::Map<Eigen::VectorXd>> tensors();
  std::size_t parameter_count() const;
  bool operator==(const SwapParams&) const = default;
};

struct SwapModel {
  SwapParams params;
  std::uint64_t seed = 0;
  bool operator==(const SwapModel&) const = default;
};

struct TrainConfig {
  std::size_t batch_size = 64;
  double learning_rate = 2.0;
  double momentum = 0.9;
  std::size_t steps = 500;
  std::uint64_t seed = 1;

  void validate() const;
};

// Glorot-uniform weights (bound sqrt(6 / (fan_in + fan_out))), zero biases.
SwapModel init_model(std::uint64_t seed);

// One sample per column.
using Batch = Eigen::MatrixXd;
Batch make_batch(std::span<const TinyFaceSample> samples);

Eigen::VectorXd encode(const SwapModel& model, const Eigen::VectorXd& pixels);
Eigen::VectorXd decode(const SwapModel& model, const Eigen::VectorXd& latent, Identity id);
Batch reconstruct(const SwapModel& model, const Batch& inputs, Identity id);

// Mean squared error over batch and pixels.
double reconstruction_loss(const SwapModel& model, const Batch& inputs, Identity id);

struct LossAndGradient {
  double loss = 0.0;
  SwapParams gradient;  // zero outside the encoder and the identity's decoder
};
LossAndGradient loss_gradient(const SwapModel& model, const Batch& inputs, Identity id);

struct StepLoss {
  double loss_x = 0.0;
  double loss_y = 0.0;
};

// Velocity for gradient descent with momentum; same shape as the model.
struct MomentumState {
  SwapParams velocity = zero_params();
  static SwapParams zero_params();
};

// One update on loss_x + loss_y. Returns the pre-update losses. `step` only
// labels a divergence error.
StepLoss train_step(SwapModel& model, MomentumState& state, const Batch& batch_x,
                    const Batch& batch_y, const TrainConfig& cfg, std::size_t step = 0);

// cfg.steps updates over per-identity batches drawn from reshuffled epochs.
std::vector<StepLoss> train(SwapModel& model, std::span<const TinyFaceSample> dataset,
                            const TrainConfig& cfg);

// Encoder of the input, decoder of identity Y.
Eigen::VectorXd swap(const SwapModel& model, const TinyFaceSample& sample_of_x);

void save_checkpoint(const SwapModel& model, const std::filesystem::path& path);
SwapModel load_checkpoint(const std::filesystem::path& path);

}  // namespace deid
