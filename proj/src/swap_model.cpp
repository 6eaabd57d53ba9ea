#include "deid/swap_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>

#include "deid/error.hpp"
#include "deid/rng.hpp"

namespace deid {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

Eigen::MatrixXd leaky_relu(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
}

Eigen::MatrixXd leaky_relu_slope(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : kLeakySlope; });
}

Eigen::MatrixXd logistic(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Eigen::MatrixXd affine(const DenseLayer& layer, const Eigen::MatrixXd& in) {
  return (layer.weight * in).colwise() + layer.bias;
}

void glorot(DenseLayer& layer, Rng& rng) {
  const double bound =
      std::sqrt(6.0 / static_cast<double>(layer.weight.rows() + layer.weight.cols()));
  // Row-major draw order, documented for reproducibility across storage orders.
  for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
      layer.weight(r, c) = rng.uniform(-bound, bound);
  layer.bias.setZero();
}

// Activations kept for the backward pass.
struct Forward {
  Eigen::MatrixXd enc_pre, enc_hidden, latent, dec_pre, dec_hidden, output;
};

Forward forward(const SwapParams& p, const Batch& x, Identity id) {
  Forward f;
  f.enc_pre = affine(p.encoder.hidden, x);
  f.enc_hidden = leaky_relu(f.enc_pre);
  f.latent = affine(p.encoder.latent, f.enc_hidden);
  const Decoder& dec = p.decoder(id);
  f.dec_pre = affine(dec.hidden, f.latent);
  f.dec_hidden = leaky_relu(f.dec_pre);
  f.output = logistic(affine(dec.output, f.dec_hidden));
  return f;
}

void check_batch(const Batch& b) {
  if (b.cols() == 0) throw DataError("empty batch");
  if (b.rows() != kFacePixels)
    throw DataError("batch rows must equal " + std::to_string(kFacePixels) + " pixels");
}


// Checkpoint tensor table: name, and accessors for the matrix/vector storage.
struct TensorRef {
  std::string name;
  double* data;
  Eigen::Index rows;
  Eigen::Index cols;
};

std::vector<TensorRef> tensor_table(SwapParams& p) {
  std::vector<TensorRef> t;
  auto add_layer = [&](const std::string& prefix, DenseLayer& l) {
    t.push_back({prefix + ".weight", l.weight.data(), l.weight.rows(), l.weight.cols()});
    t.push_back({prefix + ".bias", l.bias.data(), l.bias.rows(), 1});
  };
  add_layer("encoder.hidden", p.encoder.hidden);
  add_layer("encoder.latent", p.encoder.latent);
  add_layer("decoder_x.hidden", p.decoder_x.hidden);
  add_layer("decoder_x.output", p.decoder_x.output);
  add_layer("decoder_y.hidden", p.decoder_y.hidden);
  add_layer("decoder_y.output", p.decoder_y.output);
  return t;
}

constexpr char kMagic[8] = {'D', 'E', 'I', 'D', 'S', 'W', 'A', 'P'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& path) : bytes_(bytes), path_(path) {}

  template <typename T>
  T get(const char* what) {
    if (pos_ + sizeof(T) > bytes_.size())
      throw ParseError(path_, std::string("truncated checkpoint reading ") + what, pos_);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string get_bytes(std::size_t n, const char* what) {
    if (pos_ + n > bytes_.size())
      throw ParseError(path_, std::string("truncated checkpoint reading ") + what, pos_);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  const std::string& path_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<Eigen::Map<Eigen::VectorXd>> SwapParams::tensors() {
  std::vector<Eigen::Map<Eigen::VectorXd>> out;
  for (const TensorRef& t : tensor_table(*this)) out.emplace_back(t.data, t.rows * t.cols);
  return out;
}

std::size_t SwapParams::parameter_count() const {
  auto layer = [](const DenseLayer& l) { return l.weight.size() + l.bias.size(); };
  auto dec = [&](const Decoder& d) { return layer(d.hidden) + layer(d.output); };
  return static_cast<std::size_t>(layer(encoder.hidden) + layer(encoder.latent) +
                                  dec(decoder_x) + dec(decoder_y));
}

SwapParams MomentumState::zero_params() { return SwapParams{}; }

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("learning_rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
}

SwapModel init_model(std::uint64_t seed) {
  SwapModel m;
  m.seed = seed;
  Rng rng(seed);
  glorot(m.params.encoder.hidden, rng);
  glorot(m.params.encoder.latent, rng);
  glorot(m.params.decoder_x.hidden, rng);
  glorot(m.params.decoder_x.output, rng);
  glorot(m.params.decoder_y.hidden, rng);
  glorot(m.params.decoder_y.output, rng);
  return m;
}

Batch make_batch(std::span<const TinyFaceSample> samples) {
  Batch b(kFacePixels, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i)
    b.col(static_cast<Eigen::Index>(i)) = samples[i].pixels;
  return b;
}

Eigen::VectorXd encode(const SwapModel& model, const Eigen::VectorXd& pixels) {
  const Encoder& e = model.params.encoder;
  return affine(e.latent, leaky_relu(affine(e.hidden, pixels)));
}

Eigen::VectorXd decode(const SwapModel& model, const Eigen::VectorXd& latent, Identity id) {
  const Decoder& d = model.params.decoder(id);
  return logistic(affine(d.output, leaky_relu(affine(d.hidden, latent))));
}

Batch reconstruct(const SwapModel& model, const Batch& inputs, Identity id) {
  return forward(model.params, inputs, id).output;
}

double reconstruction_loss(const SwapModel& model, const Batch& inputs, Identity id) {
  check_batch(inputs);
  return (reconstruct(model, inputs, id) - inputs).squaredNorm() /
         static_cast<double>(inputs.size());
}

LossAndGradient loss_gradient(const SwapModel& model, const Batch& x, Identity id) {
  check_batch(x);
  const SwapParams& p = model.params;
  const Decoder& dec = p.decoder(id);
  const Forward f = forward(p, x, id);

  LossAndGradient out;
  out.gradient = MomentumState::zero_params();
  const Eigen::MatrixXd diff = f.output - x;
  const double n = static_cast<double>(x.size());
  out.loss = diff.squaredNorm() / n;

  // d loss / d logits of the output layer
  const Eigen::MatrixXd d_out =
      (2.0 / n) * diff.cwiseProduct(f.output.cwiseProduct((1.0 - f.output.array()).matrix()));
  Decoder& gdec = out.gradient.decoder(id);
  gdec.output.weight = d_out * f.dec_hidden.transpose();
  gdec.output.bias = d_out.rowwise().sum();

  const Eigen::MatrixXd d_dec_pre =
      (dec.output.weight.transpose() * d_out).cwiseProduct(leaky_relu_slope(f.dec_pre));
  gdec.hidden.weight = d_dec_pre * f.latent.transpose();
  gdec.hidden.bias = d_dec_pre.rowwise().sum();

  const Eigen::MatrixXd d_latent = dec.hidden.weight.transpose() * d_dec_pre;
  Encoder& genc = out.gradient.encoder;
  genc.latent.weight = d_latent * f.enc_hidden.transpose();
  genc.latent.bias = d_latent.rowwise().sum();

  const Eigen::MatrixXd d_enc_pre = (p.encoder.latent.weight.transpose() * d_latent)
                                        .cwiseProduct(leaky_relu_slope(f.enc_pre));
  genc.hidden.weight = d_enc_pre * x.transpose();
  genc.hidden.bias = d_enc_pre.rowwise().sum();
  return out;
}

StepLoss train_step(SwapModel& model, MomentumState& state, const Batch& batch_x,
                    const Batch& batch_y, const TrainConfig& cfg, std::size_t step) {
  // A zero rate is allowed here (a no-op update); configs go through validate().
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate))
    throw ConfigError("learning_rate must be finite and non-negative");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  LossAndGradient gx = loss_gradient(model, batch_x, Identity::x);
  LossAndGradient gy = loss_gradient(model, batch_y, Identity::y);
  if (!std::isfinite(gx.loss) || !std::isfinite(gy.loss))
    throw DivergenceError(step, "non-finite loss (x=" + std::to_string(gx.loss) +
                                    ", y=" + std::to_string(gy.loss) + ")");

  auto params = model.params.tensors();
  auto vel = state.velocity.tensors();
  auto grad_x = gx.gradient.tensors();
  auto grad_y = gy.gradient.tensors();
  for (std::size_t t = 0; t < params.size(); ++t) {
    vel[t] = cfg.momentum * vel[t] - cfg.learning_rate * (grad_x[t] + grad_y[t]);
    params[t] += vel[t];
  }
  return {gx.loss, gy.loss};
}

namespace {

// Endless stream of indices drawn from successive shuffled epochs.
class EpochSampler {
 public:
  EpochSampler(std::vector<std::size_t> pool, Rng& rng) : pool_(std::move(pool)), rng_(rng) {
    reshuffle();
  }

  std::size_t next() {
    if (cursor_ == pool_.size()) reshuffle();
    return pool_[cursor_++];
  }

 private:
  void reshuffle() {
    for (std::size_t i = pool_.size(); i > 1; --i)
      std::swap(pool_[i - 1], pool_[rng_.below(i)]);
    cursor_ = 0;
  }

  std::vector<std::size_t> pool_;
  Rng& rng_;
  std::size_t cursor_ = 0;
};

}  // namespace

std::vector<StepLoss> train(SwapModel& model, std::span<const TinyFaceSample> dataset,
                            const TrainConfig& cfg) {
  cfg.validate();
  std::vector<std::size_t> xs, ys;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    (dataset[i].identity == Identity::x ? xs : ys).push_back(i);
  if (xs.empty() || ys.empty()) throw DataError("training set must contain both identities");

  Rng rng(cfg.seed);
  EpochSampler sample_x(std::move(xs), rng);
  EpochSampler sample_y(std::move(ys), rng);
  MomentumState state;
  std::vector<StepLoss> history;
  history.reserve(cfg.steps);
  const auto cols = static_cast<Eigen::Index>(cfg.batch_size);
  Batch bx(kFacePixels, cols), by(kFacePixels, cols);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    for (Eigen::Index c = 0; c < cols; ++c) bx.col(c) = dataset[sample_x.next()].pixels;
    for (Eigen::Index c = 0; c < cols; ++c) by.col(c) = dataset[sample_y.next()].pixels;
    history.push_back(train_step(model, state, bx, by, cfg, step));
  }
  return history;
}

Eigen::VectorXd swap(const SwapModel& model, const TinyFaceSample& sample_of_x) {
  return decode(model, encode(model, sample_of_x.pixels), Identity::y);
}

void save_checkpoint(const SwapModel& model, const std::filesystem::path& path) {
  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, model.seed);
  SwapParams copy = model.params;
  const auto table = tensor_table(copy);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(table.size()));
  for (const TensorRef& t : table) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rows));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.cols));
    out.append(reinterpret_cast<const char*>(t.data),
               static_cast<std::size_t>(t.rows * t.cols) * sizeof(double));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError(path.string() + ": cannot open for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError(path.string() + ": write failed");
}

SwapModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError(path.string() + ": cannot open for reading");
  const std::string bytes{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  const std::string name = path.string();
  Reader r(bytes, name);
  if (r.get_bytes(sizeof kMagic, "magic") != std::string(kMagic, sizeof kMagic))
    throw ParseError(name, "not a swap-model checkpoint", 0);
  const std::size_t version_at = r.pos();
  if (const auto v = r.get<std::uint32_t>("version"); v != kCheckpointVersion)
    throw ParseError(name, "unsupported checkpoint version " + std::to_string(v), version_at);

  SwapModel model;
  model.seed = r.get<std::uint64_t>("seed");
  const auto table = tensor_table(model.params);
  const std::size_t count_at = r.pos();
  if (r.get<std::uint32_t>("tensor count") != table.size())
    throw ParseError(name, "unexpected tensor count", count_at);
  for (const TensorRef& t : table) {
    const std::size_t at = r.pos();
    const auto len = r.get<std::uint32_t>("name length");
    if (r.get_bytes(len, "tensor name") != t.name)
      throw ParseError(name, "expected tensor '" + t.name + "'", at);
    const auto rows = r.get<std::uint32_t>("rows");
    const auto cols = r.get<std::uint32_t>("cols");
    if (rows != t.rows || cols != t.cols)
      throw ParseError(name, "shape mismatch for '" + t.name + "'", at);
    const std::string raw =
        r.get_bytes(static_cast<std::size_t>(rows) * cols * sizeof(double), "tensor data");
    std::memcpy(t.data, raw.data(), raw.size());
  }
  if (!r.done()) throw ParseError(name, "trailing bytes after last tensor", r.pos());
  return model;
}

}  // namespace deid
