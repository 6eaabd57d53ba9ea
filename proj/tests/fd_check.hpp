// Compares the library's analytic gradients with extended-precision central
// differences from oracle::FdNet.
#pragma once

#include <cmath>
#include <functional>

#include "deid/swap_model.hpp"
#include "oracles.hpp"

namespace testing {

inline oracle::FdNet fd_net(const deid::SwapModel& m, const deid::Batch& batch, deid::Identity id) {
  const auto& e = m.params.encoder;
  const auto& d = m.params.decoder(id);
  const deid::DenseLayer* layers[4] = {&e.hidden, &e.latent, &d.hidden, &d.output};
  std::array<std::vector<double>, 4> w, b;
  for (int l = 0; l < 4; ++l) {
    const auto& wt = layers[l]->weight;
    for (Eigen::Index r = 0; r < wt.rows(); ++r)
      for (Eigen::Index c = 0; c < wt.cols(); ++c) w[l].push_back(wt(r, c));
    b[l].assign(layers[l]->bias.data(), layers[l]->bias.data() + layers[l]->bias.size());
  }
  std::vector<std::vector<double>> inputs;
  for (Eigen::Index s = 0; s < batch.cols(); ++s)
    inputs.emplace_back(batch.col(s).data(), batch.col(s).data() + batch.rows());
  return oracle::FdNet(w, b, inputs);
}

struct FdResult {
  double worst = 0;
  std::size_t checked = 0;
};

// Tensors of SwapParams::tensors(): 0-3 encoder, 4-7 decoder_x, 8-11
// decoder_y, each (weight, bias) per layer, weights column-major.
// `take(t, i)` selects which entries are compared.
inline FdResult fd_compare(const deid::SwapModel& m, const deid::Batch& batch, deid::Identity id,
                           deid::SwapParams& gradient, double eps,
                           const std::function<bool(std::size_t, Eigen::Index)>& take) {
  const oracle::FdNet net = fd_net(m, batch, id);
  const std::size_t base = id == deid::Identity::x ? 4 : 8;
  const std::size_t tensor_of_layer[4][2] = {{0, 1}, {2, 3}, {base, base + 1}, {base + 2, base + 3}};
  auto grads = gradient.tensors();
  FdResult r;
  for (int l = 0; l < 4; ++l) {
    const std::size_t in = oracle::FdNet::kDims[l], out = oracle::FdNet::kDims[l + 1];
    for (int part = 0; part < 2; ++part) {
      const std::size_t t = tensor_of_layer[l][part];
      for (Eigen::Index i = 0; i < grads[t].size(); ++i) {
        if (!take(t, i)) continue;
        const std::size_t row = static_cast<std::size_t>(i) % out, col = static_cast<std::size_t>(i) / out;
        const std::size_t index = part == 0 ? row * in + col : out * in + static_cast<std::size_t>(i);
        const double numeric = net.gradient(l, index, eps), analytic = grads[t](i);
        const double scale = std::max(std::abs(numeric), std::abs(analytic));
        if (scale > 0) r.worst = std::max(r.worst, std::abs(numeric - analytic) / scale);
        ++r.checked;
      }
    }
  }
  return r;
}

}  // namespace testing
