#pragma once

// Finite-difference check of the whole training loss (forward, residual add,
// element-mean MSE) against backward(). Perturbing a parameter of layer i
// only re-runs layers i..n-1 from the cached input of layer i.

#include <algorithm>
#include <cmath>
#include <vector>

#include "sdcnn/kernels.hpp"
#include "sdcnn/model.hpp"
#include "sdcnn/trainer.hpp"
#include "support.hpp"

namespace testing {

struct GradCheckStats {
  std::size_t count = 0;
  std::size_t within_1e4 = 0;
  double worst = 0.0;
  double fraction_within_1e4() const { return count ? static_cast<double>(within_1e4) / count : 0.0; }
};

// |a - n| / max(|a|, |n|, floor). The floor keeps parameters whose true
// gradient is a few ulps of the loss from dominating through rounding noise.
inline double gradient_error(double analytic, double numeric, double floor = 1e-8) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

inline double network_loss(const sdcnn::NetworkSpec& spec, const std::vector<sdcnn::LayerParams<double>>& params,
                           std::size_t first, const TensorD& layer_input, const TensorD& input, const TensorD& truth) {
  TensorD x = layer_input;
  for (std::size_t i = first; i < spec.layers.size(); ++i) {
    const sdcnn::LayerSpec& l = spec.layers[i];
    x = l.kind == sdcnn::LayerKind::Conv
            ? sdcnn::conv2d_forward(x, params[i].weights, params[i].bias, l.stride, l.pad())
            : sdcnn::deconv2d_forward(x, params[i].weights, params[i].bias, l.stride, l.pad());
    if (l.activation == sdcnn::Activation::Relu) sdcnn::relu_inplace(x);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] + input[i] - truth[i];
    sum += d * d;
  }
  return sum / static_cast<double>(x.size());
}

inline GradCheckStats check_network_gradients(const sdcnn::NetworkSpec& spec,
                                              std::vector<sdcnn::LayerParams<double>> params, const TensorD& input,
                                              const TensorD& truth, double h) {
  auto fwd = sdcnn::forward<double>(spec, params, input, true);
  auto loss = sdcnn::mse_loss<double>(std::span<const TensorD>(&fwd.output, 1), std::span<const TensorD>(&truth, 1));
  const auto grads = sdcnn::backward<double>(spec, params, fwd.cache, loss.d_pred.front());

  GradCheckStats stats;
  auto record = [&](double analytic, double numeric) {
    const double e = gradient_error(analytic, numeric);
    ++stats.count;
    if (e <= 1e-4) ++stats.within_1e4;
    stats.worst = std::max(stats.worst, e);
  };
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const TensorD& layer_input = fwd.cache.inputs[l];
    auto f = [&] { return network_loss(spec, params, l, layer_input, input, truth); };
    const TensorD nw = numeric_gradient(params[l].weights, f, h);
    const TensorD nb = numeric_gradient(params[l].bias, f, h);
    for (std::size_t i = 0; i < nw.size(); ++i) record(grads[l].weights[i], nw[i]);
    for (std::size_t i = 0; i < nb.size(); ++i) record(grads[l].bias[i], nb[i]);
  }
  return stats;
}

// He weights and small random biases, so ReLUs sit in a mixed on/off state.
inline std::vector<sdcnn::LayerParams<double>> gradcheck_params(const sdcnn::NetworkSpec& spec, std::uint64_t seed) {
  const sdcnn::Checkpoint ckpt = sdcnn::build_network(spec, sdcnn::InitStrategy::he(), seed);
  auto params = sdcnn::cast_params<double>(ckpt.layers);
  for (std::size_t l = 0; l < params.size(); ++l) {
    params[l].bias = random_tensor(params[l].bias.shape(), seed + 100 + l, -0.1, 0.1);
  }
  return params;
}

}  // namespace testing
