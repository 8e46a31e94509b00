#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sdcnn/frame.hpp"
#include "sdcnn/tensor.hpp"

namespace sdcnn {

enum class LayerKind : std::uint8_t { Conv = 0, Deconv = 1 };
enum class Activation : std::uint8_t { Linear = 0, Relu = 1 };

struct LayerSpec {
  LayerKind kind = LayerKind::Conv;
  int in_channels = 1;
  int out_channels = 1;
  int kernel = 1;
  int stride = 1;
  Activation activation = Activation::Relu;

  // "Same" zero padding.
  int pad() const { return (kernel - 1) / 2; }
  // [Cout,Cin,k,k] for conv, [Cin,Cout,k,k] for deconv.
  Shape weight_shape() const;
  std::size_t weight_count() const;
  std::string to_string() const;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct NetworkSpec {
  std::vector<LayerSpec> layers;
  bool residual = true;

  // Throws ShapeMismatch / InvalidArgument naming the first offending layer.
  void validate() const;
  // Spatial extents fed to forward() must be multiples of this.
  int downscale_factor() const;
  std::size_t weight_count() const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// 64(9) - 32(3) - 16(5) - 32(3) - 64[3] - 1[9], stride 2 on layers 2 and 6,
// residual skip from input to output.
NetworkSpec sdcnn_default_spec();

template <typename T>
struct LayerParams {
  BasicTensor<T> weights;
  BasicTensor<T> bias;
};

template <typename T>
using LayerGrads = LayerParams<T>;

struct Checkpoint {
  NetworkSpec spec;
  std::vector<LayerParams<float>> layers;
  std::int32_t qp = -1;  // -1: not tied to a quantizer
  std::uint64_t iteration = 0;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const Checkpoint& a, const Checkpoint& b);
};

struct InitStrategy {
  enum class Kind { Gaussian, He };
  Kind kind = Kind::Gaussian;
  double mean = 0.0;
  double stddev = 0.002;

  static InitStrategy gaussian(double mean, double stddev) { return {Kind::Gaussian, mean, stddev}; }
  static InitStrategy he() { return {Kind::He, 0.0, 0.0}; }
};

// Seed for layer `index` of a network built from `seed`. Layers draw from
// independent streams, so re-initializing a suffix of a network reproduces
// exactly what a fresh build would have produced for those layers.
std::uint64_t layer_seed(std::uint64_t seed, std::size_t index);

// Weights and bias of one layer; biases start at zero.
LayerParams<float> init_layer(const LayerSpec& layer, const InitStrategy& init, std::uint64_t seed);

Checkpoint build_network(const NetworkSpec& spec, const InitStrategy& init, std::uint64_t seed);

template <typename T>
struct ForwardCache {
  std::vector<BasicTensor<T>> inputs;           // input of each layer
  std::vector<BasicTensor<T>> pre_activations;  // output of each layer before its activation
};

template <typename T>
struct ForwardResult {
  BasicTensor<T> output;
  ForwardCache<T> cache;  // empty unless requested
};

// Layers in order, ReLU where the spec says so, then the residual add.
// Input is [1,H,W] or a batch [N,1,H,W], with H and W multiples of
// spec.downscale_factor().
template <typename T>
ForwardResult<T> forward(const NetworkSpec& spec, std::span<const LayerParams<T>> params, const BasicTensor<T>& input,
                         bool keep_cache);

ForwardResult<float> forward(const Checkpoint& ckpt, const Tensor& input, bool keep_cache = false);

// Gradients of a scalar loss with respect to every layer's parameters, given
// the loss gradient at the network output.
template <typename T>
std::vector<LayerGrads<T>> backward(const NetworkSpec& spec, std::span<const LayerParams<T>> params,
                                    const ForwardCache<T>& cache, const BasicTensor<T>& d_output);

template <typename T>
std::vector<LayerParams<T>> cast_params(std::span<const LayerParams<float>> params);

// Whole-frame restoration: [0,1] normalization, reflect padding up to the
// network's downscale factor, forward, crop, and 8-bit conversion.
Frame predict_frame(const Checkpoint& ckpt, const Frame& frame);

Tensor frame_to_tensor(const Frame& frame);
Frame tensor_to_frame(const Tensor& tensor);

}  // namespace sdcnn
