#include "sdcnn/model.hpp"

#include <cstring>

#include "sdcnn/init.hpp"
#include "sdcnn/kernels.hpp"

namespace sdcnn {

Shape LayerSpec::weight_shape() const {
  return kind == LayerKind::Conv ? Shape{out_channels, in_channels, kernel, kernel}
                                 : Shape{in_channels, out_channels, kernel, kernel};
}

std::size_t LayerSpec::weight_count() const {
  return static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel;
}

std::string LayerSpec::to_string() const {
  return std::string(kind == LayerKind::Conv ? "conv " : "deconv ") + std::to_string(in_channels) + "->" +
         std::to_string(out_channels) + " k" + std::to_string(kernel) + " s" + std::to_string(stride) +
         (activation == Activation::Relu ? " relu" : " linear");
}

void NetworkSpec::validate() const {
  if (layers.empty()) throw Error(ErrorKind::InvalidArgument, "network spec has no layers");
  int down = 1;
  int up = 1;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    const std::string where = "layer " + std::to_string(i + 1) + " (" + l.to_string() + ")";
    if (l.kernel < 1 || l.kernel % 2 == 0) throw Error(ErrorKind::InvalidArgument, where + ": kernel must be odd");
    if (l.stride != 1 && l.stride != 2) throw Error(ErrorKind::InvalidArgument, where + ": stride must be 1 or 2");
    if (l.in_channels < 1 || l.out_channels < 1) {
      throw Error(ErrorKind::InvalidArgument, where + ": channel counts must be positive");
    }
    if (i > 0 && layers[i - 1].out_channels != l.in_channels) {
      throw Error(ErrorKind::ShapeMismatch, where + ": expects " + std::to_string(l.in_channels) +
                                                " input channels but layer " + std::to_string(i) + " produces " +
                                                std::to_string(layers[i - 1].out_channels));
    }
    (l.kind == LayerKind::Conv ? down : up) *= l.stride;
  }
  if (layers.front().in_channels != 1) {
    throw Error(ErrorKind::ShapeMismatch, "first layer must take a single luminance channel");
  }
  if (residual && layers.back().out_channels != 1) {
    throw Error(ErrorKind::ShapeMismatch, "residual network must end in a single channel");
  }
  if (down != up) {
    throw Error(ErrorKind::ShapeMismatch, "strided convolutions downscale by " + std::to_string(down) +
                                              " but deconvolutions upscale by " + std::to_string(up));
  }
}

int NetworkSpec::downscale_factor() const {
  int down = 1;
  for (const auto& l : layers) {
    if (l.kind == LayerKind::Conv) down *= l.stride;
  }
  return down;
}

std::size_t NetworkSpec::weight_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight_count();
  return n;
}

NetworkSpec sdcnn_default_spec() {
  using K = LayerKind;
  using A = Activation;
  return NetworkSpec{{
                         {K::Conv, 1, 64, 9, 1, A::Relu},
                         {K::Conv, 64, 32, 3, 2, A::Relu},
                         {K::Conv, 32, 16, 5, 1, A::Relu},
                         {K::Conv, 16, 32, 3, 1, A::Relu},
                         {K::Deconv, 32, 64, 3, 1, A::Relu},
                         {K::Deconv, 64, 1, 9, 2, A::Linear},
                     },
                     true};
}

void Checkpoint::validate() const {
  spec.validate();
  if (layers.size() != spec.layers.size()) {
    throw Error(ErrorKind::ShapeMismatch, "checkpoint holds " + std::to_string(layers.size()) +
                                              " parameter sets for " + std::to_string(spec.layers.size()) + " layers");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    if (layers[i].weights.shape() != l.weight_shape() || layers[i].bias.shape() != Shape{l.out_channels}) {
      throw Error(ErrorKind::ShapeMismatch, "layer " + std::to_string(i + 1) + " (" + l.to_string() +
                                                ") expects weights " + l.weight_shape().to_string() + ", got " +
                                                layers[i].weights.shape().to_string() + " / bias " +
                                                layers[i].bias.shape().to_string());
    }
  }
}

namespace {

bool same_bits(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

}  // namespace

bool operator==(const Checkpoint& a, const Checkpoint& b) {
  if (!(a.spec == b.spec) || a.qp != b.qp || a.iteration != b.iteration || a.seed != b.seed ||
      a.layers.size() != b.layers.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (!same_bits(a.layers[i].weights, b.layers[i].weights) || !same_bits(a.layers[i].bias, b.layers[i].bias)) {
      return false;
    }
  }
  return true;
}

std::uint64_t layer_seed(std::uint64_t seed, std::size_t index) {
  // splitmix64 finalizer over (seed, index)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

LayerParams<float> init_layer(const LayerSpec& layer, const InitStrategy& init, std::uint64_t seed) {
  LayerParams<float> p;
  const Shape shape = layer.weight_shape();
  if (init.kind == InitStrategy::Kind::He) {
    p.weights = he_init(shape, seed, layer.in_channels * layer.kernel * layer.kernel);
  } else {
    p.weights = gaussian_init(shape, init.mean, init.stddev, seed);
  }
  p.bias = Tensor(Shape{layer.out_channels});
  return p;
}

Checkpoint build_network(const NetworkSpec& spec, const InitStrategy& init, std::uint64_t seed) {
  spec.validate();
  Checkpoint ckpt;
  ckpt.spec = spec;
  ckpt.seed = seed;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    ckpt.layers.push_back(init_layer(spec.layers[i], init, layer_seed(seed, i)));
  }
  return ckpt;
}

template <typename T>
ForwardResult<T> forward(const NetworkSpec& spec, std::span<const LayerParams<T>> params, const BasicTensor<T>& input,
                         bool keep_cache) {
  if (params.size() != spec.layers.size()) {
    throw Error(ErrorKind::ShapeMismatch, "forward: parameter count does not match spec");
  }
  const Shape& s = input.shape();
  const int axis = s.rank() - 3;
  if ((s.rank() != 3 && s.rank() != 4) || s[axis] != spec.layers.front().in_channels) {
    throw Error(ErrorKind::ShapeMismatch, "forward: input must be [" + std::to_string(spec.layers.front().in_channels) +
                                              ",H,W] or [N," + std::to_string(spec.layers.front().in_channels) +
                                              ",H,W], got " + s.to_string());
  }
  const int factor = spec.downscale_factor();
  if (s[axis + 1] % factor != 0 || s[axis + 2] % factor != 0) {
    throw Error(ErrorKind::ShapeMismatch, "forward: spatial extents of " + input.shape().to_string() +
                                              " must be multiples of " + std::to_string(factor) +
                                              "; use predict_frame for arbitrary frame sizes");
  }
  ForwardResult<T> result;
  if (keep_cache) {
    result.cache.inputs.reserve(spec.layers.size());
    result.cache.pre_activations.reserve(spec.layers.size());
  }
  BasicTensor<T> x = input;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    BasicTensor<T> y = l.kind == LayerKind::Conv
                           ? conv2d_forward(x, params[i].weights, params[i].bias, l.stride, l.pad())
                           : deconv2d_forward(x, params[i].weights, params[i].bias, l.stride, l.pad());
    if (keep_cache) {
      result.cache.inputs.push_back(std::move(x));
      result.cache.pre_activations.push_back(y);
    }
    if (l.activation == Activation::Relu) relu_inplace(y);
    x = std::move(y);
  }
  if (spec.residual) {
    if (x.shape() != input.shape()) {
      throw Error(ErrorKind::ShapeMismatch, "forward: residual branch produced " + x.shape().to_string() +
                                                " for input " + input.shape().to_string());
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += input[i];
  }
  result.output = std::move(x);
  return result;
}

ForwardResult<float> forward(const Checkpoint& ckpt, const Tensor& input, bool keep_cache) {
  return forward<float>(ckpt.spec, ckpt.layers, input, keep_cache);
}

template <typename T>
std::vector<LayerGrads<T>> backward(const NetworkSpec& spec, std::span<const LayerParams<T>> params,
                                    const ForwardCache<T>& cache, const BasicTensor<T>& d_output) {
  const std::size_t n = spec.layers.size();
  if (cache.inputs.size() != n || cache.pre_activations.size() != n || params.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "backward: forward cache was not kept or does not match the spec");
  }
  if (d_output.shape() != cache.pre_activations.back().shape()) {
    throw Error(ErrorKind::ShapeMismatch, "backward: d_output " + d_output.shape().to_string() +
                                              " does not match network output " +
                                              cache.pre_activations.back().shape().to_string());
  }
  std::vector<LayerGrads<T>> grads(n);
  // The residual add passes d_output straight through to the last layer.
  BasicTensor<T> d = d_output;
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t i = n - 1 - step;
    const LayerSpec& l = spec.layers[i];
    if (l.activation == Activation::Relu) relu_backward_inplace(d, cache.pre_activations[i]);
    const bool want_input = i > 0;
    ConvGrads<T> g = l.kind == LayerKind::Conv
                         ? conv2d_backward(cache.inputs[i], params[i].weights, l.stride, l.pad(), d, want_input)
                         : deconv2d_backward(cache.inputs[i], params[i].weights, l.stride, l.pad(), d, want_input);
    grads[i].weights = std::move(g.d_weights);
    grads[i].bias = std::move(g.d_bias);
    d = std::move(g.d_input);
  }
  return grads;
}

template <typename T>
std::vector<LayerParams<T>> cast_params(std::span<const LayerParams<float>> params) {
  std::vector<LayerParams<T>> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back({p.weights.template cast<T>(), p.bias.template cast<T>()});
  return out;
}

template ForwardResult<float> forward(const NetworkSpec&, std::span<const LayerParams<float>>, const Tensor&, bool);
template ForwardResult<double> forward(const NetworkSpec&, std::span<const LayerParams<double>>, const TensorD&, bool);
template std::vector<LayerGrads<float>> backward(const NetworkSpec&, std::span<const LayerParams<float>>,
                                                 const ForwardCache<float>&, const Tensor&);
template std::vector<LayerGrads<double>> backward(const NetworkSpec&, std::span<const LayerParams<double>>,
                                                  const ForwardCache<double>&, const TensorD&);
template std::vector<LayerParams<float>> cast_params(std::span<const LayerParams<float>>);
template std::vector<LayerParams<double>> cast_params(std::span<const LayerParams<float>>);

Tensor frame_to_tensor(const Frame& frame) {
  Tensor t(Shape{1, frame.height, frame.width});
  for (std::size_t i = 0; i < frame.pixels.size(); ++i) t[i] = static_cast<float>(frame.pixels[i]) / 255.0f;
  return t;
}

Frame tensor_to_frame(const Tensor& tensor) {
  if (tensor.shape().rank() != 3 || tensor.channels() != 1) {
    throw Error(ErrorKind::ShapeMismatch, "tensor_to_frame: expected [1,H,W], got " + tensor.shape().to_string());
  }
  Frame f(tensor.width(), tensor.height());
  for (std::size_t i = 0; i < f.pixels.size(); ++i) f.pixels[i] = to_pixel(static_cast<double>(tensor[i]) * 255.0);
  return f;
}

namespace {

// Mirror index into [0, n) without repeating the edge sample; degenerates to
// edge replication when n == 1.
int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

int round_up(int value, int multiple) { return (value + multiple - 1) / multiple * multiple; }

}  // namespace

Frame predict_frame(const Checkpoint& ckpt, const Frame& frame) {
  if (frame.empty()) throw Error(ErrorKind::InvalidArgument, "predict_frame: empty frame");
  const int factor = ckpt.spec.downscale_factor();
  const int padded_w = round_up(frame.width, factor);
  const int padded_h = round_up(frame.height, factor);
  Tensor input(Shape{1, padded_h, padded_w});
  for (int y = 0; y < padded_h; ++y) {
    const int sy = reflect_index(y, frame.height);
    for (int x = 0; x < padded_w; ++x) {
      input.at(0, y, x) = static_cast<float>(frame.at(reflect_index(x, frame.width), sy)) / 255.0f;
    }
  }
  const Tensor output = forward(ckpt, input).output;
  Frame restored(frame.width, frame.height);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      restored.at(x, y) = to_pixel(static_cast<double>(output.at(0, y, x)) * 255.0);
    }
  }
  return restored;
}

}  // namespace sdcnn
