#include "sdcnn/trainer.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "sdcnn/metrics.hpp"
#include "sdcnn/rng.hpp"
#include "sdcnn/text_format.hpp"

namespace sdcnn {

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidArgument, "train config: " + msg); };
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (iterations < 0) fail("iterations must be >= 0");
  if (!(lr_main > 0.0) || !(lr_last > 0.0)) fail("learning rates must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be >= 0");
  if (!(clip_theta > 0.0)) fail("clip_theta must be positive");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) fail("validation_fraction must lie in [0, 1)");
}

SGDState SGDState::zeros_like(const Checkpoint& ckpt) {
  SGDState state;
  for (const auto& layer : ckpt.layers) {
    state.velocity.push_back({Tensor(layer.weights.shape()), Tensor(layer.bias.shape())});
  }
  return state;
}

std::string TrainLog::to_csv() const {
  std::string out = "iteration,train_loss,val_loss,val_psnr\n";
  for (const TrainRecord& r : records) {
    out += std::to_string(r.iteration) + "," + format_real(r.train_loss) + "," + format_real(r.val_loss) + "," +
           format_real(r.val_psnr) + "\n";
  }
  return out;
}

template <typename T>
LossResult<T> mse_loss(std::span<const BasicTensor<T>> pred, std::span<const BasicTensor<T>> truth) {
  if (pred.size() != truth.size() || pred.empty()) {
    throw Error(ErrorKind::ShapeMismatch, "mse_loss: " + std::to_string(pred.size()) + " predictions vs " +
                                              std::to_string(truth.size()) + " targets");
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].shape() != truth[i].shape()) {
      throw Error(ErrorKind::ShapeMismatch, "mse_loss: prediction " + pred[i].shape().to_string() +
                                                " vs target " + truth[i].shape().to_string());
    }
    count += pred[i].size();
  }
  LossResult<T> result;
  const double scale = 2.0 / static_cast<double>(count);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    BasicTensor<T> d(pred[i].shape());
    for (std::size_t j = 0; j < pred[i].size(); ++j) {
      const double diff = static_cast<double>(pred[i][j]) - static_cast<double>(truth[i][j]);
      sum += diff * diff;
      d[j] = static_cast<T>(scale * diff);
    }
    result.d_pred.push_back(std::move(d));
  }
  result.loss = sum / static_cast<double>(count);
  return result;
}

template LossResult<float> mse_loss(std::span<const Tensor>, std::span<const Tensor>);
template LossResult<double> mse_loss(std::span<const TensorD>, std::span<const TensorD>);

void clip_gradients(std::span<float> grads, double theta, double lr) {
  if (!(theta > 0.0) || !(lr > 0.0)) throw Error(ErrorKind::InvalidArgument, "clip_gradients: theta and lr must be positive");
  const auto bound = static_cast<float>(theta / lr);
  for (float& g : grads) g = std::clamp(g, -bound, bound);
}

void clip_gradients(LayerGrads<float>& grads, double theta, double lr) {
  clip_gradients(grads.weights.values(), theta, lr);
  clip_gradients(grads.bias.values(), theta, lr);
}

double layer_learning_rate(const TrainConfig& config, std::size_t index, std::size_t layer_count) {
  return index + 1 == layer_count ? config.lr_last : config.lr_main;
}

namespace {

std::string first_non_finite_output(const NetworkSpec& spec, const ForwardCache<float>& cache) {
  for (std::size_t l = 0; l < cache.pre_activations.size(); ++l) {
    for (float v : cache.pre_activations[l].values()) {
      if (!std::isfinite(v)) {
        return "layer " + std::to_string(l + 1) + " (" + spec.layers[l].to_string() + ") output is " + format_real(v);
      }
    }
  }
  return "every layer output is finite";
}

void require_finite(const Tensor& t, std::size_t layer, const LayerSpec& spec, const char* what) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i])) {
      throw Error(ErrorKind::NonFinite, "layer " + std::to_string(layer + 1) + " (" + spec.to_string() + ") " +
                                            what + " gradient element " + std::to_string(i) + " is " +
                                            format_real(t[i]));
    }
  }
}

void momentum_update(Tensor& param, Tensor& velocity, const Tensor& grad, double lr, double momentum,
                     double decay) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = static_cast<double>(grad[i]) + decay * static_cast<double>(param[i]);
    const double v = momentum * static_cast<double>(velocity[i]) - lr * g;
    velocity[i] = static_cast<float>(v);
    param[i] = static_cast<float>(static_cast<double>(param[i]) + static_cast<double>(velocity[i]));
  }
}

}  // namespace

void sgd_step(Checkpoint& ckpt, std::span<const LayerGrads<float>> grads, SGDState& state, const TrainConfig& config) {
  const std::size_t n = ckpt.layers.size();
  if (grads.size() != n || state.velocity.size() != n) {
    throw Error(ErrorKind::ShapeMismatch, "sgd_step: gradient/velocity layer count does not match checkpoint");
  }
  for (std::size_t l = 0; l < n; ++l) {
    if (grads[l].weights.shape() != ckpt.layers[l].weights.shape() ||
        grads[l].bias.shape() != ckpt.layers[l].bias.shape() ||
        state.velocity[l].weights.shape() != ckpt.layers[l].weights.shape() ||
        state.velocity[l].bias.shape() != ckpt.layers[l].bias.shape()) {
      throw Error(ErrorKind::ShapeMismatch, "sgd_step: layer " + std::to_string(l + 1) + " shape mismatch");
    }
    require_finite(grads[l].weights, l, ckpt.spec.layers[l], "weight");
    require_finite(grads[l].bias, l, ckpt.spec.layers[l], "bias");
  }
  for (std::size_t l = 0; l < n; ++l) {
    const double lr = layer_learning_rate(config, l, n);
    momentum_update(ckpt.layers[l].weights, state.velocity[l].weights, grads[l].weights, lr, config.momentum,
                    config.weight_decay);
    momentum_update(ckpt.layers[l].bias, state.velocity[l].bias, grads[l].bias, lr, config.momentum, 0.0);
  }
  ++state.iteration;
}

EvalResult evaluate(const Checkpoint& ckpt, std::span<const PatchPair> pairs) {
  if (pairs.empty()) throw Error(ErrorKind::InvalidArgument, "evaluate: no pairs");
  double sum = 0.0;
  std::size_t count = 0;
  for (const PatchPair& p : pairs) {
    const Tensor out = forward(ckpt, p.compressed).output;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double d = static_cast<double>(out[i]) - static_cast<double>(p.truth[i]);
      sum += d * d;
    }
    count += out.size();
  }
  const double mse = sum / static_cast<double>(count);
  return {mse, psnr_from_mse(mse, 1.0)};
}

namespace {

// Endless stream of training indices: each pass over the data is a fresh
// seeded permutation.
class BatchSampler {
 public:
  BatchSampler(std::vector<std::size_t> indices, Rng& rng) : order_(std::move(indices)), rng_(rng) {}

  std::size_t next() {
    if (pos_ == order_.size()) {
      rng_.shuffle(std::span<std::size_t>(order_));
      pos_ = 0;
    }
    return order_[pos_++];
  }

 private:
  std::vector<std::size_t> order_;
  Rng& rng_;
  std::size_t pos_ = order_.size();
};

void accumulate(std::vector<LayerGrads<float>>& total, std::vector<LayerGrads<float>>&& sample) {
  if (total.empty()) {
    total = std::move(sample);
    return;
  }
  auto add = [](Tensor& dst, const Tensor& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  };
  for (std::size_t l = 0; l < total.size(); ++l) {
    add(total[l].weights, sample[l].weights);
    add(total[l].bias, sample[l].bias);
  }
}

}  // namespace

TrainResult train(const Checkpoint& ckpt, std::span<const PatchPair> dataset, const TrainConfig& config,
                  const TrainProgress& progress) {
  config.validate();
  ckpt.validate();
  if (dataset.empty()) throw Error(ErrorKind::InvalidArgument, "train: dataset is empty");
  TrainResult result{ckpt, {}};
  if (config.iterations == 0) return result;

  Rng rng(config.seed);
  std::vector<std::size_t> all(dataset.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(all));

  std::size_t val_count = 0;
  if (config.validation_fraction > 0.0 && dataset.size() > 1) {
    val_count = static_cast<std::size_t>(std::floor(config.validation_fraction * static_cast<double>(dataset.size())));
    val_count = std::clamp<std::size_t>(val_count, 1, dataset.size() - 1);
  }
  std::vector<PatchPair> validation;
  for (std::size_t i = 0; i < val_count; ++i) validation.push_back(dataset[all[i]]);
  BatchSampler sampler(std::vector<std::size_t>(all.begin() + static_cast<std::ptrdiff_t>(val_count), all.end()), rng);

  Checkpoint& net = result.checkpoint;
  SGDState state = SGDState::zeros_like(net);
  const std::size_t layers = net.layers.size();
  const double batch = static_cast<double>(config.batch_size);
  double interval_loss = 0.0;
  int interval_steps = 0;

  for (int it = 0; it < config.iterations; ++it) {
    // Samples run one at a time: a whole batch of activations would not stay
    // cache resident. Each per-sample loss is scaled by 1/batch, which sums to
    // the element mean over the batch since every patch has the same size.
    std::vector<LayerGrads<float>> grads;
    double batch_loss = 0.0;
    for (int b = 0; b < config.batch_size; ++b) {
      const PatchPair& pair = dataset[sampler.next()];
      auto fwd = forward(net, pair.compressed, true);
      auto loss = mse_loss<float>(std::span<const Tensor>(&fwd.output, 1), std::span<const Tensor>(&pair.truth, 1));
      for (float& g : loss.d_pred.front().values()) g = static_cast<float>(g / batch);
      if (!std::isfinite(loss.loss)) {
        throw Error(ErrorKind::NonFinite, "training loss became " + format_real(loss.loss) + " at iteration " +
                                              std::to_string(net.iteration + 1) + "; " +
                                              first_non_finite_output(net.spec, fwd.cache));
      }
      batch_loss += loss.loss / batch;
      accumulate(grads, backward<float>(net.spec, net.layers, fwd.cache, loss.d_pred.front()));
    }
    for (std::size_t l = 0; l < layers; ++l) {
      clip_gradients(grads[l], config.clip_theta, layer_learning_rate(config, l, layers));
    }
    sgd_step(net, grads, state, config);
    ++net.iteration;
    interval_loss += batch_loss;
    ++interval_steps;

    if ((it + 1) % kLogInterval == 0) {
      TrainRecord record{net.iteration, interval_loss / interval_steps, std::numeric_limits<double>::quiet_NaN(),
                         std::numeric_limits<double>::quiet_NaN()};
      if (!validation.empty()) {
        const EvalResult eval = evaluate(net, validation);
        record.val_loss = eval.mse;
        record.val_psnr = eval.psnr;
      }
      result.log.records.push_back(record);
      if (progress) progress(record);
      interval_loss = 0.0;
      interval_steps = 0;
    }
  }
  return result;
}

Checkpoint transplant_layers(const Checkpoint& source, const NetworkSpec& target_spec, std::size_t k,
                             const InitStrategy& init_rest, std::uint64_t seed) {
  source.validate();
  target_spec.validate();
  if (k > source.spec.layers.size() || k > target_spec.layers.size()) {
    throw Error(ErrorKind::InvalidArgument, "cannot transplant " + std::to_string(k) + " layers: source has " +
                                                std::to_string(source.spec.layers.size()) + ", target has " +
                                                std::to_string(target_spec.layers.size()));
  }
  for (std::size_t i = 0; i < k; ++i) {
    const LayerSpec& from = source.spec.layers[i];
    const LayerSpec& to = target_spec.layers[i];
    if (!(from == to)) {
      throw Error(ErrorKind::ShapeMismatch, "layer " + std::to_string(i + 1) + ": source " + from.to_string() +
                                                " weights " + from.weight_shape().to_string() + " vs target " +
                                                to.to_string() + " weights " + to.weight_shape().to_string());
    }
  }
  Checkpoint out;
  out.spec = target_spec;
  out.qp = source.qp;
  out.seed = seed;
  for (std::size_t i = 0; i < target_spec.layers.size(); ++i) {
    out.layers.push_back(i < k ? source.layers[i] : init_layer(target_spec.layers[i], init_rest, layer_seed(seed, i)));
  }
  return out;
}

}  // namespace sdcnn
