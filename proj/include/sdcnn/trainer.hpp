#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sdcnn/dataset.hpp"
#include "sdcnn/model.hpp"

namespace sdcnn {

struct TrainConfig {
  int batch_size = 128;
  int iterations = 0;
  double lr_main = 5e-4;  // every layer but the last
  double lr_last = 5e-5;  // final layer
  double momentum = 0.99;
  double weight_decay = 0.001;
  double clip_theta = 1.0;  // gradients are clamped to +-clip_theta / lr
  std::uint64_t seed = 0;
  double validation_fraction = 0.0;

  void validate() const;
};

inline constexpr int kLogInterval = 100;

struct SGDState {
  std::vector<LayerParams<float>> velocity;
  std::uint64_t iteration = 0;

  static SGDState zeros_like(const Checkpoint& ckpt);
};

struct TrainRecord {
  std::uint64_t iteration = 0;
  double train_loss = 0.0;  // mean batch loss since the previous record
  double val_loss = 0.0;    // NaN without a validation split
  double val_psnr = 0.0;    // dB on [0,1] pixels; NaN without a validation split
};

struct TrainLog {
  std::vector<TrainRecord> records;

  // "iteration,train_loss,val_loss,val_psnr" header, one row per record,
  // locale-independent shortest round-trip numbers, "inf"/"nan" literals.
  std::string to_csv() const;
};

template <typename T>
struct LossResult {
  double loss = 0.0;
  std::vector<BasicTensor<T>> d_pred;
};

// Mean of squared differences over every element of the batch; the gradient
// is 2 (pred - truth) / element_count.
template <typename T>
LossResult<T> mse_loss(std::span<const BasicTensor<T>> pred, std::span<const BasicTensor<T>> truth);

// Clamp each component to [-theta / lr, theta / lr].
void clip_gradients(std::span<float> grads, double theta, double lr);
void clip_gradients(LayerGrads<float>& grads, double theta, double lr);

// Learning rate of layer `index` in a network of `layer_count` layers.
double layer_learning_rate(const TrainConfig& config, std::size_t index, std::size_t layer_count);

// v <- momentum v - lr_l (g + decay w) for weights, v <- momentum v - lr_l g
// for biases, then w <- w + v. Throws NonFinite naming the layer when a
// gradient is NaN or infinite.
void sgd_step(Checkpoint& ckpt, std::span<const LayerGrads<float>> grads, SGDState& state, const TrainConfig& config);

struct EvalResult {
  double mse = 0.0;   // mean over all pairs and pixels
  double psnr = 0.0;  // 10 log10(1 / mse), so lower mse always reads higher
};

EvalResult evaluate(const Checkpoint& ckpt, std::span<const PatchPair> pairs);

struct TrainResult {
  Checkpoint checkpoint;
  TrainLog log;
};

using TrainProgress = std::function<void(const TrainRecord&)>;

// Seeded epoch-shuffled minibatch SGD. A validation split (first
// validation_fraction of the shuffled pairs) is held out when requested.
// The result is a pure function of (ckpt, dataset, config).
TrainResult train(const Checkpoint& ckpt, std::span<const PatchPair> dataset, const TrainConfig& config,
                  const TrainProgress& progress = {});

// Copies layers [0, k) of `source` into a network shaped by `target_spec` and
// initializes layers [k, end) with `init_rest`, drawing layer i from
// layer_seed(seed, i).
Checkpoint transplant_layers(const Checkpoint& source, const NetworkSpec& target_spec, std::size_t k,
                             const InitStrategy& init_rest, std::uint64_t seed);

}  // namespace sdcnn
