#include "sdcnn/init.hpp"

#include <cmath>
#include <string>

#include "sdcnn/rng.hpp"

namespace sdcnn {

Tensor gaussian_init(const Shape& shape, double mean, double stddev, std::uint64_t seed) {
  if (!(stddev > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "gaussian_init: stddev must be positive, got " + std::to_string(stddev));
  }
  Rng rng(seed);
  Tensor t(shape);
  for (float& v : t.values()) v = static_cast<float>(rng.normal(mean, stddev));
  return t;
}

double he_stddev(int fan_in) {
  if (fan_in < 1) throw Error(ErrorKind::InvalidArgument, "he_init: fan_in must be positive");
  return std::sqrt(2.0 / fan_in);
}

Tensor he_init(const Shape& shape, std::uint64_t seed, std::optional<int> fan_in) {
  const int fan = fan_in ? *fan_in : static_cast<int>(shape.numel() / static_cast<std::size_t>(shape[0]));
  return gaussian_init(shape, 0.0, he_stddev(fan), seed);
}

}  // namespace sdcnn
