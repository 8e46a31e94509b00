#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace sdcnn {

// Seedable generator whose output sequence is fixed across platforms.
//
// The engine is std::mt19937_64, whose output is pinned by the standard. The
// standard *distributions* are not, so every derived variate is computed here:
//   uniform01  : top 53 bits of one draw, scaled to [0, 1)
//   normal     : Box-Muller on (u1, u2) with u1 = 1 - uniform01 in (0, 1];
//                both variates of a pair are used, cos branch first
//   below(n)   : rejection sampling on the 64-bit draw, unbiased
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();
  double normal(double mean = 0.0, double stddev = 1.0);
  std::uint64_t below(std::uint64_t n);

  // Fisher-Yates, last element first.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sdcnn
