#pragma once

// Reference implementations and helpers shared by the test binaries. The
// oracles here are written independently of the library's im2col kernels:
// direct loops over every output (or input) element.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include "sdcnn/error.hpp"
#include "sdcnn/frame.hpp"
#include "sdcnn/rng.hpp"
#include "sdcnn/tensor.hpp"

namespace testing {

using sdcnn::Shape;
using sdcnn::TensorD;

inline TensorD random_tensor(const Shape& shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  sdcnn::Rng rng(seed);
  TensorD t(shape);
  for (double& v : t.values()) v = lo + (hi - lo) * rng.uniform01();
  return t;
}

inline sdcnn::Frame random_frame(int w, int h, std::uint64_t seed) {
  sdcnn::Rng rng(seed);
  sdcnn::Frame f(w, h);
  for (auto& p : f.pixels) p = static_cast<std::uint8_t>(rng.below(256));
  return f;
}

// out(o,y,x) = b[o] + sum in(c, y*s-p+i, x*s-p+j) w(o,c,i,j)
inline TensorD naive_conv(const TensorD& in, const TensorD& w, const TensorD& b, int s, int p) {
  const int cin = in.shape()[0], h = in.shape()[1], wd = in.shape()[2];
  const int cout = w.shape()[0], k = w.shape()[2];
  const int oh = (h + 2 * p - k) / s + 1, ow = (wd + 2 * p - k) / s + 1;
  TensorD out(Shape{cout, oh, ow});
  for (int o = 0; o < cout; ++o)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        double acc = b[static_cast<std::size_t>(o)];
        for (int c = 0; c < cin; ++c)
          for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
              const int iy = y * s - p + i, ix = x * s - p + j;
              if (iy < 0 || iy >= h || ix < 0 || ix >= wd) continue;
              acc += in.at(c, iy, ix) * w[((static_cast<std::size_t>(o) * cin + c) * k + i) * k + j];
            }
        out.at(o, y, x) = acc;
      }
  return out;
}

// Scatter form: every input element adds in * w(c,o,i,j) at (y*s-p+i, x*s-p+j).
inline TensorD naive_deconv(const TensorD& in, const TensorD& w, const TensorD& b, int s, int p) {
  const int cin = in.shape()[0], h = in.shape()[1], wd = in.shape()[2];
  const int cout = w.shape()[1], k = w.shape()[2];
  const int oh = (h - 1) * s - 2 * p + k + (s - 1), ow = (wd - 1) * s - 2 * p + k + (s - 1);
  TensorD out(Shape{cout, oh, ow});
  for (int o = 0; o < cout; ++o)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) out.at(o, y, x) = b[static_cast<std::size_t>(o)];
  for (int c = 0; c < cin; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < wd; ++x)
        for (int o = 0; o < cout; ++o)
          for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
              const int oy = y * s - p + i, ox = x * s - p + j;
              if (oy < 0 || oy >= oh || ox < 0 || ox >= ow) continue;
              out.at(o, oy, ox) += in.at(c, y, x) * w[((static_cast<std::size_t>(c) * cout + o) * k + i) * k + j];
            }
  return out;
}

inline double max_abs_diff(const TensorD& a, const TensorD& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double dot(const TensorD& a, const TensorD& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  return scale == 0.0 ? 0.0 : std::abs(analytic - numeric) / scale;
}

// Central difference of f with respect to every element of `param`.
inline TensorD numeric_gradient(TensorD& param, const std::function<double()>& f, double h) {
  TensorD g(param.shape());
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double saved = param[i];
    param[i] = saved + h;
    const double up = f();
    param[i] = saved - h;
    const double down = f();
    param[i] = saved;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

template <typename F>
sdcnn::ErrorKind error_kind_of(F&& f) {
  try {
    f();
  } catch (const sdcnn::Error& e) {
    return e.kind();
  }
  throw std::runtime_error("expected an sdcnn::Error");
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    sdcnn::Rng rng(std::hash<std::string>{}(tag) ^ static_cast<std::uint64_t>(::getpid()));
    path_ = std::filesystem::temp_directory_path() / ("sdcnn_" + tag + "_" + std::to_string(rng.next_u64() % 1000000007));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
