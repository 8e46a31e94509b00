#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "sdcnn/rng.hpp"

namespace sdcnn::synth {
namespace {

// Bilinearly interpolated lattice noise with `cells` cells across the image.
std::vector<double> value_noise(int w, int h, double cells, Rng& rng) {
  const int gw = static_cast<int>(std::ceil(cells)) + 2;
  const int gh = static_cast<int>(std::ceil(cells * h / std::max(w, 1))) + 2;
  std::vector<double> lattice(static_cast<std::size_t>(gw) * gh);
  for (double& v : lattice) v = rng.uniform01() * 2.0 - 1.0;
  std::vector<double> out(static_cast<std::size_t>(w) * h);
  const double scale = cells / w;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = x * scale, gy = y * scale;
      const int x0 = static_cast<int>(gx), y0 = static_cast<int>(gy);
      const double fx = gx - x0, fy = gy - y0;
      auto at = [&](int i, int j) { return lattice[static_cast<std::size_t>(std::min(j, gh - 1)) * gw + std::min(i, gw - 1)]; };
      const double sx = fx * fx * (3 - 2 * fx), sy = fy * fy * (3 - 2 * fy);
      const double top = at(x0, y0) * (1 - sx) + at(x0 + 1, y0) * sx;
      const double bottom = at(x0, y0 + 1) * (1 - sx) + at(x0 + 1, y0 + 1) * sx;
      out[static_cast<std::size_t>(y) * w + x] = top * (1 - sy) + bottom * sy;
    }
  }
  return out;
}

}  // namespace

Frame natural_image(int width, int height, std::uint64_t seed) {
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + 17);
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<double> img(n);

  // illumination
  const double base = 80 + 90 * rng.uniform01();
  const double gx = (rng.uniform01() - 0.5) * 80.0 / width;
  const double gy = (rng.uniform01() - 0.5) * 80.0 / height;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) img[static_cast<std::size_t>(y) * width + x] = base + gx * x + gy * y;
  }
  for (double cells : {3.0, 9.0}) {
    const auto noise = value_noise(width, height, cells, rng);
    const double amp = 25.0 / std::sqrt(cells);
    for (std::size_t i = 0; i < n; ++i) img[i] += amp * noise[i];
  }

  // objects: ellipses and rotated rectangles, flat, shaded or striped
  const int objects = 4 + static_cast<int>(rng.below(6));
  for (int o = 0; o < objects; ++o) {
    const double cx = rng.uniform01() * width, cy = rng.uniform01() * height;
    const double rx = (0.08 + 0.25 * rng.uniform01()) * width, ry = (0.08 + 0.25 * rng.uniform01()) * height;
    const double angle = rng.uniform01() * std::numbers::pi;
    const bool ellipse = rng.uniform01() < 0.5;
    const double level = 30 + 190 * rng.uniform01();
    const int fill = static_cast<int>(rng.below(3));
    const double period = 3.0 + 9.0 * rng.uniform01();
    const double stripe_angle = rng.uniform01() * std::numbers::pi;
    const double shade = (rng.uniform01() - 0.5) * 60.0;
    const double ca = std::cos(angle), sa = std::sin(angle);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double dx = x - cx, dy = y - cy;
        const double u = (dx * ca + dy * sa) / rx, v = (-dx * sa + dy * ca) / ry;
        const bool inside = ellipse ? (u * u + v * v <= 1.0) : (std::abs(u) <= 1.0 && std::abs(v) <= 1.0);
        if (!inside) continue;
        double value = level;
        if (fill == 1) value += shade * u;
        if (fill == 2) {
          value += 25.0 * std::sin(2 * std::numbers::pi * (x * std::cos(stripe_angle) + y * std::sin(stripe_angle)) / period);
        }
        img[static_cast<std::size_t>(y) * width + x] = value;
      }
    }
  }

  // fine texture
  const auto grain = value_noise(width, height, width / 3.0, rng);
  for (std::size_t i = 0; i < n; ++i) img[i] += 6.0 * grain[i];

  // soften edges with a [1 2 1] / 4 separable blur
  std::vector<double> tmp(n);
  for (int pass = 0; pass < 2; ++pass) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        auto src = [&](int i, int j) {
          i = std::clamp(i, 0, width - 1);
          j = std::clamp(j, 0, height - 1);
          return img[static_cast<std::size_t>(j) * width + i];
        };
        tmp[static_cast<std::size_t>(y) * width + x] =
            pass == 0 ? (src(x - 1, y) + 2 * src(x, y) + src(x + 1, y)) / 4
                      : (src(x, y - 1) + 2 * src(x, y) + src(x, y + 1)) / 4;
      }
    }
    img.swap(tmp);
  }

  Frame frame(width, height);
  for (std::size_t i = 0; i < n; ++i) frame.pixels[i] = to_pixel(std::clamp(img[i], 16.0, 235.0));
  return frame;
}

}  // namespace sdcnn::synth
