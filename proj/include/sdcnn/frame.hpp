#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdcnn/error.hpp"

namespace sdcnn {

// Single-channel 8-bit luminance image, row-major.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Frame() = default;
  Frame(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(checked_area(w, h), fill) {}
  Frame(int w, int h, std::vector<std::uint8_t> values) : width(w), height(h), pixels(std::move(values)) {
    if (pixels.size() != checked_area(w, h)) {
      throw Error(ErrorKind::ShapeMismatch, "frame " + std::to_string(w) + "x" + std::to_string(h) + " needs " +
                                                std::to_string(checked_area(w, h)) + " pixels, got " +
                                                std::to_string(pixels.size()));
    }
  }

  bool empty() const { return pixels.empty(); }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  static std::size_t checked_area(int w, int h) {
    if (w < 1 || h < 1) {
      throw Error(ErrorKind::InvalidArgument,
                  "frame dimensions must be positive, got " + std::to_string(w) + "x" + std::to_string(h));
    }
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  }
};

// Round half away from zero, then clamp to [0, 255].
std::uint8_t to_pixel(double value);

}  // namespace sdcnn
