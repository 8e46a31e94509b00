#include "sdcnn/augment.hpp"

#include <algorithm>
#include <cmath>

namespace sdcnn {

Frame hflip(const Frame& frame) {
  Frame out(frame.width, frame.height);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) out.at(x, y) = frame.at(frame.width - 1 - x, y);
  }
  return out;
}

Frame rot90(const Frame& frame) {
  Frame out(frame.height, frame.width);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) out.at(x, y) = frame.at(y, frame.height - 1 - x);
  }
  return out;
}

Frame rot180(const Frame& frame) {
  Frame out(frame.width, frame.height);
  std::reverse_copy(frame.pixels.begin(), frame.pixels.end(), out.pixels.begin());
  return out;
}

namespace {

struct Tap {
  int lo, hi;
  double frac;
};

// Source taps for each destination sample along one axis.
std::vector<Tap> taps(int src, int dst) {
  std::vector<Tap> t(static_cast<std::size_t>(dst));
  const double ratio = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    double s = (i + 0.5) * ratio - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src - 1));
    const int lo = static_cast<int>(std::floor(s));
    t[static_cast<std::size_t>(i)] = {lo, std::min(lo + 1, src - 1), s - lo};
  }
  return t;
}

}  // namespace

Frame scale_bilinear(const Frame& frame, double factor) {
  if (!(factor > 0.0 && factor <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "scale factor must lie in (0, 1], got " + std::to_string(factor));
  }
  const int w = std::max(1, static_cast<int>(std::round(frame.width * factor)));
  const int h = std::max(1, static_cast<int>(std::round(frame.height * factor)));
  const auto tx = taps(frame.width, w);
  const auto ty = taps(frame.height, h);
  Frame out(w, h);
  for (int y = 0; y < h; ++y) {
    const Tap& a = ty[static_cast<std::size_t>(y)];
    for (int x = 0; x < w; ++x) {
      const Tap& b = tx[static_cast<std::size_t>(x)];
      const double top = frame.at(b.lo, a.lo) * (1.0 - b.frac) + frame.at(b.hi, a.lo) * b.frac;
      const double bottom = frame.at(b.lo, a.hi) * (1.0 - b.frac) + frame.at(b.hi, a.hi) * b.frac;
      out.at(x, y) = to_pixel(top * (1.0 - a.frac) + bottom * a.frac);
    }
  }
  return out;
}

std::vector<Frame> augment(const Frame& frame) {
  std::vector<Frame> out;
  out.reserve(kAugmentCount);
  for (int flip = 0; flip < 2; ++flip) {
    const Frame flipped = flip ? hflip(frame) : frame;
    for (double factor : kAugmentScales) {
      const Frame scaled = factor == 1.0 ? flipped : scale_bilinear(flipped, factor);
      out.push_back(scaled);
      out.push_back(rot90(scaled));
      out.push_back(rot180(scaled));
    }
  }
  return out;
}

}  // namespace sdcnn
