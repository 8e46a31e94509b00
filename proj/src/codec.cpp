#include "sdcnn/codec.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace sdcnn {
namespace {

using Basis = std::array<double, kBlock * kBlock>;

// basis[u*8 + x] = a(u) cos((2x + 1) u pi / 16)
const Basis& dct_basis() {
  static const Basis basis = [] {
    Basis b{};
    for (int u = 0; u < kBlock; ++u) {
      const double scale = u == 0 ? std::sqrt(1.0 / kBlock) : std::sqrt(2.0 / kBlock);
      for (int x = 0; x < kBlock; ++x) {
        b[static_cast<std::size_t>(u * kBlock + x)] =
            scale * std::cos((2 * x + 1) * u * std::numbers::pi / (2 * kBlock));
      }
    }
    return b;
  }();
  return basis;
}

// out = M * in * M^T (forward) or M^T * in * M (inverse)
Block8x8 separable(const Block8x8& in, bool inverse) {
  const Basis& m = dct_basis();
  auto at = [&](int r, int c) { return inverse ? m[static_cast<std::size_t>(c * kBlock + r)] : m[static_cast<std::size_t>(r * kBlock + c)]; };
  Block8x8 tmp{};
  for (int r = 0; r < kBlock; ++r) {
    for (int c = 0; c < kBlock; ++c) {
      double acc = 0.0;
      for (int k = 0; k < kBlock; ++k) acc += at(r, k) * in[static_cast<std::size_t>(k * kBlock + c)];
      tmp[static_cast<std::size_t>(r * kBlock + c)] = acc;
    }
  }
  Block8x8 out{};
  for (int r = 0; r < kBlock; ++r) {
    for (int c = 0; c < kBlock; ++c) {
      double acc = 0.0;
      for (int k = 0; k < kBlock; ++k) acc += tmp[static_cast<std::size_t>(r * kBlock + k)] * at(c, k);
      out[static_cast<std::size_t>(r * kBlock + c)] = acc;
    }
  }
  return out;
}

}  // namespace

double qstep(int qp) {
  if (qp < kMinQp || qp > kMaxQp) {
    throw Error(ErrorKind::OutOfRange, "qp must lie in [0, 51], got " + std::to_string(qp));
  }
  return std::exp2((qp - 4) / 6.0);
}

Block8x8 dct8x8(const Block8x8& block) { return separable(block, false); }
Block8x8 idct8x8(const Block8x8& coeffs) { return separable(coeffs, true); }

DegradeResult degrade_frame(const Frame& frame, int qp) {
  const double step = qstep(qp);
  if (frame.empty()) throw Error(ErrorKind::InvalidArgument, "degrade_frame: empty frame");
  const int blocks_x = (frame.width + kBlock - 1) / kBlock;
  const int blocks_y = (frame.height + kBlock - 1) / kBlock;
  std::array<std::map<long long, long long>, kBlock * kBlock> histograms;

  DegradeResult result{Frame(frame.width, frame.height), 0.0};
  for (int by = 0; by < blocks_y; ++by) {
    for (int bx = 0; bx < blocks_x; ++bx) {
      Block8x8 block{};
      for (int y = 0; y < kBlock; ++y) {
        const int sy = std::min(by * kBlock + y, frame.height - 1);
        for (int x = 0; x < kBlock; ++x) {
          const int sx = std::min(bx * kBlock + x, frame.width - 1);
          block[static_cast<std::size_t>(y * kBlock + x)] = frame.at(sx, sy);
        }
      }
      Block8x8 coeffs = dct8x8(block);
      for (std::size_t i = 0; i < coeffs.size(); ++i) {
        const double q = std::round(coeffs[i] / step);
        ++histograms[i][static_cast<long long>(q)];
        coeffs[i] = q * step;
      }
      const Block8x8 recon = idct8x8(coeffs);
      for (int y = 0; y < kBlock; ++y) {
        const int oy = by * kBlock + y;
        if (oy >= frame.height) break;
        for (int x = 0; x < kBlock; ++x) {
          const int ox = bx * kBlock + x;
          if (ox >= frame.width) break;
          result.frame.at(ox, oy) = to_pixel(recon[static_cast<std::size_t>(y * kBlock + x)]);
        }
      }
    }
  }

  const double blocks = static_cast<double>(blocks_x) * blocks_y;
  for (const auto& hist : histograms) {
    double entropy = 0.0;
    for (const auto& [symbol, count] : hist) {
      const double p = static_cast<double>(count) / blocks;
      entropy -= p * std::log2(p);
    }
    result.bits += blocks * entropy;
  }
  return result;
}

}  // namespace sdcnn
