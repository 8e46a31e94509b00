#pragma once

#include <array>

#include "sdcnn/frame.hpp"

namespace sdcnn {

inline constexpr int kMinQp = 0;
inline constexpr int kMaxQp = 51;
inline constexpr int kBlock = 8;

using Block8x8 = std::array<double, kBlock * kBlock>;  // row-major

// HEVC-style step size 2^((qp - 4) / 6): 1.0 at qp 4, doubling every 6 steps.
double qstep(int qp);

// Orthonormal 2-D type-II DCT and its inverse.
Block8x8 dct8x8(const Block8x8& block);
Block8x8 idct8x8(const Block8x8& coeffs);

struct DegradeResult {
  Frame frame;
  double bits = 0.0;  // zeroth-order entropy estimate of the quantized symbols
};

// Intra-only block-transform codec standing in for a real encoder/decoder
// pair. The frame is edge-replicated to whole 8x8 blocks; each block is
// transformed, quantized with q = round(c / qstep), reconstructed as q*qstep
// and inverse transformed; the result is cropped and rounded to 8 bits.
//
// The rate is sum over the 64 coefficient positions of
// (#blocks) * H(position), H being the empirical Shannon entropy of the
// quantized symbols seen at that position.
DegradeResult degrade_frame(const Frame& frame, int qp);

}  // namespace sdcnn
