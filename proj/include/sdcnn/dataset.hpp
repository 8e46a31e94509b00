#pragma once

#include <span>
#include <vector>

#include "sdcnn/frame.hpp"
#include "sdcnn/tensor.hpp"

namespace sdcnn {

inline constexpr int kPatchSize = 32;
inline constexpr int kPatchStride = 10;

struct Patch {
  int x = 0;
  int y = 0;
  Tensor values;  // [1, size, size], pixels / 255
};

// Full windows only, top-left corners at multiples of `stride`; a frame
// smaller than the window yields nothing. Per axis the count is
// floor((extent - size) / stride) + 1.
std::vector<Patch> extract_patches(const Frame& frame, int size = kPatchSize, int stride = kPatchStride);

struct PatchPair {
  Tensor compressed;
  Tensor truth;
  int source = 0;  // index of the (augmented) frame the pair was cut from
  int x = 0;
  int y = 0;
};

// Aligned windows cut at identical offsets from a degraded frame and its
// original.
std::vector<PatchPair> cut_patch_pairs(const Frame& truth, const Frame& degraded, int source,
                                       int size = kPatchSize, int stride = kPatchStride);

// Every frame is augmented 24x; each augmented frame is degraded whole by the
// block-transform codec at `qp` before the windows are cut.
std::vector<PatchPair> build_dataset(std::span<const Frame> frames, int qp);

// Same pipeline for frames degraded elsewhere (e.g. by a real encoder):
// truth[i] and degraded[i] must share dimensions and receive identical
// augmentation.
std::vector<PatchPair> build_dataset_from_pairs(std::span<const Frame> truth, std::span<const Frame> degraded);

}  // namespace sdcnn
