#include "sdcnn/dataset.hpp"

#include <string>

#include "sdcnn/augment.hpp"
#include "sdcnn/codec.hpp"

namespace sdcnn {
namespace {

Tensor window(const Frame& frame, int x0, int y0, int size) {
  Tensor t(Shape{1, size, size});
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) t.at(0, y, x) = static_cast<float>(frame.at(x0 + x, y0 + y)) / 255.0f;
  }
  return t;
}

template <typename Fn>
void for_each_window(const Frame& frame, int size, int stride, Fn&& fn) {
  if (size < 1 || stride < 1) throw Error(ErrorKind::InvalidArgument, "patch size and stride must be positive");
  if (frame.width < size || frame.height < size) return;
  for (int y = 0; y + size <= frame.height; y += stride) {
    for (int x = 0; x + size <= frame.width; x += stride) fn(x, y);
  }
}

}  // namespace

std::vector<Patch> extract_patches(const Frame& frame, int size, int stride) {
  std::vector<Patch> patches;
  for_each_window(frame, size, stride, [&](int x, int y) { patches.push_back({x, y, window(frame, x, y, size)}); });
  return patches;
}

std::vector<PatchPair> cut_patch_pairs(const Frame& truth, const Frame& degraded, int source, int size,
                                       int stride) {
  if (truth.width != degraded.width || truth.height != degraded.height) {
    throw Error(ErrorKind::ShapeMismatch, "frame pair " + std::to_string(source) + ": truth is " +
                                              std::to_string(truth.width) + "x" + std::to_string(truth.height) +
                                              " but degraded is " + std::to_string(degraded.width) + "x" +
                                              std::to_string(degraded.height));
  }
  std::vector<PatchPair> pairs;
  for_each_window(truth, size, stride, [&](int x, int y) {
    pairs.push_back({window(degraded, x, y, size), window(truth, x, y, size), source, x, y});
  });
  return pairs;
}

std::vector<PatchPair> build_dataset(std::span<const Frame> frames, int qp) {
  qstep(qp);  // validates qp before any work
  std::vector<PatchPair> pairs;
  int source = 0;
  for (const Frame& frame : frames) {
    for (const Frame& augmented : augment(frame)) {
      const Frame degraded = degrade_frame(augmented, qp).frame;
      auto cut = cut_patch_pairs(augmented, degraded, source++);
      pairs.insert(pairs.end(), std::make_move_iterator(cut.begin()), std::make_move_iterator(cut.end()));
    }
  }
  return pairs;
}

std::vector<PatchPair> build_dataset_from_pairs(std::span<const Frame> truth, std::span<const Frame> degraded) {
  if (truth.size() != degraded.size()) {
    throw Error(ErrorKind::ShapeMismatch, std::to_string(truth.size()) + " ground-truth frames but " +
                                              std::to_string(degraded.size()) + " degraded frames");
  }
  std::vector<PatchPair> pairs;
  int source = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i].width != degraded[i].width || truth[i].height != degraded[i].height) {
      throw Error(ErrorKind::ShapeMismatch, "pair " + std::to_string(i) + " has mismatched dimensions");
    }
    const auto t = augment(truth[i]);
    const auto d = augment(degraded[i]);
    for (std::size_t a = 0; a < t.size(); ++a) {
      auto cut = cut_patch_pairs(t[a], d[a], source++);
      pairs.insert(pairs.end(), std::make_move_iterator(cut.begin()), std::make_move_iterator(cut.end()));
    }
  }
  return pairs;
}

}  // namespace sdcnn
