#pragma once

#include <vector>

#include "sdcnn/frame.hpp"

namespace sdcnn {

Frame hflip(const Frame& frame);
// Quarter turn clockwise; a W x H frame becomes H x W.
Frame rot90(const Frame& frame);
Frame rot180(const Frame& frame);

// Bilinear resampling with half-pixel-centred sample positions. Output
// extents are max(1, round(extent * factor)); factor must lie in (0, 1].
Frame scale_bilinear(const Frame& frame, double factor);

inline constexpr double kAugmentScales[] = {1.0, 0.75, 0.5, 0.25};
inline constexpr int kAugmentRotations[] = {0, 90, 180};
inline constexpr int kAugmentCount = 2 * 4 * 3;

// {identity, hflip} x {1, 0.75, 0.5, 0.25} x {0, 90, 180 degrees}, applied
// flip, then scale, then rotate. Output index is flip*12 + scale*3 + rotation.
std::vector<Frame> augment(const Frame& frame);

}  // namespace sdcnn
