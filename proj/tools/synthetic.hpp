#pragma once

#include <cstdint>

#include "sdcnn/frame.hpp"

namespace sdcnn::synth {

// Procedural stand-in for a natural photograph: smooth illumination, a few
// hard-edged objects with their own shading or stripes, and multi-octave
// value-noise texture, softened slightly and kept inside [16, 235].
// Deterministic in (width, height, seed).
Frame natural_image(int width, int height, std::uint64_t seed);

}  // namespace sdcnn::synth
