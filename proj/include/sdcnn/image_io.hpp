#pragma once

#include <filesystem>
#include <string_view>

#include "sdcnn/frame.hpp"

namespace sdcnn {

// Binary greyscale PGM ("P5", maxval 255). Header comments are skipped.
Frame parse_pgm(std::string_view bytes);
std::string encode_pgm(const Frame& frame);
Frame load_pgm(const std::filesystem::path& path);
void save_pgm(const Frame& frame, const std::filesystem::path& path);

// Bytes occupied by one planar 8-bit 4:2:0 frame (luma plus two
// half-resolution chroma planes, rounded up for odd extents).
std::size_t yuv420_frame_bytes(int width, int height);

// Y plane of frame `frame_index` from a raw frame-sequential 4:2:0 file.
Frame load_yuv420_luma(const std::filesystem::path& path, int width, int height, int frame_index);

// Single 4:2:0 frame with neutral (128) chroma.
void save_yuv420_luma(const Frame& frame, const std::filesystem::path& path);

}  // namespace sdcnn
