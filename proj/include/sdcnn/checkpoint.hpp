#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "sdcnn/model.hpp"

namespace sdcnn {

// Checkpoint file layout, all integers little-endian:
//   "SDCN" | version u32 | qp i32 | iteration u64 | seed u64 | layer count u32
//   per layer: kind u8 (0 conv, 1 deconv) | activation u8 (0 linear, 1 relu)
//              in_ch u32 | out_ch u32 | kernel u32 | stride u32
//              weights f32[] | biases f32[]   (canonical tensor order)
// The residual skip is implied: every stored network is residual.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const Checkpoint& ckpt);

// Errors: BadMagic, VersionMismatch, Truncated (file ends inside a header),
// ShapeMismatch (payload length or layer chain disagrees with the declared
// shapes).
Checkpoint parse_checkpoint(std::string_view bytes);

// Written to a temporary sibling and renamed into place.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sdcnn
