#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace sdcnn {

// Whole-file read; throws Error(Io) when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

// Writes `bytes` to a temporary file next to `path`, then renames it over
// `path`, so readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace sdcnn
