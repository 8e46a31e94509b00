#include "sdcnn/image_io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

#include "sdcnn/file_util.hpp"

namespace sdcnn {

std::uint8_t to_pixel(double value) {
  const double r = std::round(value);
  if (!(r > 0.0)) return 0;  // also maps NaN to 0
  if (r >= 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string_view next_token(std::string_view bytes, std::size_t& pos) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return bytes.substr(start, pos - start);
}

int header_int(std::string_view bytes, std::size_t& pos, const char* field) {
  const std::string_view tok = next_token(bytes, pos);
  if (tok.empty()) throw Error(ErrorKind::Truncated, std::string("PGM header ends before ") + field);
  long value = 0;
  for (char c : tok) {
    if (!std::isdigit(static_cast<unsigned char>(c)) || value > 1'000'000) {
      throw Error(ErrorKind::UnsupportedFormat, std::string("PGM ") + field + " is not a valid integer");
    }
    value = value * 10 + (c - '0');
  }
  return static_cast<int>(value);
}

}  // namespace

Frame parse_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  const std::string_view magic = next_token(bytes, pos);
  if (magic != "P5") {
    throw Error(ErrorKind::UnsupportedFormat,
                "only binary P5 PGM is supported, found magic \"" + std::string(magic.substr(0, 2)) + "\"");
  }
  const int width = header_int(bytes, pos, "width");
  const int height = header_int(bytes, pos, "height");
  const int maxval = header_int(bytes, pos, "maxval");
  if (width < 1 || height < 1) throw Error(ErrorKind::UnsupportedFormat, "PGM dimensions must be positive");
  if (maxval != 255) {
    throw Error(ErrorKind::UnsupportedFormat, "PGM maxval must be 255, got " + std::to_string(maxval));
  }
  // Exactly one whitespace byte separates the header from the raster.
  if (pos >= bytes.size()) throw Error(ErrorKind::Truncated, "PGM has no raster");
  ++pos;
  const std::size_t need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() - pos < need) {
    throw Error(ErrorKind::Truncated, "PGM raster has " + std::to_string(bytes.size() - pos) + " of " +
                                          std::to_string(need) + " bytes");
  }
  const auto* raster = reinterpret_cast<const std::uint8_t*>(bytes.data() + pos);
  return Frame(width, height, std::vector<std::uint8_t>(raster, raster + need));
}

std::string encode_pgm(const Frame& frame) {
  std::string out = "P5\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(frame.pixels.data()), frame.pixels.size());
  return out;
}

Frame load_pgm(const std::filesystem::path& path) { return parse_pgm(read_file(path)); }

void save_pgm(const Frame& frame, const std::filesystem::path& path) { write_file_atomic(path, encode_pgm(frame)); }

std::size_t yuv420_frame_bytes(int width, int height) {
  const std::size_t luma = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t chroma = static_cast<std::size_t>((width + 1) / 2) * static_cast<std::size_t>((height + 1) / 2);
  return luma + 2 * chroma;
}

Frame load_yuv420_luma(const std::filesystem::path& path, int width, int height, int frame_index) {
  if (width < 1 || height < 1 || frame_index < 0) {
    throw Error(ErrorKind::InvalidArgument, "YUV dimensions must be positive and frame index non-negative");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  const std::size_t frame_bytes = yuv420_frame_bytes(width, height);
  const std::uintmax_t file_bytes = std::filesystem::file_size(path);
  const std::uintmax_t offset = static_cast<std::uintmax_t>(frame_index) * frame_bytes;
  if (file_bytes < offset + frame_bytes) {
    throw Error(ErrorKind::OutOfRange, path.string() + " holds " + std::to_string(file_bytes / frame_bytes) +
                                           " complete frames; frame " + std::to_string(frame_index) +
                                           " requested");
  }
  Frame f(width, height);
  in.seekg(static_cast<std::streamoff>(offset));
  in.read(reinterpret_cast<char*>(f.pixels.data()), static_cast<std::streamsize>(f.pixels.size()));
  if (!in) throw Error(ErrorKind::Io, "failed reading " + path.string());
  return f;
}

void save_yuv420_luma(const Frame& frame, const std::filesystem::path& path) {
  std::string bytes(reinterpret_cast<const char*>(frame.pixels.data()), frame.pixels.size());
  bytes.resize(yuv420_frame_bytes(frame.width, frame.height), static_cast<char>(128));
  write_file_atomic(path, bytes);
}

}  // namespace sdcnn
