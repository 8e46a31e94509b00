#include "sdcnn/tensor.hpp"

#include <bit>
#include <cstring>

namespace sdcnn {

Shape::Shape(std::initializer_list<int> extents)
    : Shape(std::span<const int>(extents.begin(), extents.size())) {}

Shape::Shape(std::span<const int> extents) {
  if (extents.empty() || extents.size() > static_cast<std::size_t>(kMaxRank)) {
    throw Error(ErrorKind::InvalidArgument, "tensor rank must be in [1, 4], got " + std::to_string(extents.size()));
  }
  for (std::size_t i = 0; i < extents.size(); ++i) {
    if (extents[i] < 1) {
      throw Error(ErrorKind::InvalidArgument, "tensor extents must be positive, axis " + std::to_string(i) +
                                                  " is " + std::to_string(extents[i]));
    }
    dims_[i] = extents[i];
  }
  rank_ = static_cast<int>(extents.size());
}

std::size_t Shape::numel() const {
  if (rank_ == 0) return 0;
  std::size_t n = 1;
  for (int i = 0; i < rank_; ++i) n *= static_cast<std::size_t>(dims_[static_cast<std::size_t>(i)]);
  return n;
}

std::string Shape::to_string() const {
  std::string s = "[";
  for (int i = 0; i < rank_; ++i) {
    if (i) s += "x";
    s += std::to_string(dims_[static_cast<std::size_t>(i)]);
  }
  return s + "]";
}

void append_values_le(const Tensor& tensor, std::string& out) {
  const std::size_t start = out.size();
  out.resize(start + tensor.size() * 4);
  char* dst = out.data() + start;
  for (float v : tensor.values()) {
    auto bits = std::bit_cast<std::uint32_t>(v);
    for (int b = 0; b < 4; ++b) *dst++ = static_cast<char>((bits >> (8 * b)) & 0xFFu);
  }
}

Tensor decode_values_le(const Shape& shape, std::span<const char> bytes) {
  const std::size_t n = shape.numel();
  if (bytes.size() != n * 4) {
    throw Error(ErrorKind::ShapeMismatch, "shape " + shape.to_string() + " needs " + std::to_string(n * 4) +
                                              " bytes, payload has " + std::to_string(bytes.size()));
  }
  std::vector<float> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + static_cast<std::size_t>(b)]))
              << (8 * b);
    }
    values[i] = std::bit_cast<float>(bits);
  }
  return Tensor(shape, std::move(values));
}

}  // namespace sdcnn
