#include "sdcnn/checkpoint.hpp"

#include <cstring>

#include "sdcnn/file_util.hpp"

namespace sdcnn {
namespace {

constexpr char kMagic[4] = {'S', 'D', 'C', 'N'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 8 + 8 + 4;
constexpr std::size_t kLayerHeaderBytes = 1 + 1 + 4 * 4;

template <typename U>
void put_le(std::string& out, U value) {
  for (std::size_t b = 0; b < sizeof(U); ++b) out.push_back(static_cast<char>((value >> (8 * b)) & 0xFFu));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }

  void require(std::size_t n, const char* what) {
    if (remaining() < n) {
      throw Error(ErrorKind::Truncated, std::string("checkpoint ends inside ") + what + " at byte " +
                                            std::to_string(bytes_.size()));
    }
  }

  template <typename U>
  U get() {
    U value = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) {
      value |= static_cast<U>(static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b));
    }
    pos_ += sizeof(U);
    return value;
  }

  std::span<const char> take(std::size_t n) {
    std::span<const char> s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  ckpt.validate();
  if (!ckpt.spec.residual) {
    throw Error(ErrorKind::InvalidArgument, "checkpoint format stores residual networks only");
  }
  std::string out(kMagic, 4);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.qp));
  put_le<std::uint64_t>(out, ckpt.iteration);
  put_le<std::uint64_t>(out, ckpt.seed);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.layers.size()));
  for (std::size_t i = 0; i < ckpt.layers.size(); ++i) {
    const LayerSpec& l = ckpt.spec.layers[i];
    out.push_back(static_cast<char>(l.kind));
    out.push_back(static_cast<char>(l.activation));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.in_channels));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.out_channels));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.kernel));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.stride));
    append_values_le(ckpt.layers[i].weights, out);
    append_values_le(ckpt.layers[i].bias, out);
  }
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  in.require(4, "magic");
  if (std::memcmp(in.take(4).data(), kMagic, 4) != 0) {
    throw Error(ErrorKind::BadMagic, "checkpoint does not start with \"SDCN\"");
  }
  in.require(kHeaderBytes - 4, "header");
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw Error(ErrorKind::VersionMismatch, "checkpoint format version " + std::to_string(version) +
                                                ", this build reads version " + std::to_string(kCheckpointVersion));
  }
  Checkpoint ckpt;
  ckpt.qp = static_cast<std::int32_t>(in.get<std::uint32_t>());
  ckpt.iteration = in.get<std::uint64_t>();
  ckpt.seed = in.get<std::uint64_t>();
  const auto count = in.get<std::uint32_t>();
  ckpt.spec.residual = true;

  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string where = "layer " + std::to_string(i + 1);
    in.require(kLayerHeaderBytes, "a layer header");
    const auto kind = in.get<std::uint8_t>();
    const auto activation = in.get<std::uint8_t>();
    const auto in_ch = in.get<std::uint32_t>();
    const auto out_ch = in.get<std::uint32_t>();
    const auto kernel = in.get<std::uint32_t>();
    const auto stride = in.get<std::uint32_t>();
    if (kind > 1 || activation > 1) {
      throw Error(ErrorKind::ShapeMismatch, where + ": invalid kind/activation code");
    }
    constexpr std::uint32_t kLimit = 1u << 16;
    if (in_ch == 0 || out_ch == 0 || kernel == 0 || stride == 0 || in_ch > kLimit || out_ch > kLimit ||
        kernel > 255 || stride > 255) {
      throw Error(ErrorKind::ShapeMismatch, where + ": implausible layer dimensions");
    }
    LayerSpec l{static_cast<LayerKind>(kind),   static_cast<int>(in_ch),  static_cast<int>(out_ch),
                static_cast<int>(kernel),       static_cast<int>(stride), static_cast<Activation>(activation)};
    const std::size_t weight_bytes = l.weight_count() * 4;
    const std::size_t bias_bytes = static_cast<std::size_t>(out_ch) * 4;
    if (in.remaining() < weight_bytes + bias_bytes) {
      throw Error(ErrorKind::ShapeMismatch, where + " declares " + l.weight_shape().to_string() + " weights (" +
                                                std::to_string(weight_bytes + bias_bytes) + " payload bytes) but only " +
                                                std::to_string(in.remaining()) + " bytes remain");
    }
    LayerParams<float> p;
    p.weights = decode_values_le(l.weight_shape(), in.take(weight_bytes));
    p.bias = decode_values_le(Shape{l.out_channels}, in.take(bias_bytes));
    ckpt.spec.layers.push_back(l);
    ckpt.layers.push_back(std::move(p));
  }
  if (in.remaining() != 0) {
    throw Error(ErrorKind::ShapeMismatch, "declared layer shapes leave " + std::to_string(in.remaining()) +
                                              " unexplained trailing bytes");
  }
  ckpt.validate();
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(read_file(path)); }

}  // namespace sdcnn
