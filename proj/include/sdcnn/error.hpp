#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sdcnn {

enum class ErrorKind {
  InvalidArgument,
  ShapeMismatch,
  OutOfRange,
  Io,
  UnsupportedFormat,
  Truncated,
  BadMagic,
  VersionMismatch,
  NonFinite,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (the CLI in
// particular) can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::ShapeMismatch: return "shape mismatch";
    case ErrorKind::OutOfRange: return "out of range";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::UnsupportedFormat: return "unsupported format";
    case ErrorKind::Truncated: return "truncated";
    case ErrorKind::BadMagic: return "bad magic";
    case ErrorKind::VersionMismatch: return "version mismatch";
    case ErrorKind::NonFinite: return "non-finite value";
  }
  return "error";
}

}  // namespace sdcnn
