#include "sdcnn/text_format.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace sdcnn {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string_view strip_comment(std::string_view line) {
  const auto hash = line.find('#');
  return trim(hash == std::string_view::npos ? line : line.substr(0, hash));
}

std::vector<std::string_view> lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <typename I>
I parse_integer(std::string_view text, const std::string& what) {
  I value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::InvalidArgument, what + ": expected an integer, got \"" + std::string(text) + "\"");
  }
  return value;
}

}  // namespace

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

double parse_real(std::string_view text) {
  text = trim(text);
  if (text == "inf") return kInfinitePsnr;
  if (text == "-inf") return -kInfinitePsnr;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorKind::InvalidArgument, "expected a number, got \"" + std::string(text) + "\"");
  }
  return value;
}

TrainConfig parse_train_config(std::string_view text) {
  TrainConfig cfg;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  for (std::string_view raw : lines(text)) {
    ++line_no;
    const std::string_view line = strip_comment(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "config line " + std::to_string(line_no);
    if (eq == std::string_view::npos) throw Error(ErrorKind::InvalidArgument, where + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw Error(ErrorKind::InvalidArgument, where + ": duplicate key " + key);
    if (key == "batch_size") {
      cfg.batch_size = parse_integer<int>(value, where);
    } else if (key == "iterations") {
      cfg.iterations = parse_integer<int>(value, where);
    } else if (key == "lr_main") {
      cfg.lr_main = parse_real(value);
    } else if (key == "lr_last") {
      cfg.lr_last = parse_real(value);
    } else if (key == "momentum") {
      cfg.momentum = parse_real(value);
    } else if (key == "weight_decay") {
      cfg.weight_decay = parse_real(value);
    } else if (key == "clip_theta") {
      cfg.clip_theta = parse_real(value);
    } else if (key == "seed") {
      cfg.seed = parse_integer<std::uint64_t>(value, where);
    } else if (key == "validation_fraction") {
      cfg.validation_fraction = parse_real(value);
    } else {
      throw Error(ErrorKind::InvalidArgument, where + ": unknown key \"" + key + "\"");
    }
  }
  cfg.validate();
  return cfg;
}

NetworkSpec parse_network_spec(std::string_view text) {
  NetworkSpec spec;
  spec.residual = true;
  int line_no = 0;
  for (std::string_view raw : lines(text)) {
    ++line_no;
    const std::string_view line = strip_comment(raw);
    if (line.empty()) continue;
    const std::string where = "spec line " + std::to_string(line_no);
    const auto f = split_ws(line);
    if (f.size() != 6) {
      throw Error(ErrorKind::InvalidArgument, where + ": expected `kind in_ch out_ch kernel stride activation`");
    }
    LayerSpec l;
    if (f[0] == "conv") {
      l.kind = LayerKind::Conv;
    } else if (f[0] == "deconv") {
      l.kind = LayerKind::Deconv;
    } else {
      throw Error(ErrorKind::InvalidArgument, where + ": kind must be conv or deconv");
    }
    l.in_channels = parse_integer<int>(f[1], where);
    l.out_channels = parse_integer<int>(f[2], where);
    l.kernel = parse_integer<int>(f[3], where);
    l.stride = parse_integer<int>(f[4], where);
    if (f[5] == "relu") {
      l.activation = Activation::Relu;
    } else if (f[5] == "linear") {
      l.activation = Activation::Linear;
    } else {
      throw Error(ErrorKind::InvalidArgument, where + ": activation must be relu or linear");
    }
    spec.layers.push_back(l);
  }
  spec.validate();
  return spec;
}

std::string format_network_spec(const NetworkSpec& spec) {
  std::string out = "# kind in_ch out_ch kernel stride activation\n";
  for (const LayerSpec& l : spec.layers) {
    out += std::string(l.kind == LayerKind::Conv ? "conv" : "deconv") + " " + std::to_string(l.in_channels) + " " +
           std::to_string(l.out_channels) + " " + std::to_string(l.kernel) + " " + std::to_string(l.stride) + " " +
           (l.activation == Activation::Relu ? "relu" : "linear") + "\n";
  }
  return out;
}

std::vector<RDPoint> parse_rd_csv(std::string_view text) {
  const auto rows = lines(text);
  std::size_t i = 0;
  while (i < rows.size() && trim(rows[i]).empty()) ++i;
  if (i == rows.size() || trim(rows[i]) != kRdCsvHeader) {
    throw Error(ErrorKind::InvalidArgument, "RD csv must start with the header \"rate,psnr\"");
  }
  std::vector<RDPoint> points;
  for (++i; i < rows.size(); ++i) {
    const std::string_view row = trim(rows[i]);
    if (row.empty()) continue;
    const auto comma = row.find(',');
    if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos) {
      throw Error(ErrorKind::InvalidArgument, "RD csv row " + std::to_string(i + 1) + ": expected rate,psnr");
    }
    points.push_back({parse_real(row.substr(0, comma)), parse_real(row.substr(comma + 1))});
  }
  return points;
}

std::string format_rd_row(const RDPoint& point) {
  return format_real(point.rate) + "," + format_real(point.psnr) + "\n";
}

}  // namespace sdcnn
