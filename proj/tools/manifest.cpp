#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <system_error>

#include "json.hpp"
#include "sdcnn/error.hpp"

namespace sdcnn::cli {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::Io, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

void OutputSet::add(const std::filesystem::path& path, std::string bytes) {
  files_.emplace_back(path, std::move(bytes));
}

void OutputSet::commit() const {
  std::vector<std::filesystem::path> temps;
  auto cleanup = [&temps] {
    for (const auto& t : temps) {
      std::error_code ignored;
      std::filesystem::remove(t, ignored);
    }
  };
  for (const auto& [path, bytes] : files_) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      cleanup();
      throw Error(ErrorKind::Io, "cannot create " + tmp.string());
    }
    temps.push_back(tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) {
      cleanup();
      throw Error(ErrorKind::Io, "failed writing " + tmp.string());
    }
  }
  for (std::size_t i = 0; i < files_.size(); ++i) {
    std::error_code ec;
    std::filesystem::rename(temps[i], files_[i].first, ec);
    if (ec) {
      cleanup();
      throw Error(ErrorKind::Io, "cannot move " + temps[i].string() + " into place: " + ec.message());
    }
  }
}

void RunManifest::add_input(const std::filesystem::path& path, std::string_view bytes) {
  inputs.emplace_back(path.string(), sha256_hex(bytes));
}

void RunManifest::stage(OutputSet& outputs, const std::filesystem::path& primary_output) const {
  nlohmann::ordered_json j;
  j["subcommand"] = subcommand;
  j["flags"] = flags;
  j["seed"] = seed;
  j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& [path, hash] : inputs) j["inputs"].push_back({{"path", path}, {"sha256", hash}});
  j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& [path, bytes] : outputs.files()) {
    j["outputs"].push_back({{"path", path.string()}, {"sha256", sha256_hex(bytes)}});
  }
  std::filesystem::path path = primary_output;
  path += ".manifest.json";
  outputs.add(path, j.dump(2) + "\n");
}

}  // namespace sdcnn::cli
