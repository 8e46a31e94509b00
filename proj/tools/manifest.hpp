#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sdcnn::cli {

std::string sha256_hex(std::string_view bytes);

// Output files staged in memory and committed together: every file is
// written to a temporary sibling first, and only when all of them succeeded
// are they renamed into place. A failed command therefore leaves nothing.
class OutputSet {
 public:
  void add(const std::filesystem::path& path, std::string bytes);
  const std::vector<std::pair<std::filesystem::path, std::string>>& files() const { return files_; }
  void commit() const;

 private:
  std::vector<std::pair<std::filesystem::path, std::string>> files_;
};

// Record of one invocation, staged as "<primary output>.manifest.json".
// Holds no timestamps or host details, so repeated runs are byte-identical.
struct RunManifest {
  RunManifest(std::string name, std::map<std::string, std::string> flag_values, std::uint64_t run_seed = 0)
      : subcommand(std::move(name)), flags(std::move(flag_values)), seed(run_seed) {}

  std::string subcommand;
  std::map<std::string, std::string> flags;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256

  void add_input(const std::filesystem::path& path, std::string_view bytes);
  // Serializes the manifest, hashing every file staged so far, and stages it.
  void stage(OutputSet& outputs, const std::filesystem::path& primary_output) const;
};

}  // namespace sdcnn::cli
