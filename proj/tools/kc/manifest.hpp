#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kc::cli {

std::string sha256_hex(std::string_view bytes);

/// Collects every file a command writes under its output directory and
/// finishes with manifest.json listing them with their SHA-256 digests.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  /// Atomic write of `bytes` to root/relative.
  void write(const std::filesystem::path& relative, std::string_view bytes);
  /// Records a file some library routine already wrote under root.
  void adopt(const std::filesystem::path& relative);

  /// Writes manifest.json last. `config` is the resolved snapshot.
  void write_manifest(const nlohmann::json& config, double wall_clock_seconds);

 private:
  std::filesystem::path root_;
  std::vector<std::pair<std::string, std::string>> files_;  // relative path, digest
};

}  // namespace kc::cli
