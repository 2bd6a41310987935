#include "manifest.hpp"

#include "kc/numcore/error.hpp"
#include "kc/numcore/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <memory>

#ifndef KC_VERSION
#define KC_VERSION "0.0.0"
#endif

namespace kc::cli {

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) {
    throw Error(ErrorCode::IoError, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

OutputSet::OutputSet(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create output directory " + root_.string() + ": " + ec.message());
}

void OutputSet::write(const std::filesystem::path& relative, std::string_view bytes) {
  const auto path = root_ / relative;
  std::filesystem::create_directories(path.parent_path());
  write_file_atomic(path, bytes);
  files_.emplace_back(relative.generic_string(), sha256_hex(bytes));
}

void OutputSet::adopt(const std::filesystem::path& relative) {
  files_.emplace_back(relative.generic_string(), sha256_hex(read_file(root_ / relative)));
}

void OutputSet::write_manifest(const nlohmann::json& config, double wall_clock_seconds) {
  auto files = files_;
  std::sort(files.begin(), files.end());
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& [path, digest] : files) outputs.push_back({{"path", path}, {"sha256", digest}});
  const nlohmann::json manifest = {
      {"tool", "kc"},
      {"version", KC_VERSION},
      {"config", config},
      {"wall_clock_seconds", wall_clock_seconds},
      {"outputs", outputs},
  };
  write_file_atomic(root_ / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace kc::cli
