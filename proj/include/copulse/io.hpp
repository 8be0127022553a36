#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "copulse/covariance.hpp"

namespace copulse {
inline constexpr const char* kVersion = "0.1.0";
}

namespace copulse::io {

// Shortest round-trip decimal representation of a double.
std::string num(double v);

std::uint64_t fnv1a(const std::string& data);
std::string fnv1a_hex(const std::string& data);

// Long-format CSV: one header row, then data rows; numeric cells should be
// formatted with num() so files are byte-identical across runs.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header);
  void add_row(const std::vector<std::string>& cells);  // throws DimensionMismatch
  const std::string& str() const { return body_; }
  void save(const std::filesystem::path& path) const;

 private:
  std::size_t columns_ = 0;
  std::string body_;
};

// Binary covariance container: magic CPCV, version, domain tag, dims, then
// row-major interleaved re/im doubles.
void save_cov(const std::filesystem::path& path, const covariance::HermitianCov& cov);
covariance::HermitianCov load_cov(const std::filesystem::path& path);
void save_cov_csv(const std::filesystem::path& path, const covariance::HermitianCov& cov);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

// Run manifest: resolved config, its hash, seed, library versions, and the
// artifact list. Deliberately carries no timestamps so reruns are
// byte-identical.
nlohmann::json manifest(const std::string& verb, const nlohmann::json& config,
                        std::uint64_t seed, const std::vector<std::string>& outputs);

}  // namespace copulse::io
