#include "copulse/io.hpp"

#include <Eigen/Dense>
#include <charconv>
#include <cstring>
#include <fstream>
#include <system_error>

#include "copulse/errors.hpp"

namespace copulse::io {

namespace {

constexpr char kCovMagic[4] = {'C', 'P', 'C', 'V'};
constexpr std::uint32_t kCovVersion = 1;

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, mode);
  if (!f) throw Error("cannot open for writing: " + path.string());
  return f;
}

}  // namespace

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string fnv1a_hex(const std::string& data) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(data)));
  return buf;
}

CsvWriter::CsvWriter(const std::vector<std::string>& header) : columns_(header.size()) {
  if (header.empty()) throw Empty("CSV needs at least one column");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) body_ += ',';
    body_ += header[i];
  }
  body_ += '\n';
}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw DimensionMismatch("CSV row width does not match header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) body_ += ',';
    body_ += cells[i];
  }
  body_ += '\n';
}

void CsvWriter::save(const std::filesystem::path& path) const { write_text(path, body_); }

void save_cov(const std::filesystem::path& path, const covariance::HermitianCov& cov) {
  auto f = open_out(path, std::ios::binary | std::ios::trunc);
  auto put = [&f](const void* p, std::size_t n) {
    f.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  };
  put(kCovMagic, 4);
  put(&kCovVersion, sizeof(kCovVersion));
  const std::uint8_t domain = static_cast<std::uint8_t>(cov.domain);
  const std::int32_t a = cov.dim_a, b = cov.dim_b;
  const std::int64_t n = cov.matrix.rows();
  put(&domain, sizeof(domain));
  put(&a, sizeof(a));
  put(&b, sizeof(b));
  put(&n, sizeof(n));
  for (Eigen::Index r = 0; r < cov.matrix.rows(); ++r)
    for (Eigen::Index c = 0; c < cov.matrix.cols(); ++c) {
      const double re = cov.matrix(r, c).real(), im = cov.matrix(r, c).imag();
      put(&re, sizeof(re));
      put(&im, sizeof(im));
    }
  if (!f) throw Error("short write: " + path.string());
}

covariance::HermitianCov load_cov(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open for reading: " + path.string());
  char magic[4];
  std::uint32_t ver = 0;
  std::uint8_t domain = 0;
  std::int32_t a = 0, b = 0;
  std::int64_t n = 0;
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(&ver), sizeof(ver));
  f.read(reinterpret_cast<char*>(&domain), sizeof(domain));
  f.read(reinterpret_cast<char*>(&a), sizeof(a));
  f.read(reinterpret_cast<char*>(&b), sizeof(b));
  f.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!f || std::memcmp(magic, kCovMagic, 4) != 0 || ver != kCovVersion || domain > 2 || n < 0)
    throw Error("not a covariance container: " + path.string());
  Eigen::MatrixXcd m(n, n);
  for (std::int64_t r = 0; r < n; ++r)
    for (std::int64_t c = 0; c < n; ++c) {
      double re = 0.0, im = 0.0;
      f.read(reinterpret_cast<char*>(&re), sizeof(re));
      f.read(reinterpret_cast<char*>(&im), sizeof(im));
      m(r, c) = {re, im};
    }
  if (!f) throw Error("truncated covariance container: " + path.string());
  return covariance::make_cov(std::move(m), static_cast<covariance::CovDomain>(domain), a, b);
}

void save_cov_csv(const std::filesystem::path& path, const covariance::HermitianCov& cov) {
  CsvWriter csv({"row", "col", "re", "im"});
  for (Eigen::Index r = 0; r < cov.matrix.rows(); ++r)
    for (Eigen::Index c = 0; c < cov.matrix.cols(); ++c)
      csv.add_row({std::to_string(r), std::to_string(c), num(cov.matrix(r, c).real()),
                   num(cov.matrix(r, c).imag())});
  csv.save(path);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto f = open_out(path, std::ios::trunc);
  f << text;
  if (!f) throw Error("short write: " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

nlohmann::json manifest(const std::string& verb, const nlohmann::json& config,
                        std::uint64_t seed, const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["verb"] = verb;
  j["config"] = config;
  j["config_hash"] = fnv1a_hex(config.dump());
  j["seed"] = seed;
  j["versions"] = {{"copulse", kVersion},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                 std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)}};
  j["outputs"] = outputs;
  return j;
}

}  // namespace copulse::io
