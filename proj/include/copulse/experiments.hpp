#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "copulse/coprime.hpp"
#include "copulse/fraction.hpp"
#include "copulse/scene.hpp"
#include "copulse/stap.hpp"

namespace copulse::experiments {

// Scenario block of the config file: geometry, platform and RF constants,
// clutter statistics, optional target and interference.
struct ScenarioConfig {
  coprime::CoprimePair sensor_pair{2, 3};
  coprime::CoprimePair pulse_pair{2, 3};
  double d = 0.15;
  double f_b = 1e9;
  double T = 5e-4;
  double T_p = 1e-6;
  double v_p = 150.0;
  double H = 6000.0;
  std::optional<double> delta_f;  // default 1 / (n_ambiguities * T)
  int n_ambiguities = 6;
  int n_patches = 181;
  double cnr_db = 40.0;
  double noise_power = 1.0;
  std::uint64_t seed = 20260825;
  std::optional<scene::TargetSpec> target;
  std::optional<scene::InterferenceSpec> interference;

  scene::CCubeConfig ccube() const;
  scene::ClutterScene make_scene() const;
};

struct SpectrumParams {
  int n_fT = 96;
  int n_fR = 96;
  double ridge_threshold_db = -10.0;
};

struct RankTableParams {
  struct Row {
    Fraction beta{1, 1};
    double d = 0.15;
    double v_p = 150.0;
  };
  std::vector<Row> rows;
  int n_p_min = 2;
  int n_p_max = 10;
};

struct SinrParams {
  int n_samples = 500;
  int trials = 10;
  int n_doppler = 41;
  double notch_halfwidth = 0.05;
};

struct RejectParams {
  std::optional<std::array<int, 3>> ranks;  // default: time-bandwidth rule
  int n_doppler = 41;
  int region_points = 7;  // per-axis lattice inside the region
  // Variant: recompute the post-rejection weight from the projected (loaded)
  // covariance instead of reusing the pre-rejection weight.
  bool recompute_weight = false;
};

struct BenchParams {
  std::vector<coprime::CoprimePair> sensor_pairs{{1, 2}, {1, 3}, {2, 3}};
  coprime::CoprimePair timed_pair{2, 3};
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  SpectrumParams spectrum;
  RankTableParams rank_table;
  SinrParams sinr;
  RejectParams reject;
  BenchParams bench;
  nlohmann::json raw;  // resolved config as parsed, hashed into the manifest
};

// Schema-checked loaders; unknown keys and wrong types raise ConfigError with
// the offending path.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

// ---- drivers ----

struct RankTableRow {
  Fraction beta;
  int N_p = 0;
  int predicted = 0;
  int empirical_coarray = 0;
  int empirical_dpss = 0;
};

struct RankTableResult {
  std::vector<RankTableRow> rows;
};

RankTableResult run_rank_table(const ExperimentConfig& cfg, int threads = 1);

struct SpectrumMethodResult {
  std::string method;       // physical | coarray | dpss
  Eigen::MatrixXd slice;    // rows f_T, cols f_R, clutter-coupled Doppler
  int ridges = 0;
};

struct SpectrumResult {
  std::vector<double> f_T;
  std::vector<double> f_R;
  std::vector<SpectrumMethodResult> methods;
};

SpectrumResult run_spectrum(const ExperimentConfig& cfg, int threads = 1);

struct SinrResult {
  std::vector<double> f_d;
  std::map<std::string, std::vector<double>> sinr_db;  // PhysicalFD | CoarrayFD | CoarrayDPSS
  double gap_physical_db = 0.0;  // CoarrayFD - PhysicalFD, off-notch average
  double gap_dpss_db = 0.0;      // CoarrayFD - CoarrayDPSS, off-notch average
};

SinrResult run_sinr(const ExperimentConfig& cfg, int threads = 1);

struct RejectResult {
  std::array<int, 3> ranks{};
  int rank_total = 0;
  double tail_bound = 0.0;
  double energy_pre = 0.0;   // mean in-region spectrum power before rejection
  double energy_post = 0.0;  // and after
  double drop_db = 0.0;
  std::vector<double> f_d;
  std::vector<double> sinr_pre_db;   // standard quotient
  std::vector<double> sinr_post_db;  // complement-projected denominator
  stap::Spectrum region_pre;
  stap::Spectrum region_post;
};

RejectResult run_reject(const ExperimentConfig& cfg, int threads = 1);

struct BenchEntry {
  coprime::CoprimePair sensor_pair;
  int P_s = 0;
  Eigen::Index coarray_dim = 0;
  long long physical_direct_flops = 0;
  long long coarray_direct_flops = 0;
  long long dpss_counted_flops = 0;
  long long dpss_formula_flops = 0;  // 2 r_b^3 + r_b D^2
  double counted_over_formula = 0.0;
  double wall_direct_ms = -1.0;  // only measured for the timed pair
  double wall_dpss_ms = -1.0;
};

struct BenchResult {
  std::vector<BenchEntry> entries;
};

BenchResult run_bench(const ExperimentConfig& cfg, int threads = 1, bool measure_wall = true);

// ---- artifact emission (returns written filenames relative to out) ----

std::vector<std::string> emit_rank_table(const RankTableResult& r,
                                         const std::filesystem::path& out);
std::vector<std::string> emit_spectrum(const SpectrumResult& r, const std::filesystem::path& out);
std::vector<std::string> emit_sinr(const SinrResult& r, const std::filesystem::path& out);
std::vector<std::string> emit_reject(const RejectResult& r, const std::filesystem::path& out);
std::vector<std::string> emit_bench(const BenchResult& r, const std::filesystem::path& out);

// Built-in preset configs mirrored by the files in presets/.
nlohmann::json preset_json(const std::string& name);  // throws ConfigError on unknown name
std::vector<std::string> preset_names();

}  // namespace copulse::experiments
