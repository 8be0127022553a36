#include "copulse/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <thread>

#include "copulse/errors.hpp"
#include "copulse/io.hpp"
#include "copulse/rank.hpp"
#include "copulse/rejection.hpp"
#include "copulse/slepian.hpp"

namespace copulse::experiments {

using nlohmann::json;

namespace {

void run_chunked(int n, int threads, const std::function<void(int, int)>& body) {
  const int nt = std::max(1, std::min(threads, n));
  if (nt == 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    const int b = t * chunk, e = std::min(n, b + chunk);
    if (b < e) pool.emplace_back(body, b, e);
  }
  for (auto& th : pool) th.join();
}

std::vector<double> linspace_inclusive(double lo, double hi, int n) {
  if (n < 2) throw DimensionMismatch("grid needs at least two points");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + step * i;
  return out;
}

int count_significant(const Eigen::VectorXd& eigs, double rel = 1e-6) {
  const double top = eigs.size() ? eigs.maxCoeff() : 0.0;
  if (top <= 0.0) return 0;
  return static_cast<int>((eigs.array() >= rel * top).count());
}

struct CoarrayDims {
  int L_s = 0;
  int L_t = 0;
};

CoarrayDims lag_bounds(const scene::CCubeConfig& c) {
  return {coprime::lag_structure(c.sensor_set).contiguous_bound,
          coprime::lag_structure(c.pulse_set).contiguous_bound};
}

covariance::HermitianCov coarray_cov(Eigen::MatrixXcd m, const CoarrayDims& d) {
  return covariance::make_cov(std::move(m), covariance::CovDomain::CoarrayRecovered, d.L_s,
                              d.L_t);
}

double mean_off_notch(const std::vector<double>& grid, const std::vector<double>& a,
                      const std::vector<double>& b, double notch, double halfwidth) {
  double acc = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::abs(grid[i] - notch) <= halfwidth) continue;
    acc += a[i] - b[i];
    ++n;
  }
  if (n == 0) throw Empty("notch exclusion removed every grid point");
  return acc / n;
}

double best_of_three_ms(const std::function<void()>& fn) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

// ---- config schema helpers ----

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError("config " + path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return key == k; }) == allowed.end())
      fail(path + "." + key, "unknown key");
  }
}

const json* maybe(const json& j, const std::string& key) {
  const auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::uint64_t as_seed(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0)
    fail(path, "expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

coprime::CoprimePair as_pair(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [small, large]");
  return {as_int(j[0], path + "[0]"), as_int(j[1], path + "[1]")};
}

Fraction as_fraction(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [numerator, denominator]");
  try {
    return make_fraction(as_int(j[0], path + "[0]"), as_int(j[1], path + "[1]"));
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

std::array<double, 3> as_triple(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) fail(path, "expected three numbers");
  return {as_number(j[0], path + "[0]"), as_number(j[1], path + "[1]"),
          as_number(j[2], path + "[2]")};
}

scene::TargetSpec parse_target(const json& j, const std::string& path) {
  check_keys(j, path, {"ambiguity", "cos_psi", "doppler", "power"});
  scene::TargetSpec t;
  if (const json* v = maybe(j, "ambiguity")) t.ambiguity = as_int(*v, path + ".ambiguity");
  if (const json* v = maybe(j, "cos_psi")) {
    const double c = as_number(*v, path + ".cos_psi");
    if (c < -1.0 || c > 1.0) fail(path + ".cos_psi", "must lie in [-1, 1]");
    t.psi = std::acos(c);
  }
  if (const json* v = maybe(j, "doppler")) t.doppler = as_number(*v, path + ".doppler");
  if (const json* v = maybe(j, "power")) t.power = as_number(*v, path + ".power");
  return t;
}

scene::InterferenceSpec parse_interference(const json& j, const std::string& path) {
  check_keys(j, path, {"center", "widths", "inr_db", "n_components"});
  scene::InterferenceSpec s;
  if (const json* v = maybe(j, "center")) {
    const auto c = as_triple(*v, path + ".center");
    s.center = {c[0], c[1], c[2]};
  }
  if (const json* v = maybe(j, "widths")) s.widths = as_triple(*v, path + ".widths");
  if (const json* v = maybe(j, "inr_db")) s.inr_db = as_number(*v, path + ".inr_db");
  if (const json* v = maybe(j, "n_components"))
    s.n_components = as_int(*v, path + ".n_components");
  return s;
}

ScenarioConfig parse_scenario(const json& j, const std::string& path) {
  check_keys(j, path,
             {"sensor_pair", "pulse_pair", "d", "f_b", "T", "T_p", "v_p", "H", "delta_f",
              "n_ambiguities", "n_patches", "cnr_db", "noise_power", "seed", "target",
              "interference"});
  ScenarioConfig s;
  if (const json* v = maybe(j, "sensor_pair")) s.sensor_pair = as_pair(*v, path + ".sensor_pair");
  if (const json* v = maybe(j, "pulse_pair")) s.pulse_pair = as_pair(*v, path + ".pulse_pair");
  if (const json* v = maybe(j, "d")) s.d = as_number(*v, path + ".d");
  if (const json* v = maybe(j, "f_b")) s.f_b = as_number(*v, path + ".f_b");
  if (const json* v = maybe(j, "T")) s.T = as_number(*v, path + ".T");
  if (const json* v = maybe(j, "T_p")) s.T_p = as_number(*v, path + ".T_p");
  if (const json* v = maybe(j, "v_p")) s.v_p = as_number(*v, path + ".v_p");
  if (const json* v = maybe(j, "H")) s.H = as_number(*v, path + ".H");
  if (const json* v = maybe(j, "delta_f")) s.delta_f = as_number(*v, path + ".delta_f");
  if (const json* v = maybe(j, "n_ambiguities"))
    s.n_ambiguities = as_int(*v, path + ".n_ambiguities");
  if (const json* v = maybe(j, "n_patches")) s.n_patches = as_int(*v, path + ".n_patches");
  if (const json* v = maybe(j, "cnr_db")) s.cnr_db = as_number(*v, path + ".cnr_db");
  if (const json* v = maybe(j, "noise_power")) s.noise_power = as_number(*v, path + ".noise_power");
  if (const json* v = maybe(j, "seed")) s.seed = as_seed(*v, path + ".seed");
  if (const json* v = maybe(j, "target")) s.target = parse_target(*v, path + ".target");
  if (const json* v = maybe(j, "interference"))
    s.interference = parse_interference(*v, path + ".interference");
  return s;
}

}  // namespace

scene::CCubeConfig ScenarioConfig::ccube() const {
  scene::CCubeConfig c;
  try {
    c.sensor_set = coprime::build_coprime_set(sensor_pair);
    c.pulse_set = coprime::build_coprime_set(pulse_pair);
  } catch (const Error& e) {
    throw ConfigError(std::string("scenario pairs: ") + e.what());
  }
  c.d = d;
  c.f_b = f_b;
  c.T = T;
  c.T_p = T_p;
  c.v_p = v_p;
  c.H = H;
  if (n_ambiguities < 1) throw ConfigError("scenario.n_ambiguities must be >= 1");
  c.delta_f = delta_f.value_or(1.0 / (n_ambiguities * T));
  try {
    c.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  return c;
}

scene::ClutterScene ScenarioConfig::make_scene() const {
  scene::ClutterScene s = scene::default_scene(n_ambiguities, n_patches, cnr_db, noise_power,
                                               seed);
  s.target = target;
  s.interference = interference;
  return s;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config root: expected an object");
  check_keys(j, "root", {"scenario", "spectrum", "rank_table", "sinr", "reject", "bench"});
  ExperimentConfig cfg;
  cfg.raw = j;
  if (const json* v = maybe(j, "scenario")) cfg.scenario = parse_scenario(*v, "scenario");

  if (const json* v = maybe(j, "spectrum")) {
    check_keys(*v, "spectrum", {"n_fT", "n_fR", "ridge_threshold_db"});
    if (const json* w = maybe(*v, "n_fT")) cfg.spectrum.n_fT = as_int(*w, "spectrum.n_fT");
    if (const json* w = maybe(*v, "n_fR")) cfg.spectrum.n_fR = as_int(*w, "spectrum.n_fR");
    if (const json* w = maybe(*v, "ridge_threshold_db"))
      cfg.spectrum.ridge_threshold_db = as_number(*w, "spectrum.ridge_threshold_db");
    if (cfg.spectrum.n_fT < 8 || cfg.spectrum.n_fR < 8)
      fail("spectrum", "grids need at least 8 points per axis");
    if (cfg.spectrum.ridge_threshold_db >= 0.0)
      fail("spectrum.ridge_threshold_db", "must be negative");
  }

  if (const json* v = maybe(j, "rank_table")) {
    check_keys(*v, "rank_table", {"rows", "n_p_min", "n_p_max"});
    if (const json* w = maybe(*v, "rows")) {
      if (!w->is_array() || w->empty()) fail("rank_table.rows", "expected a nonempty array");
      for (std::size_t i = 0; i < w->size(); ++i) {
        const std::string p = "rank_table.rows[" + std::to_string(i) + "]";
        const json& rj = (*w)[i];
        check_keys(rj, p, {"beta", "d", "v_p"});
        RankTableParams::Row row;
        const json* bj = maybe(rj, "beta");
        if (!bj) fail(p, "missing required key beta");
        row.beta = as_fraction(*bj, p + ".beta");
        if (const json* x = maybe(rj, "d")) row.d = as_number(*x, p + ".d");
        if (const json* x = maybe(rj, "v_p")) row.v_p = as_number(*x, p + ".v_p");
        const Fraction implied = rationalize(2.0 * row.v_p * cfg.scenario.T / row.d);
        if (!(implied == row.beta))
          fail(p, "beta does not match 2 v_p T / d for the given d and v_p");
        cfg.rank_table.rows.push_back(row);
      }
    }
    if (const json* w = maybe(*v, "n_p_min"))
      cfg.rank_table.n_p_min = as_int(*w, "rank_table.n_p_min");
    if (const json* w = maybe(*v, "n_p_max"))
      cfg.rank_table.n_p_max = as_int(*w, "rank_table.n_p_max");
    if (cfg.rank_table.n_p_min < 1 || cfg.rank_table.n_p_max < cfg.rank_table.n_p_min)
      fail("rank_table", "need 1 <= n_p_min <= n_p_max");
  }
  if (cfg.rank_table.rows.empty()) {
    cfg.rank_table.rows.push_back({make_fraction(1, 1), 0.15, 150.0});
    cfg.rank_table.rows.push_back({make_fraction(1, 2), 0.30, 150.0});
  }

  if (const json* v = maybe(j, "sinr")) {
    check_keys(*v, "sinr", {"n_samples", "trials", "n_doppler", "notch_halfwidth"});
    if (const json* w = maybe(*v, "n_samples")) cfg.sinr.n_samples = as_int(*w, "sinr.n_samples");
    if (const json* w = maybe(*v, "trials")) cfg.sinr.trials = as_int(*w, "sinr.trials");
    if (const json* w = maybe(*v, "n_doppler")) cfg.sinr.n_doppler = as_int(*w, "sinr.n_doppler");
    if (const json* w = maybe(*v, "notch_halfwidth"))
      cfg.sinr.notch_halfwidth = as_number(*w, "sinr.notch_halfwidth");
    if (cfg.sinr.n_samples < 1 || cfg.sinr.trials < 1 || cfg.sinr.n_doppler < 2)
      fail("sinr", "n_samples, trials >= 1 and n_doppler >= 2 required");
  }

  if (const json* v = maybe(j, "reject")) {
    check_keys(*v, "reject", {"ranks", "n_doppler", "region_points", "recompute_weight"});
    if (const json* w = maybe(*v, "ranks")) {
      if (!w->is_array() || w->size() != 3) fail("reject.ranks", "expected three integers");
      cfg.reject.ranks = std::array<int, 3>{as_int((*w)[0], "reject.ranks[0]"),
                                            as_int((*w)[1], "reject.ranks[1]"),
                                            as_int((*w)[2], "reject.ranks[2]")};
    }
    if (const json* w = maybe(*v, "n_doppler"))
      cfg.reject.n_doppler = as_int(*w, "reject.n_doppler");
    if (const json* w = maybe(*v, "region_points"))
      cfg.reject.region_points = as_int(*w, "reject.region_points");
    if (const json* w = maybe(*v, "recompute_weight")) {
      if (!w->is_boolean()) fail("reject.recompute_weight", "expected a boolean");
      cfg.reject.recompute_weight = w->get<bool>();
    }
    if (cfg.reject.n_doppler < 2 || cfg.reject.region_points < 2)
      fail("reject", "n_doppler and region_points must be >= 2");
  }

  if (const json* v = maybe(j, "bench")) {
    check_keys(*v, "bench", {"sensor_pairs", "timed_pair"});
    if (const json* w = maybe(*v, "sensor_pairs")) {
      if (!w->is_array() || w->empty()) fail("bench.sensor_pairs", "expected a nonempty array");
      cfg.bench.sensor_pairs.clear();
      for (std::size_t i = 0; i < w->size(); ++i)
        cfg.bench.sensor_pairs.push_back(
            as_pair((*w)[i], "bench.sensor_pairs[" + std::to_string(i) + "]"));
    }
    if (const json* w = maybe(*v, "timed_pair"))
      cfg.bench.timed_pair = as_pair(*w, "bench.timed_pair");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse failure in " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

// ---- drivers ----

RankTableResult run_rank_table(const ExperimentConfig& cfg, int threads) {
  struct Cell {
    RankTableParams::Row row;
    int N_p = 0;
  };
  std::vector<Cell> cells;
  for (const auto& row : cfg.rank_table.rows)
    for (int N_p = cfg.rank_table.n_p_min; N_p <= cfg.rank_table.n_p_max; ++N_p)
      cells.push_back({row, N_p});

  RankTableResult out;
  out.rows.resize(cells.size());
  run_chunked(static_cast<int>(cells.size()), threads, [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const auto& cell = cells[static_cast<std::size_t>(i)];
      ScenarioConfig sc = cfg.scenario;
      sc.d = cell.row.d;
      sc.v_p = cell.row.v_p;
      sc.n_ambiguities = cell.N_p;
      sc.delta_f.reset();  // the sweep pins delta_f = 1/(N_p T)
      sc.target.reset();
      sc.interference.reset();
      const scene::CCubeConfig c = sc.ccube();
      const auto dims = lag_bounds(c);
      const Fraction beta = c.beta();
      const int M = static_cast<int>(beta.num), N = static_cast<int>(beta.den);

      RankTableRow r;
      r.beta = beta;
      r.N_p = cell.N_p;
      r.predicted = rank::clutter_rank(dims.L_s, dims.L_t, M, N, cell.N_p);

      const scene::ClutterScene sce = sc.make_scene();
      const auto R_c = coarray_cov(
          scene::analytic_coarray_covariance(c, sce, dims.L_s, dims.L_t, false), dims);
      r.empirical_coarray = rank::empirical_rank(R_c, 0.0);

      // Transmit steering saturates at L_s+1 distinguishable ambiguities; the
      // basis uses the effective count so its Gram stays invertible.
      const int n_p_eff = std::min(cell.N_p, dims.L_s + 1);
      const auto basis = slepian::slepian_clutter_basis(c, dims.L_s, dims.L_t, n_p_eff);
      const auto zero = coarray_cov(
          Eigen::MatrixXcd::Zero(R_c.matrix.rows(), R_c.matrix.cols()), dims);
      const Eigen::MatrixXcd D_c = slepian::estimate_Dc(basis, R_c, zero);
      r.empirical_dpss = count_significant(slepian::low_rank_eigenvalues(basis, D_c));
      out.rows[static_cast<std::size_t>(i)] = r;
    }
  });
  return out;
}

SpectrumResult run_spectrum(const ExperimentConfig& cfg, int threads) {
  const ScenarioConfig& sc = cfg.scenario;
  const scene::CCubeConfig c = sc.ccube();
  const auto dims = lag_bounds(c);
  const scene::ClutterScene sce = sc.make_scene();
  const double beta = c.beta().value();

  SpectrumResult out;
  out.f_T = stap::linspace_periodic(0.0, 1.0, cfg.spectrum.n_fT);
  out.f_R = stap::linspace_periodic(-0.5, 0.5, cfg.spectrum.n_fR);

  auto add_method = [&](const std::string& name, const Eigen::MatrixXcd& R_inv,
                        const scene::Geometry& geom) {
    SpectrumMethodResult m;
    m.method = name;
    m.slice = stap::mvdr_coupled_slice(R_inv, geom, out.f_T, out.f_R, beta, threads);
    m.ridges = stap::count_ridges(m.slice, cfg.spectrum.ridge_threshold_db);
    out.methods.push_back(std::move(m));
  };

  {
    const scene::Geometry geom = scene::uniform_geometry(c);
    const Eigen::MatrixXcd R = scene::analytic_covariance(c, geom, sce, true);
    add_method("physical", stap::checked_inverse(R), geom);
  }
  const scene::Geometry coarr = scene::coarray_geometry(dims.L_s, dims.L_t);
  const Eigen::MatrixXcd R_co =
      scene::analytic_coarray_covariance(c, sce, dims.L_s, dims.L_t, true);
  add_method("coarray", stap::checked_inverse(R_co), coarr);

  {
    const int n_p_eff = std::min(sc.n_ambiguities, dims.L_s + 1);
    const auto basis = slepian::slepian_clutter_basis(c, dims.L_s, dims.L_t, n_p_eff);
    const Eigen::MatrixXcd R_n =
        sce.noise_power * Eigen::MatrixXcd::Identity(R_co.rows(), R_co.cols());
    const Eigen::MatrixXcd D_c =
        slepian::estimate_Dc(basis, coarray_cov(R_co, dims), coarray_cov(R_n, dims));
    const slepian::FastInverse fi(basis, D_c, R_n);
    add_method("dpss", fi.dense(), coarr);
  }
  return out;
}

SinrResult run_sinr(const ExperimentConfig& cfg, int threads) {
  const ScenarioConfig& sc = cfg.scenario;
  const scene::CCubeConfig c = sc.ccube();
  const auto dims = lag_bounds(c);
  scene::ClutterScene sce = sc.make_scene();
  const scene::TargetSpec target = sce.target.value_or(scene::TargetSpec{});
  const double cos0 = std::cos(target.psi);
  const double f_T0 = c.f_T_compensated(target.ambiguity);
  const double f_R0 = c.f_R(cos0);
  const double notch = c.f_d(cos0);
  const double sigma2_t = target.power;

  const scene::Geometry phys = scene::coprime_geometry(c);
  const scene::Geometry coarr = scene::coarray_geometry(dims.L_s, dims.L_t);
  const Eigen::MatrixXcd R_phys_true = scene::analytic_covariance(c, phys, sce, true);
  const Eigen::MatrixXcd R_co_true =
      scene::analytic_coarray_covariance(c, sce, dims.L_s, dims.L_t, true);

  SinrResult out;
  out.f_d = linspace_inclusive(-0.5, 0.5, cfg.sinr.n_doppler);
  const int n_d = cfg.sinr.n_doppler;

  auto steer_phys = [&](double f_d) {
    return scene::geom_steer(phys, {f_T0, f_d, f_R0});
  };
  auto steer_co = [&](double f_d) {
    return scene::geom_steer(coarr, {f_T0, f_d, f_R0});
  };

  // clairvoyant coarray filter on the ensemble covariance
  {
    std::vector<double> curve(static_cast<std::size_t>(n_d));
    const Eigen::MatrixXcd R_inv = stap::checked_inverse(R_co_true);
    for (int i = 0; i < n_d; ++i) {
      const Eigen::VectorXcd v = steer_co(out.f_d[static_cast<std::size_t>(i)]);
      const auto w = stap::weight_inv(R_inv, v, covariance::CovDomain::CoarrayRecovered);
      curve[static_cast<std::size_t>(i)] = stap::output_sinr_db(w.w, R_co_true, v, sigma2_t);
    }
    out.sinr_db["CoarrayFD"] = std::move(curve);
  }

  const auto lags_s = coprime::lag_structure(c.sensor_set);
  const auto lags_t = coprime::lag_structure(c.pulse_set);
  const auto basis = slepian::slepian_clutter_basis(c, dims.L_s, dims.L_t,
                                                    std::min(sc.n_ambiguities, dims.L_s + 1));
  const Eigen::MatrixXcd R_n =
      sce.noise_power * Eigen::MatrixXcd::Identity(R_co_true.rows(), R_co_true.cols());
  const auto R_n_cov = coarray_cov(R_n, dims);

  std::vector<double> smi(static_cast<std::size_t>(n_d), 0.0);
  std::vector<double> dpss(static_cast<std::size_t>(n_d), 0.0);
  for (int trial = 0; trial < cfg.sinr.trials; ++trial) {
    scene::ClutterScene sce_t = sce;
    sce_t.rng_seed = sce.rng_seed + static_cast<std::uint64_t>(trial);
    const auto snaps = scene::simulate_snapshots(c, sce_t, cfg.sinr.n_samples, threads);
    const Eigen::MatrixXcd R_hat = scene::sample_covariance(snaps);

    const Eigen::MatrixXcd R_hat_inv = stap::checked_inverse(R_hat);
    const auto phys_cov =
        covariance::make_cov(R_hat, covariance::CovDomain::Physical, c.P_s(), c.K());
    const auto z = covariance::virtualize(phys_cov, lags_s, lags_t);
    const auto R_v = covariance::spatial_smooth(z);
    const auto R_rec = covariance::recover_coarray_cov(R_v);
    const Eigen::MatrixXcd D_c = slepian::estimate_Dc(basis, R_rec, R_n_cov);
    const slepian::FastInverse fi(basis, D_c, R_n);

    for (int i = 0; i < n_d; ++i) {
      const double f_d = out.f_d[static_cast<std::size_t>(i)];
      const Eigen::VectorXcd v_p = steer_phys(f_d);
      const auto w_p = stap::weight_inv(R_hat_inv, v_p, covariance::CovDomain::Physical);
      smi[static_cast<std::size_t>(i)] +=
          stap::output_sinr_db(w_p.w, R_phys_true, v_p, sigma2_t);

      const Eigen::VectorXcd v_c = steer_co(f_d);
      const auto w_c = stap::weight(fi, v_c, covariance::CovDomain::CoarrayRecovered);
      dpss[static_cast<std::size_t>(i)] +=
          stap::output_sinr_db(w_c.w, R_co_true, v_c, sigma2_t);
    }
  }
  for (auto& v : smi) v /= cfg.sinr.trials;
  for (auto& v : dpss) v /= cfg.sinr.trials;
  out.sinr_db["PhysicalFD"] = std::move(smi);
  out.sinr_db["CoarrayDPSS"] = std::move(dpss);

  out.gap_physical_db = mean_off_notch(out.f_d, out.sinr_db["CoarrayFD"],
                                       out.sinr_db["PhysicalFD"], notch,
                                       cfg.sinr.notch_halfwidth);
  out.gap_dpss_db = mean_off_notch(out.f_d, out.sinr_db["CoarrayFD"],
                                   out.sinr_db["CoarrayDPSS"], notch,
                                   cfg.sinr.notch_halfwidth);
  return out;
}

RejectResult run_reject(const ExperimentConfig& cfg, int threads) {
  const ScenarioConfig& sc = cfg.scenario;
  if (!sc.interference)
    throw ConfigError("reject experiment requires scenario.interference");
  const scene::CCubeConfig c = sc.ccube();
  const auto dims = lag_bounds(c);
  const scene::ClutterScene sce = sc.make_scene();
  const auto& spec = *sce.interference;

  rejection::RegionSpec region;
  region.center = spec.center;
  region.widths = spec.widths;

  RejectResult out;
  out.ranks = cfg.reject.ranks.value_or(
      rejection::default_ranks(region, dims.L_s + 1, dims.L_t + 1, dims.L_s + 1));
  const auto proj = rejection::build_projector_dims(dims.L_s, dims.L_t, region, out.ranks);
  out.rank_total = proj.rank();
  out.tail_bound = proj.tail_bound();

  const Eigen::MatrixXcd R_full =
      scene::analytic_coarray_covariance(c, sce, dims.L_s, dims.L_t, true);
  const auto R_cov = coarray_cov(R_full, dims);
  const auto R_rej = rejection::reject(R_cov, proj);
  const Eigen::MatrixXcd R_rej_loaded =
      R_rej.matrix + sce.noise_power * Eigen::MatrixXcd::Identity(R_full.rows(), R_full.cols());

  const scene::Geometry coarr = scene::coarray_geometry(dims.L_s, dims.L_t);
  stap::SpectrumGrid grid;
  grid.f_T = linspace_inclusive(region.center.f_T - region.widths[0] / 2.0,
                                region.center.f_T + region.widths[0] / 2.0,
                                cfg.reject.region_points);
  grid.f_d = linspace_inclusive(region.center.f_d - region.widths[1] / 2.0,
                                region.center.f_d + region.widths[1] / 2.0,
                                cfg.reject.region_points);
  grid.f_R = linspace_inclusive(region.center.f_R - region.widths[2] / 2.0,
                                region.center.f_R + region.widths[2] / 2.0,
                                cfg.reject.region_points);
  out.region_pre = stap::mvdr_spectrum_inv(stap::checked_inverse(R_full), coarr, grid, threads);
  out.region_post =
      stap::mvdr_spectrum_inv(stap::checked_inverse(R_rej_loaded), coarr, grid, threads);
  out.energy_pre = out.region_pre.power.mean();
  out.energy_post = out.region_post.power.mean();
  out.drop_db = 10.0 * std::log10(out.energy_pre / out.energy_post);

  const scene::TargetSpec target = sce.target.value_or(scene::TargetSpec{});
  const double cos0 = std::cos(target.psi);
  const double f_T0 = c.f_T_compensated(target.ambiguity);
  const double f_R0 = c.f_R(cos0);
  out.f_d = linspace_inclusive(-0.5, 0.5, cfg.reject.n_doppler);

  // The filter weight is designed from the DPSS clutter reconstruction, which
  // is blind to the overlaid interference; the interference then degrades the
  // pre-rejection output and the complement projection restores it.
  scene::ClutterScene sce_clutter = sce;
  sce_clutter.interference.reset();
  const Eigen::MatrixXcd R_cn =
      scene::analytic_coarray_covariance(c, sce_clutter, dims.L_s, dims.L_t, true);
  const auto basis = slepian::slepian_clutter_basis(c, dims.L_s, dims.L_t,
                                                    std::min(sc.n_ambiguities, dims.L_s + 1));
  const Eigen::MatrixXcd R_n =
      sce.noise_power * Eigen::MatrixXcd::Identity(R_full.rows(), R_full.cols());
  const Eigen::MatrixXcd D_c =
      slepian::estimate_Dc(basis, coarray_cov(R_cn, dims), coarray_cov(R_n, dims));
  const slepian::FastInverse fi(basis, D_c, R_n);

  const Eigen::MatrixXcd one_sided = proj.complement() * R_full;
  Eigen::MatrixXcd rej_inv;
  if (cfg.reject.recompute_weight) rej_inv = stap::checked_inverse(R_rej_loaded);
  out.sinr_pre_db.resize(out.f_d.size());
  out.sinr_post_db.resize(out.f_d.size());
  for (std::size_t i = 0; i < out.f_d.size(); ++i) {
    const Eigen::VectorXcd v = scene::geom_steer(coarr, {f_T0, out.f_d[i], f_R0});
    const auto w = stap::weight(fi, v, covariance::CovDomain::CoarrayRecovered);
    out.sinr_pre_db[i] = stap::output_sinr_db(w.w, R_full, v, target.power);
    if (cfg.reject.recompute_weight) {
      const auto w2 = stap::weight_inv(rej_inv, v, covariance::CovDomain::CoarrayRecovered);
      out.sinr_post_db[i] = stap::output_sinr_db(w2.w, R_rej_loaded, v, target.power);
    } else {
      out.sinr_post_db[i] = stap::output_sinr_db(w.w, one_sided, v, target.power);
    }
  }
  return out;
}

BenchResult run_bench(const ExperimentConfig& cfg, int threads, bool measure_wall) {
  (void)threads;
  BenchResult out;
  for (const auto& sp : cfg.bench.sensor_pairs) {
    ScenarioConfig sc = cfg.scenario;
    sc.sensor_pair = sp;
    sc.target.reset();
    sc.interference.reset();
    const scene::CCubeConfig c = sc.ccube();
    const auto dims = lag_bounds(c);
    const scene::ClutterScene sce = sc.make_scene();

    BenchEntry e;
    e.sensor_pair = sp;
    e.P_s = c.P_s();
    const long long D = covariance::expected_size(covariance::CovDomain::CoarraySmoothed,
                                                  dims.L_s, dims.L_t);
    e.coarray_dim = D;
    const long long phys = static_cast<long long>(c.P_s()) * c.P_s() * c.K();
    e.physical_direct_flops = phys * phys * phys;
    e.coarray_direct_flops = D * D * D;

    const Eigen::MatrixXcd R_co =
        scene::analytic_coarray_covariance(c, sce, dims.L_s, dims.L_t, true);
    const auto basis = slepian::slepian_clutter_basis(
        c, dims.L_s, dims.L_t, std::min(sc.n_ambiguities, dims.L_s + 1));
    const Eigen::MatrixXcd R_n =
        sce.noise_power * Eigen::MatrixXcd::Identity(R_co.rows(), R_co.cols());
    const long long r_b = basis.r_b();
    e.dpss_formula_flops = 2 * r_b * r_b * r_b + r_b * D * D;

    slepian::FlopCount fc;
    const Eigen::MatrixXcd D_c =
        slepian::estimate_Dc(basis, coarray_cov(R_co, dims), coarray_cov(R_n, dims), &fc);
    const slepian::FastInverse fi(basis, D_c, R_n);
    const Eigen::MatrixXcd dense = fi.dense();
    (void)dense;
    e.dpss_counted_flops = fc.multiplies + fi.flops().multiplies;
    e.counted_over_formula =
        static_cast<double>(e.dpss_counted_flops) / static_cast<double>(e.dpss_formula_flops);

    if (measure_wall && sp.m_small == cfg.bench.timed_pair.m_small &&
        sp.n_large == cfg.bench.timed_pair.n_large) {
      e.wall_direct_ms = best_of_three_ms([&] {
        volatile double sink = stap::checked_inverse(R_co).norm();
        (void)sink;
      });
      e.wall_dpss_ms = best_of_three_ms([&] {
        const Eigen::MatrixXcd D2 =
            slepian::estimate_Dc(basis, coarray_cov(R_co, dims), coarray_cov(R_n, dims));
        const slepian::FastInverse f2(basis, D2, R_n);
        volatile double sink = f2.dense().norm();
        (void)sink;
      });
    }
    out.entries.push_back(e);
  }
  return out;
}

// ---- emission ----

std::vector<std::string> emit_rank_table(const RankTableResult& r,
                                         const std::filesystem::path& out) {
  io::CsvWriter csv({"beta", "N_p", "predicted", "empirical_coarray", "empirical_dpss"});
  for (const auto& row : r.rows)
    csv.add_row({io::num(row.beta.value()), std::to_string(row.N_p),
                 std::to_string(row.predicted), std::to_string(row.empirical_coarray),
                 std::to_string(row.empirical_dpss)});
  csv.save(out / "rank_table.csv");
  return {"rank_table.csv"};
}

std::vector<std::string> emit_spectrum(const SpectrumResult& r,
                                       const std::filesystem::path& out) {
  io::CsvWriter csv({"method", "f_T", "f_R", "power"});
  for (const auto& m : r.methods)
    for (std::size_t i = 0; i < r.f_T.size(); ++i)
      for (std::size_t j = 0; j < r.f_R.size(); ++j)
        csv.add_row({m.method, io::num(r.f_T[i]), io::num(r.f_R[j]),
                     io::num(m.slice(static_cast<Eigen::Index>(i),
                                     static_cast<Eigen::Index>(j)))});
  csv.save(out / "spectrum.csv");

  nlohmann::json j;
  for (const auto& m : r.methods) j["ridges"][m.method] = m.ridges;
  j["grid"] = {{"n_fT", r.f_T.size()}, {"n_fR", r.f_R.size()}};
  io::write_json(out / "ridges.json", j);
  return {"spectrum.csv", "ridges.json"};
}

std::vector<std::string> emit_sinr(const SinrResult& r, const std::filesystem::path& out) {
  io::CsvWriter csv({"method", "f_d", "sinr_db"});
  for (const auto& [method, curve] : r.sinr_db)
    for (std::size_t i = 0; i < r.f_d.size(); ++i)
      csv.add_row({method, io::num(r.f_d[i]), io::num(curve[i])});
  csv.save(out / "sinr.csv");

  nlohmann::json j;
  j["gap_coarray_minus_physical_db"] = r.gap_physical_db;
  j["gap_coarray_minus_dpss_db"] = r.gap_dpss_db;
  io::write_json(out / "sinr_summary.json", j);
  return {"sinr.csv", "sinr_summary.json"};
}

namespace {

void region_csv(const stap::Spectrum& s, const std::filesystem::path& path) {
  io::CsvWriter csv({"f_T", "f_d", "f_R", "power"});
  const auto& g = s.grid;
  for (std::size_t i = 0; i < g.f_T.size(); ++i)
    for (std::size_t j = 0; j < g.f_d.size(); ++j)
      for (std::size_t k = 0; k < g.f_R.size(); ++k)
        csv.add_row({io::num(g.f_T[i]), io::num(g.f_d[j]), io::num(g.f_R[k]),
                     io::num(s.at(static_cast<int>(i), static_cast<int>(j),
                                  static_cast<int>(k)))});
  csv.save(path);
}

}  // namespace

std::vector<std::string> emit_reject(const RejectResult& r, const std::filesystem::path& out) {
  region_csv(r.region_pre, out / "reject_region_pre.csv");
  region_csv(r.region_post, out / "reject_region_post.csv");

  io::CsvWriter csv({"f_d", "sinr_db", "sinr_rejected_db"});
  for (std::size_t i = 0; i < r.f_d.size(); ++i)
    csv.add_row({io::num(r.f_d[i]), io::num(r.sinr_pre_db[i]), io::num(r.sinr_post_db[i])});
  csv.save(out / "reject_sinr.csv");

  nlohmann::json j;
  j["ranks"] = r.ranks;
  j["rank_total"] = r.rank_total;
  j["tail_bound"] = r.tail_bound;
  j["region_energy_pre"] = r.energy_pre;
  j["region_energy_post"] = r.energy_post;
  j["drop_db"] = r.drop_db;
  io::write_json(out / "reject_summary.json", j);
  return {"reject_region_pre.csv", "reject_region_post.csv", "reject_sinr.csv",
          "reject_summary.json"};
}

std::vector<std::string> emit_bench(const BenchResult& r, const std::filesystem::path& out) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : r.entries) {
    nlohmann::json entry;
    entry["sensor_pair"] = {e.sensor_pair.m_small, e.sensor_pair.n_large};
    entry["P_s"] = e.P_s;
    entry["coarray_dim"] = e.coarray_dim;
    entry["physical_direct_flops"] = e.physical_direct_flops;
    entry["coarray_direct_flops"] = e.coarray_direct_flops;
    entry["dpss_counted_flops"] = e.dpss_counted_flops;
    entry["dpss_formula_flops"] = e.dpss_formula_flops;
    entry["counted_over_formula"] = e.counted_over_formula;
    if (e.wall_direct_ms >= 0.0) {
      entry["wall_direct_ms"] = e.wall_direct_ms;
      entry["wall_dpss_ms"] = e.wall_dpss_ms;
    }
    j.push_back(entry);
  }
  io::write_json(out / "bench.json", {{"entries", j}});
  return {"bench.json"};
}

// ---- presets ----

namespace {

json base_scenario() {
  return {{"sensor_pair", {2, 3}},  {"pulse_pair", {2, 3}}, {"d", 0.15},
          {"f_b", 1e9},             {"T", 5e-4},            {"T_p", 1e-6},
          {"v_p", 150.0},           {"H", 6000.0},          {"n_ambiguities", 6},
          {"n_patches", 181},       {"cnr_db", 40.0},       {"noise_power", 1.0},
          {"seed", 20260825}};
}

}  // namespace

json preset_json(const std::string& name) {
  json scenario = base_scenario();
  if (name == "spectrum-np3") {
    scenario["n_ambiguities"] = 3;
    return {{"scenario", scenario},
            {"spectrum", {{"n_fT", 96}, {"n_fR", 96}, {"ridge_threshold_db", -10.0}}}};
  }
  if (name == "spectrum-np6") {
    return {{"scenario", scenario},
            {"spectrum", {{"n_fT", 96}, {"n_fR", 96}, {"ridge_threshold_db", -10.0}}}};
  }
  if (name == "rank-table") {
    return {{"scenario", scenario},
            {"rank_table",
             {{"rows",
               {{{"beta", {1, 1}}, {"d", 0.15}, {"v_p", 150.0}},
                {{"beta", {1, 2}}, {"d", 0.30}, {"v_p", 150.0}}}},
              {"n_p_min", 2},
              {"n_p_max", 10}}}};
  }
  if (name == "sinr") {
    scenario["d"] = 0.09;
    scenario["v_p"] = 90.0;
    scenario["target"] = {{"ambiguity", 1}, {"cos_psi", 0.0}, {"doppler", 0.25}, {"power", 1.0}};
    return {{"scenario", scenario},
            {"sinr",
             {{"n_samples", 500}, {"trials", 10}, {"n_doppler", 41}, {"notch_halfwidth", 0.05}}}};
  }
  if (name == "reject") {
    scenario["n_ambiguities"] = 3;
    scenario["target"] = {{"ambiguity", 1}, {"cos_psi", 0.0}, {"doppler", 0.25}, {"power", 1.0}};
    scenario["interference"] = {{"center", {0.1, -0.3, 0.3}},
                                {"widths", {0.125, 0.125, 0.125}},
                                {"inr_db", 30.0},
                                {"n_components", 100}};
    return {{"scenario", scenario}, {"reject", {{"n_doppler", 41}, {"region_points", 7}}}};
  }
  if (name == "bench") {
    return {{"scenario", scenario},
            {"bench",
             {{"sensor_pairs", {{1, 2}, {1, 3}, {2, 3}}}, {"timed_pair", {2, 3}}}}};
  }
  throw ConfigError("unknown preset: " + name);
}

std::vector<std::string> preset_names() {
  return {"spectrum-np3", "spectrum-np6", "rank-table", "sinr", "reject", "bench"};
}

}  // namespace copulse::experiments
