#include "copulse/scene.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>
#include <thread>

#include "copulse/errors.hpp"

namespace copulse::scene {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 stream_for(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(index + 1)));
}

}  // namespace

Fraction CCubeConfig::beta() const { return rationalize(2.0 * v_p * T / d); }

Fraction CCubeConfig::spacing_ratio() const { return rationalize(2.0 * d / lambda_b()); }

void CCubeConfig::validate() const {
  if (d <= 0.0) throw BadScene("element spacing d must be positive");
  if (f_b <= 0.0) throw BadScene("carrier f_b must be positive");
  if (!(T > T_p && T_p > 0.0)) throw BadScene("require T > T_p > 0");
  if (delta_f <= 0.0) throw BadScene("frequency offset delta_f must be positive");
  if (v_p <= 0.0) throw BadScene("platform speed must be positive");
  if (sensor_set.indices.empty() || pulse_set.indices.empty())
    throw BadScene("empty sensor or pulse set");
  beta();  // throws BadScene when 2 v_p T / d is not a small fraction
}

void ClutterScene::validate() const {
  if (n_ambiguities < 1) throw BadScene("need at least one ambiguity region");
  if (noise_power <= 0.0) throw BadScene("noise power must be positive");
  std::vector<double> cosines;
  cosines.reserve(patches.size());
  for (const auto& p : patches) {
    if (p.ambiguity < 1 || p.ambiguity > n_ambiguities)
      throw BadScene("patch ambiguity index out of range");
    if (!(std::isfinite(p.power) && p.power >= 0.0)) throw BadScene("patch power invalid");
    cosines.push_back(std::cos(p.psi));
  }
  std::sort(cosines.begin(), cosines.end());
  for (std::size_t i = 1; i < cosines.size(); ++i)
    if (cosines[i] - cosines[i - 1] < 1e-12)
      throw BadScene("clutter patch cos(psi) values must be pairwise distinct");
}

ClutterScene default_scene(int n_ambiguities, int n_patches, double cnr_db, double noise_power,
                           std::uint64_t seed) {
  if (n_ambiguities < 1 || n_patches < 1) throw BadScene("scene dimensions must be positive");
  ClutterScene s;
  s.n_ambiguities = n_ambiguities;
  s.n_patches = n_patches;
  s.noise_power = noise_power;
  s.rng_seed = seed;
  const double total = std::pow(10.0, cnr_db / 10.0) * noise_power;
  const double pw = total / (static_cast<double>(n_ambiguities) * n_patches);
  const double step = 2.0 / (n_patches + 1);
  for (int p = 1; p <= n_ambiguities; ++p) {
    const double shift = 0.3 * (p - 1) / n_ambiguities;
    for (int q = 1; q <= n_patches; ++q) {
      const double c = -1.0 + (q + shift) * step;
      s.patches.push_back({p, std::acos(std::clamp(c, -1.0, 1.0)), pw});
    }
  }
  s.validate();
  return s;
}

Geometry coprime_geometry(const CCubeConfig& cfg) {
  return {cfg.sensor_set.indices, cfg.pulse_set.indices, cfg.sensor_set.indices};
}

Geometry uniform_geometry(const CCubeConfig& cfg) {
  std::vector<int> tx(cfg.P_s()), tm(cfg.K());
  for (int i = 0; i < cfg.P_s(); ++i) tx[i] = i;
  for (int i = 0; i < cfg.K(); ++i) tm[i] = i;
  return {tx, tm, tx};
}

Geometry coarray_geometry(int L_s, int L_t) {
  std::vector<int> s(L_s + 1), t(L_t + 1);
  for (int i = 0; i <= L_s; ++i) s[i] = i;
  for (int i = 0; i <= L_t; ++i) t[i] = i;
  return {s, t, s};
}

Eigen::VectorXcd steer(const std::vector<int>& indices, double freq) {
  Eigen::VectorXcd v(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const double ph = kTwoPi * freq * indices[i];
    v[static_cast<Eigen::Index>(i)] = std::complex<double>(std::cos(ph), std::sin(ph));
  }
  return v;
}

Eigen::VectorXcd kron3(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
                       const Eigen::VectorXcd& c) {
  Eigen::VectorXcd out(a.size() * b.size() * c.size());
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      const std::complex<double> ab = a[i] * b[j];
      for (Eigen::Index k = 0; k < c.size(); ++k) out[idx++] = ab * c[k];
    }
  return out;
}

Eigen::VectorXcd geom_steer(const Geometry& geom, const FrequencyTriple& f) {
  return kron3(steer(geom.tx, f.f_T), steer(geom.time, f.f_d), steer(geom.rx, f.f_R));
}

Eigen::VectorXcd space_time_range_steer(const CCubeConfig& cfg, const FrequencyTriple& f) {
  return geom_steer(coprime_geometry(cfg), f);
}

FrequencyTriple patch_frequencies(const CCubeConfig& cfg, const ClutterPatch& patch) {
  const double c = std::cos(patch.psi);
  return {cfg.f_T_compensated(patch.ambiguity), cfg.f_d(c), cfg.f_R(c)};
}

std::vector<FrequencyTriple> interference_components(const ClutterScene& scene) {
  std::vector<FrequencyTriple> out;
  if (!scene.interference) return out;
  const auto& spec = *scene.interference;
  if (spec.n_components < 1) throw BadScene("interference needs at least one component");
  auto eng = stream_for(scene.rng_seed, 0xC0FFEEULL);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  out.reserve(spec.n_components);
  for (int i = 0; i < spec.n_components; ++i) {
    FrequencyTriple f;
    f.f_T = spec.center.f_T + spec.widths[0] * u(eng);
    f.f_d = spec.center.f_d + spec.widths[1] * u(eng);
    f.f_R = spec.center.f_R + spec.widths[2] * u(eng);
    out.push_back(f);
  }
  return out;
}

namespace {

// Steering columns and per-column powers for everything stochastic in the
// scene (clutter patches then interference components).
void build_source_columns(const CCubeConfig& cfg, const Geometry& geom, const ClutterScene& scene,
                          Eigen::MatrixXcd& V, Eigen::VectorXd& powers) {
  const auto comps = interference_components(scene);
  const Eigen::Index n_src = static_cast<Eigen::Index>(scene.patches.size() + comps.size());
  V.resize(geom.dim(), n_src);
  powers.resize(n_src);
  Eigen::Index col = 0;
  for (const auto& p : scene.patches) {
    V.col(col) = geom_steer(geom, patch_frequencies(cfg, p));
    powers[col] = p.power;
    ++col;
  }
  if (!comps.empty()) {
    const double total =
        std::pow(10.0, scene.interference->inr_db / 10.0) * scene.noise_power;
    const double pw = total / static_cast<double>(comps.size());
    for (const auto& f : comps) {
      V.col(col) = geom_steer(geom, f);
      powers[col] = pw;
      ++col;
    }
  }
}

}  // namespace

std::vector<Eigen::VectorXcd> simulate_snapshots(const CCubeConfig& cfg, const Geometry& geom,
                                                 const ClutterScene& scene, int n_samples,
                                                 int threads) {
  if (n_samples < 1) throw Empty("n_samples must be >= 1");
  scene.validate();
  Eigen::MatrixXcd V;
  Eigen::VectorXd powers;
  build_source_columns(cfg, geom, scene, V, powers);
  const Eigen::VectorXd amp_sigma = (powers / 2.0).cwiseSqrt();
  const double noise_sigma = std::sqrt(scene.noise_power / 2.0);
  const Eigen::Index dim = geom.dim();

  std::vector<Eigen::VectorXcd> out(static_cast<std::size_t>(n_samples));
  auto worker = [&](int begin, int end) {
    for (int s = begin; s < end; ++s) {
      // fresh engine per sample: draw order is sources (re, im) then noise
      auto eng = stream_for(scene.rng_seed, static_cast<std::uint64_t>(s));
      std::normal_distribution<double> gauss(0.0, 1.0);
      Eigen::VectorXcd rho(V.cols());
      for (Eigen::Index i = 0; i < V.cols(); ++i) {
        const double re = gauss(eng), im = gauss(eng);
        rho[i] = amp_sigma[i] * std::complex<double>(re, im);
      }
      Eigen::VectorXcd y = V * rho;
      for (Eigen::Index i = 0; i < dim; ++i) {
        const double re = gauss(eng), im = gauss(eng);
        y[i] += noise_sigma * std::complex<double>(re, im);
      }
      out[static_cast<std::size_t>(s)] = std::move(y);
    }
  };

  const int nt = std::max(1, std::min(threads, n_samples));
  if (nt == 1) {
    worker(0, n_samples);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n_samples + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
      const int b = t * chunk, e = std::min(n_samples, b + chunk);
      if (b < e) pool.emplace_back(worker, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

std::vector<Eigen::VectorXcd> simulate_snapshots(const CCubeConfig& cfg, const ClutterScene& scene,
                                                 int n_samples, int threads) {
  return simulate_snapshots(cfg, coprime_geometry(cfg), scene, n_samples, threads);
}

Eigen::MatrixXcd sample_covariance(const std::vector<Eigen::VectorXcd>& samples) {
  if (samples.empty()) throw Empty("sample_covariance of empty snapshot list");
  const Eigen::Index dim = samples.front().size();
  Eigen::MatrixXcd Y(dim, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].size() != dim) throw DimensionMismatch("snapshot size mismatch");
    Y.col(static_cast<Eigen::Index>(i)) = samples[i];
  }
  Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(dim, dim);
  R.selfadjointView<Eigen::Lower>().rankUpdate(Y, 1.0 / static_cast<double>(samples.size()));
  return Eigen::MatrixXcd(R.selfadjointView<Eigen::Lower>());
}

Eigen::MatrixXcd analytic_covariance(const CCubeConfig& cfg, const Geometry& geom,
                                     const ClutterScene& scene, bool include_noise) {
  scene.validate();
  Eigen::MatrixXcd V;
  Eigen::VectorXd powers;
  build_source_columns(cfg, geom, scene, V, powers);
  const Eigen::Index dim = geom.dim();
  Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(dim, dim);
  if (V.cols() > 0) {
    Eigen::MatrixXcd Vw = V * powers.cwiseSqrt().asDiagonal();
    R.selfadjointView<Eigen::Lower>().rankUpdate(Vw, 1.0);
  }
  R = Eigen::MatrixXcd(R.selfadjointView<Eigen::Lower>());
  if (include_noise) R += scene.noise_power * Eigen::MatrixXcd::Identity(dim, dim);
  return R;
}

Eigen::MatrixXcd analytic_coarray_covariance(const CCubeConfig& cfg, const ClutterScene& scene,
                                             int L_s, int L_t, bool include_noise) {
  Geometry geom = coarray_geometry(L_s, L_t);
  return analytic_covariance(cfg, geom, scene, include_noise);
}

}  // namespace copulse::scene
