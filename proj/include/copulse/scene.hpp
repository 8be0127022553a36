#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "copulse/coprime.hpp"
#include "copulse/fraction.hpp"

namespace copulse::scene {

inline constexpr double kSpeedOfLight = 3.0e8;  // matches f_b = 1 GHz <-> lambda_b = 0.3 m

// Normalized frequency coordinates: transmit (range) f_T, Doppler f_d,
// receive spatial f_R.
struct FrequencyTriple {
  double f_T = 0.0;
  double f_d = 0.0;
  double f_R = 0.0;
};

// Co-prime array / frequency-offset / pulse-interval geometry plus platform
// and RF constants.
struct CCubeConfig {
  coprime::CoprimeSet sensor_set;  // positions xi = indices * d, FOs f_b + indices * delta_f
  coprime::CoprimeSet pulse_set;   // pulse starts eta = indices * T
  double d = 0.0;        // unit element spacing [m]
  double delta_f = 0.0;  // unit frequency offset [Hz]
  double f_b = 0.0;      // reference carrier [Hz]
  double T = 0.0;        // unit pulse-repetition interval [s]
  double T_p = 0.0;      // pulse duration [s]
  double v_p = 0.0;      // platform speed [m/s]
  double H = 0.0;        // platform height [m]

  double lambda_b() const { return kSpeedOfLight / f_b; }
  double r_u() const { return kSpeedOfLight * T / 2.0; }
  int P_s() const { return sensor_set.cardinality(); }
  int K() const { return pulse_set.cardinality(); }

  Fraction beta() const;           // 2 v_p T / d as reduced fraction
  Fraction spacing_ratio() const;  // 2 d / lambda_b as reduced fraction

  double f_R(double cos_psi) const { return d / lambda_b() * cos_psi; }
  double f_d(double cos_psi) const { return 2.0 * v_p * T / lambda_b() * cos_psi; }
  double f_T_range(double r) const { return -2.0 * delta_f * r / kSpeedOfLight; }
  // post-SRDC transmit frequency of ambiguity region p (1-based)
  double f_T_compensated(int p) const { return -delta_f * T * (p - 1); }

  void validate() const;  // throws BadScene
};

struct ClutterPatch {
  int ambiguity = 1;   // region index p, 1-based
  double psi = 0.0;    // conic angle [rad]
  double power = 0.0;  // sigma^2
};

struct TargetSpec {
  int ambiguity = 1;
  double psi = 1.5707963267948966;  // broadside
  double doppler = 0.25;            // normalized f_d
  double power = 1.0;               // sigma_t^2
};

struct InterferenceSpec {
  FrequencyTriple center;
  std::array<double, 3> widths{0.125, 0.125, 0.125};
  double inr_db = 30.0;
  int n_components = 100;
};

struct ClutterScene {
  int n_ambiguities = 1;  // N_p
  int n_patches = 1;      // patches per iso-range ring
  std::vector<ClutterPatch> patches;
  double noise_power = 1.0;
  std::uint64_t rng_seed = 0;
  std::optional<TargetSpec> target;
  std::optional<InterferenceSpec> interference;

  void validate() const;  // throws BadScene
};

// N_c cos(psi) values uniformly spaced in (-1, 1) per ring, jittered per ring
// so cos values stay pairwise distinct across rings; per-patch power set so
// the summed clutter power matches the requested CNR.
ClutterScene default_scene(int n_ambiguities, int n_patches, double cnr_db, double noise_power,
                           std::uint64_t seed);

// Index sets used to build steering vectors; physical domains use the sparse
// co-prime indices (or 0..P-1 for the uniform-FDA baseline), the coarray
// domain uses the filled segments 0..L.
struct Geometry {
  std::vector<int> tx;
  std::vector<int> time;
  std::vector<int> rx;
  int dim() const {
    return static_cast<int>(tx.size() * time.size() * rx.size());
  }
};

Geometry coprime_geometry(const CCubeConfig& cfg);
Geometry uniform_geometry(const CCubeConfig& cfg);
Geometry coarray_geometry(int L_s, int L_t);

Eigen::VectorXcd steer(const std::vector<int>& indices, double freq);
Eigen::VectorXcd kron3(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
                       const Eigen::VectorXcd& c);
Eigen::VectorXcd geom_steer(const Geometry& geom, const FrequencyTriple& f);
// v = a_T kron b kron a_R on the co-prime physical geometry
Eigen::VectorXcd space_time_range_steer(const CCubeConfig& cfg, const FrequencyTriple& f);

// Frequency triple of one clutter patch (post-SRDC: f_T depends only on the
// ambiguity index).
FrequencyTriple patch_frequencies(const CCubeConfig& cfg, const ClutterPatch& patch);
// Interference component frequencies: drawn once per scene from the scene
// seed, uniform over the region.
std::vector<FrequencyTriple> interference_components(const ClutterScene& scene);

// i.i.d. snapshots y = sum rho v + interference + noise; per-sample RNG stream
// derived from (seed, sample index) so parallel and serial runs agree.
std::vector<Eigen::VectorXcd> simulate_snapshots(const CCubeConfig& cfg, const Geometry& geom,
                                                 const ClutterScene& scene, int n_samples,
                                                 int threads = 1);
std::vector<Eigen::VectorXcd> simulate_snapshots(const CCubeConfig& cfg, const ClutterScene& scene,
                                                 int n_samples, int threads = 1);

Eigen::MatrixXcd sample_covariance(const std::vector<Eigen::VectorXcd>& samples);

// Ensemble covariance of the snapshot model on the given geometry.
Eigen::MatrixXcd analytic_covariance(const CCubeConfig& cfg, const Geometry& geom,
                                     const ClutterScene& scene, bool include_noise = true);
// Same model lifted to the full coarray steering grid.
Eigen::MatrixXcd analytic_coarray_covariance(const CCubeConfig& cfg, const ClutterScene& scene,
                                             int L_s, int L_t, bool include_noise = true);

}  // namespace copulse::scene
