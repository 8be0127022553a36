#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "copulse/covariance.hpp"
#include "copulse/scene.hpp"

namespace copulse::slepian {

// Multiply count in complex-multiply units, accumulated by the low-rank
// inverse path so it can be compared against direct inversion cost.
struct FlopCount {
  long long multiplies = 0;

  void matmul(long long m, long long k, long long n) { multiplies += m * k * n; }
  void lu_inverse(long long n) { multiplies += n * n * n; }
  void ldlt(long long n) { multiplies += n * n * n / 3; }
  void eigenvalues_only(long long n) { multiplies += 4 * n * n * n / 3; }
  void scale(long long n) { multiplies += n; }
};

struct DpssSet {
  int M_T = 0;
  double W = 0.0;
  Eigen::MatrixXd vectors;      // M_T x M_T, columns ordered by eigenvalue
  Eigen::VectorXd eigenvalues;  // descending concentrations
};

// Eigenvectors of the symmetric Toeplitz kernel sin(2 pi W (n-m)) / (pi (n-m))
// with diagonal 2W. Throws BadBandwidth unless 0 < W < 0.5.
DpssSet dpss(int M_T, double W);

// Disk cache for computed sequence sets, keyed by (M_T, W, N_T) with a
// versioned binary header. Loading returns nullopt on miss or key mismatch.
std::filesystem::path dpss_cache_path(const std::filesystem::path& dir, int M_T, double W,
                                      int N_T);
void save_dpss(const std::filesystem::path& path, const DpssSet& set, int N_T);
std::optional<DpssSet> load_dpss(const std::filesystem::path& path, int M_T, double W, int N_T);

enum class BasisBranch { Exact, Approximate };

// Half-bandwidth used for the dense-grid sequences in the approximate branch.
// GridCorrected rescales the stated d/lambda_b bandwidth by 1/N because the
// sample grid N n + M k has spacing 1/N in the underlying variable; Nominal
// uses d/lambda_b as given.
enum class BandwidthConvention { GridCorrected, Nominal };

struct SlepianBasis {
  int L_s = 0, L_t = 0, N_p = 0;
  int M_T = 0;       // dense grid length N L_s + M L_t + 1
  int N_T = 0;       // highest retained sequence order
  double T_b = 0.0;  // time-bandwidth extent L_s + beta L_t
  double W = 0.0;    // dense-grid half-bandwidth (0 on the exact branch)
  BasisBranch branch = BasisBranch::Exact;
  Eigen::MatrixXcd U_c;  // (L_s+1)(L_t+1) x (N_T+1), orthonormal columns
  Eigen::MatrixXcd A_T;  // (L_s+1) x N_p compensated transmit steering
  Eigen::MatrixXcd V_c;  // A_T kron U_c

  int r_b() const { return N_p * (N_T + 1); }
  Eigen::Index dim() const { return V_c.rows(); }
};

// Clutter-subspace basis on the smoothed coarray grid. Exact branch
// (2d/lambda_b = N): indicator columns over occupied grid positions, one per
// distinct value of N n + M k, N_T = R_r - 1. Approximate branch: dense-grid
// sequences sampled at N n + M k and re-orthonormalized, N_T from the
// time-bandwidth rule.
SlepianBasis slepian_clutter_basis(const scene::CCubeConfig& cfg, int L_s, int L_t, int N_p,
                                   BandwidthConvention convention =
                                       BandwidthConvention::GridCorrected);

// Least-squares core estimate D_c = V^+ (R_v - R_n) (V^+)^H using the
// Kronecker pseudo-inverse (G^{-1} A^H) kron U^H, G = A^H A. Throws
// SingularGram when cond(G) > 1e12.
Eigen::MatrixXcd estimate_Dc(const SlepianBasis& basis, const covariance::HermitianCov& R_v_hat,
                             const covariance::HermitianCov& R_n_hat,
                             FlopCount* flops = nullptr);

// Matrix-inversion-lemma handle for (V D_c V^H + R_n)^{-1}. R_n may be any
// Hermitian positive definite matrix; a scaled identity takes the cheap
// diagonal path. Near-zero D_c skips the correction term entirely;
// ill-conditioned D_c is ridge-regularized before inversion.
class FastInverse {
 public:
  FastInverse(const SlepianBasis& basis, Eigen::MatrixXcd D_c, const Eigen::MatrixXcd& R_n);

  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
  Eigen::MatrixXcd dense() const;
  const FlopCount& flops() const { return flops_; }
  bool correction_active() const { return active_; }

 private:
  Eigen::VectorXcd noise_solve(const Eigen::VectorXcd& x) const;

  Eigen::Index dim_ = 0;
  bool diagonal_noise_ = false;
  bool active_ = false;
  Eigen::VectorXcd inv_diag_;                 // diagonal path
  Eigen::LDLT<Eigen::MatrixXcd> noise_ldlt_;  // general path
  Eigen::MatrixXcd Ninv_V_;                   // R_n^{-1} V_c
  Eigen::MatrixXcd core_inv_;                 // (D_c^{-1} + V^H R_n^{-1} V)^{-1}
  mutable FlopCount flops_;
};

// Eigenvalues of V D_c V^H without forming the full matrix: the nonzero part
// equals the spectrum of (V^H V)^{1/2} D_c (V^H V)^{1/2}, an r_b-sized solve.
Eigen::VectorXd low_rank_eigenvalues(const SlepianBasis& basis, const Eigen::MatrixXcd& D_c);

// Energy fraction tr(Pi_V R) / tr(R) captured by the column space of V_c.
double subspace_capture(const SlepianBasis& basis, const Eigen::MatrixXcd& R);

}  // namespace copulse::slepian
