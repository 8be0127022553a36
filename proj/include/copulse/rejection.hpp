#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "copulse/covariance.hpp"
#include "copulse/scene.hpp"

namespace copulse::rejection {

// Known 3-D frequency region (center and widths, normalized units) over
// which clustered interference is rejected.
struct RegionSpec {
  scene::FrequencyTriple center;
  std::array<double, 3> widths{0.125, 0.125, 0.125};

  void validate() const;  // throws BadScene
};

// Symmetric Toeplitz kernel 2W sinc(2W(k-l)); W = 0.5 degenerates to the
// identity and is allowed here (unlike the strict sequence generator).
Eigen::MatrixXd prolate_matrix(int P, double W);

// Elementwise modulation (steer steer^H) o B: same spectrum as B, eigenvectors
// are the modulated sequences steer o u_k.
Eigen::MatrixXcd modulated_prolate(const Eigen::VectorXcd& steer, const Eigen::MatrixXd& B);

// Rank-K projector onto the union of the strongest Kronecker interference
// directions. The K = K1 K2 K3 triples are chosen by globally largest
// products of per-factor eigenvalues, ties broken lexicographically.
class RejectionProjector {
 public:
  RejectionProjector(Eigen::MatrixXcd vectors, Eigen::VectorXd selected_products,
                     double product_total, std::array<Eigen::VectorXd, 3> factor_eigenvalues,
                     std::array<int, 3> factor_ranks);

  int rank() const { return static_cast<int>(vectors_.cols()); }
  Eigen::Index dim() const { return vectors_.rows(); }
  const Eigen::MatrixXcd& vectors() const { return vectors_; }
  const Eigen::VectorXd& selected_products() const { return selected_products_; }
  const std::array<Eigen::VectorXd, 3>& factor_eigenvalues() const { return factor_eigenvalues_; }
  const std::array<int, 3>& factor_ranks() const { return factor_ranks_; }

  Eigen::MatrixXcd projector() const;   // sum v v^H
  Eigen::MatrixXcd complement() const;  // I - projector
  // Upper bound on the expected in-region leakage: unselected eigenvalue mass
  // over total mass of the region correlation kernel.
  double tail_bound() const;

 private:
  Eigen::MatrixXcd vectors_;
  Eigen::VectorXd selected_products_;
  double product_total_ = 0.0;
  std::array<Eigen::VectorXd, 3> factor_eigenvalues_;
  std::array<int, 3> factor_ranks_;
};

// Time-bandwidth rule K_i = ceil(2 W_i P_i) + 1 (clamped to [0, P_i]) used as
// the config default for the per-factor ranks.
std::array<int, 3> default_ranks(const RegionSpec& region, int P1, int P2, int P3);

// Build the projector on the smoothed coarray grid of cfg: factor sizes
// (L_s+1, L_t+1, L_s+1), factor half-bandwidths w_i = width_i / 2, factors
// modulated to the region center. Throws RankTooLarge when a requested rank
// exceeds its factor size.
RejectionProjector build_projector(const scene::CCubeConfig& cfg, const RegionSpec& region,
                                   const std::array<int, 3>& ranks);
RejectionProjector build_projector_dims(int L_s, int L_t, const RegionSpec& region,
                                        const std::array<int, 3>& ranks);

// Symmetrized complement projection Pi_perp R Pi_perp; keeps the domain tag.
covariance::HermitianCov reject(const covariance::HermitianCov& R,
                                const RejectionProjector& proj);

}  // namespace copulse::rejection
