#pragma once

#include <Eigen/Dense>
#include <complex>

#include "copulse/coprime.hpp"

namespace copulse::covariance {

enum class CovDomain { Physical, CoarraySmoothed, CoarrayRecovered };

// Hermitian covariance tagged with the domain it lives in. Physical matrices
// are P_s^2 K sized on the sparse co-prime geometry; both coarray domains are
// (L_s+1)^2 (L_t+1) sized on the filled virtual geometry.
struct HermitianCov {
  Eigen::MatrixXcd matrix;
  CovDomain domain = CovDomain::Physical;
  int dim_a = 0;  // P_s (Physical) or L_s (coarray)
  int dim_b = 0;  // K   (Physical) or L_t (coarray)
};

Eigen::Index expected_size(CovDomain domain, int dim_a, int dim_b);

// Tag + size check in one place; throws DimensionMismatch.
HermitianCov make_cov(Eigen::MatrixXcd m, CovDomain domain, int dim_a, int dim_b);

// (A + A^H)/2, used after every algebraic stage to keep Hermitian symmetry at
// machine precision.
Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& a);

// Virtual snapshot on the 3-D lag cube [-L_s,L_s] x [-L_t,L_t] x [-L_s,L_s],
// stored transmit-outer / time-middle / receive-inner to match a_T kron b
// kron a_R.
struct VirtualSnapshot {
  Eigen::VectorXcd z;
  int L_s = 0;
  int L_t = 0;

  Eigen::Index index(int l1, int l2, int l3) const;  // throws DimensionMismatch
  std::complex<double> at(int l1, int l2, int l3) const { return z[index(l1, l2, l3)]; }
  Eigen::Index size() const { return z.size(); }
};

// Redundancy-averaged lift of a physical covariance onto the contiguous lag
// cube: each entry is the mean of all R entries whose (transmit, time,
// receive) index differences equal that lag triple.
VirtualSnapshot virtualize(const HermitianCov& R, const coprime::LagStructure& lags_s,
                           const coprime::LagStructure& lags_t);

// Overlapping-subvector smoothing R_v = sum_l z_l z_l^H over the
// (L_s+1)^2 (L_t+1) shifts; returns a CoarraySmoothed Hermitian PSD matrix.
HermitianCov spatial_smooth(const VirtualSnapshot& z);

// Principal matrix square root (eigendecomposition, negative eigenvalues
// clamped to zero). The smoothing identity leaves an unknown positive scale
// which is never estimated: downstream MVDR weights are scale-invariant.
// Throws NotPSD when the most negative eigenvalue is below -tol * trace.
HermitianCov recover_coarray_cov(const HermitianCov& R_v, double tol = 1e-10);

}  // namespace copulse::covariance
