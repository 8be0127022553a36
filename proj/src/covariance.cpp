#include "copulse/covariance.hpp"

#include <complex>
#include <string>

#include "copulse/errors.hpp"

namespace copulse::covariance {

Eigen::Index expected_size(CovDomain domain, int dim_a, int dim_b) {
  if (domain == CovDomain::Physical)
    return static_cast<Eigen::Index>(dim_a) * dim_a * dim_b;
  return static_cast<Eigen::Index>(dim_a + 1) * (dim_a + 1) * (dim_b + 1);
}

HermitianCov make_cov(Eigen::MatrixXcd m, CovDomain domain, int dim_a, int dim_b) {
  const Eigen::Index want = expected_size(domain, dim_a, dim_b);
  if (m.rows() != want || m.cols() != want)
    throw DimensionMismatch("covariance size " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + " does not match domain size " +
                            std::to_string(want));
  return {std::move(m), domain, dim_a, dim_b};
}

Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& a) {
  return 0.5 * (a + a.adjoint());
}

Eigen::Index VirtualSnapshot::index(int l1, int l2, int l3) const {
  if (l1 < -L_s || l1 > L_s || l2 < -L_t || l2 > L_t || l3 < -L_s || l3 > L_s)
    throw DimensionMismatch("lag triple outside contiguous cube");
  const Eigen::Index w_s = 2 * L_s + 1, w_t = 2 * L_t + 1;
  return (static_cast<Eigen::Index>(l1 + L_s) * w_t + (l2 + L_t)) * w_s + (l3 + L_s);
}

VirtualSnapshot virtualize(const HermitianCov& R, const coprime::LagStructure& lags_s,
                           const coprime::LagStructure& lags_t) {
  if (R.domain != CovDomain::Physical)
    throw DimensionMismatch("virtualize expects a Physical-domain covariance");
  const int P_s = R.dim_a, K = R.dim_b;
  if (R.matrix.rows() != expected_size(CovDomain::Physical, P_s, K))
    throw DimensionMismatch("physical covariance size mismatch");
  const int L_s = lags_s.contiguous_bound, L_t = lags_t.contiguous_bound;

  VirtualSnapshot out;
  out.L_s = L_s;
  out.L_t = L_t;
  out.z.resize(static_cast<Eigen::Index>(2 * L_s + 1) * (2 * L_s + 1) * (2 * L_t + 1));

  const auto& M = R.matrix;
  Eigen::Index idx = 0;
  for (int l1 = -L_s; l1 <= L_s; ++l1) {
    const auto& tx_pairs = lags_s.pairs_for(l1);
    for (int l2 = -L_t; l2 <= L_t; ++l2) {
      const auto& tm_pairs = lags_t.pairs_for(l2);
      for (int l3 = -L_s; l3 <= L_s; ++l3) {
        const auto& rx_pairs = lags_s.pairs_for(l3);
        std::complex<double> acc(0.0, 0.0);
        for (const auto& [a, ap] : tx_pairs)
          for (const auto& [b, bp] : tm_pairs)
            for (const auto& [c, cp] : rx_pairs) {
              const Eigen::Index row = (static_cast<Eigen::Index>(a) * K + b) * P_s + c;
              const Eigen::Index col = (static_cast<Eigen::Index>(ap) * K + bp) * P_s + cp;
              acc += M(row, col);
            }
        const double cnt = static_cast<double>(tx_pairs.size()) * tm_pairs.size() *
                           rx_pairs.size();
        out.z[idx++] = acc / cnt;
      }
    }
  }
  return out;
}

HermitianCov spatial_smooth(const VirtualSnapshot& z) {
  const int L_s = z.L_s, L_t = z.L_t;
  const Eigen::Index D = expected_size(CovDomain::CoarraySmoothed, L_s, L_t);
  if (z.size() != static_cast<Eigen::Index>(2 * L_s + 1) * (2 * L_s + 1) * (2 * L_t + 1))
    throw DimensionMismatch("virtual snapshot size mismatch");

  // Column l = (l1,l2,l3) holds the subvector whose row (i1,i2,i3) entry is
  // z at lag (i1-l1, i2-l2, i3-l3); R_v = Z Z^H in one gemm.
  Eigen::MatrixXcd Z(D, D);
  Eigen::Index col = 0;
  for (int l1 = 0; l1 <= L_s; ++l1)
    for (int l2 = 0; l2 <= L_t; ++l2)
      for (int l3 = 0; l3 <= L_s; ++l3) {
        Eigen::Index row = 0;
        for (int i1 = 0; i1 <= L_s; ++i1)
          for (int i2 = 0; i2 <= L_t; ++i2)
            for (int i3 = 0; i3 <= L_s; ++i3)
              Z(row++, col) = z.at(i1 - l1, i2 - l2, i3 - l3);
        ++col;
      }

  Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(D, D);
  R.selfadjointView<Eigen::Lower>().rankUpdate(Z, 1.0);
  return {Eigen::MatrixXcd(R.selfadjointView<Eigen::Lower>()), CovDomain::CoarraySmoothed, L_s,
          L_t};
}

HermitianCov recover_coarray_cov(const HermitianCov& R_v, double tol) {
  if (R_v.domain != CovDomain::CoarraySmoothed)
    throw DimensionMismatch("recover_coarray_cov expects a CoarraySmoothed covariance");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(R_v.matrix));
  if (es.info() != Eigen::Success) throw NotPSD("eigendecomposition failed");
  Eigen::VectorXd lam = es.eigenvalues();
  const double trace = lam.sum();
  if (lam.minCoeff() < -tol * std::max(trace, 0.0))
    throw NotPSD("smoothed covariance has negative eigenvalue beyond tolerance");
  const Eigen::VectorXd root = lam.cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXcd R =
      es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
  return {hermitian_part(R), CovDomain::CoarrayRecovered, R_v.dim_a, R_v.dim_b};
}

}  // namespace copulse::covariance
