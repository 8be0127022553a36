#include "copulse/rejection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>
#include <utility>

#include "copulse/coprime.hpp"
#include "copulse/errors.hpp"

namespace copulse::rejection {

void RegionSpec::validate() const {
  for (double w : widths)
    if (!(w > 0.0 && w <= 1.0)) throw BadScene("region widths must lie in (0, 1]");
}

Eigen::MatrixXd prolate_matrix(int P, double W) {
  if (P < 1) throw DimensionMismatch("prolate matrix size must be >= 1");
  if (!(W > 0.0 && W <= 0.5)) throw BadBandwidth("half-bandwidth must lie in (0, 0.5]");
  Eigen::MatrixXd B(P, P);
  for (int k = 0; k < P; ++k)
    for (int l = 0; l < P; ++l) {
      const double x = 2.0 * W * (k - l);
      B(k, l) = k == l ? 2.0 * W
                       : 2.0 * W * std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    }
  return B;
}

Eigen::MatrixXcd modulated_prolate(const Eigen::VectorXcd& steer, const Eigen::MatrixXd& B) {
  if (steer.size() != B.rows() || B.rows() != B.cols())
    throw DimensionMismatch("steering length does not match prolate matrix");
  return (steer * steer.adjoint()).cwiseProduct(B.cast<std::complex<double>>());
}

RejectionProjector::RejectionProjector(Eigen::MatrixXcd vectors,
                                       Eigen::VectorXd selected_products, double product_total,
                                       std::array<Eigen::VectorXd, 3> factor_eigenvalues,
                                       std::array<int, 3> factor_ranks)
    : vectors_(std::move(vectors)),
      selected_products_(std::move(selected_products)),
      product_total_(product_total),
      factor_eigenvalues_(std::move(factor_eigenvalues)),
      factor_ranks_(factor_ranks) {}

Eigen::MatrixXcd RejectionProjector::projector() const {
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(dim(), dim());
  if (vectors_.cols() > 0)
    P.selfadjointView<Eigen::Lower>().rankUpdate(vectors_, 1.0);
  return Eigen::MatrixXcd(P.selfadjointView<Eigen::Lower>());
}

Eigen::MatrixXcd RejectionProjector::complement() const {
  return Eigen::MatrixXcd::Identity(dim(), dim()) - projector();
}

double RejectionProjector::tail_bound() const {
  if (product_total_ <= 0.0) return 0.0;
  return 1.0 - selected_products_.sum() / product_total_;
}

std::array<int, 3> default_ranks(const RegionSpec& region, int P1, int P2, int P3) {
  region.validate();
  const std::array<int, 3> sizes{P1, P2, P3};
  std::array<int, 3> ranks{};
  for (int i = 0; i < 3; ++i) {
    const double tb = region.widths[static_cast<std::size_t>(i)] * sizes[static_cast<std::size_t>(i)];
    const int k = static_cast<int>(std::ceil(tb - 1e-9)) + 1;
    ranks[static_cast<std::size_t>(i)] = std::clamp(k, 0, sizes[static_cast<std::size_t>(i)]);
  }
  return ranks;
}

namespace {

struct FactorEigs {
  Eigen::MatrixXcd vectors;  // modulated, descending eigenvalue order
  Eigen::VectorXd values;
};

FactorEigs factor_eigs(int P, double W, double f0) {
  const Eigen::MatrixXd B = prolate_matrix(P, W);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  if (es.info() != Eigen::Success) throw Error("prolate eigendecomposition failed");
  std::vector<int> seg(static_cast<std::size_t>(P));
  for (int i = 0; i < P; ++i) seg[static_cast<std::size_t>(i)] = i;
  const Eigen::VectorXcd s = scene::steer(seg, f0);
  FactorEigs out;
  out.vectors.resize(P, P);
  out.values.resize(P);
  for (int i = 0; i < P; ++i) {
    const int src = P - 1 - i;
    Eigen::VectorXd v = es.eigenvectors().col(src);
    Eigen::Index peak;
    v.cwiseAbs().maxCoeff(&peak);
    if (v[peak] < 0.0) v = -v;
    out.vectors.col(i) = s.cwiseProduct(v.cast<std::complex<double>>());
    out.values[i] = es.eigenvalues()[src];
  }
  return out;
}

}  // namespace

RejectionProjector build_projector_dims(int L_s, int L_t, const RegionSpec& region,
                                        const std::array<int, 3>& ranks) {
  region.validate();
  const std::array<int, 3> sizes{L_s + 1, L_t + 1, L_s + 1};
  for (int i = 0; i < 3; ++i) {
    const int k = ranks[static_cast<std::size_t>(i)];
    if (k < 0 || k > sizes[static_cast<std::size_t>(i)])
      throw RankTooLarge("per-factor rank exceeds factor size");
  }
  const std::array<double, 3> centers{region.center.f_T, region.center.f_d, region.center.f_R};
  std::array<FactorEigs, 3> fe;
  for (int i = 0; i < 3; ++i)
    fe[static_cast<std::size_t>(i)] =
        factor_eigs(sizes[static_cast<std::size_t>(i)],
                    region.widths[static_cast<std::size_t>(i)] / 2.0,
                    centers[static_cast<std::size_t>(i)]);

  // Rank selection over all Kronecker triples: largest eigenvalue products
  // first, lexicographic (k1,k2,k3) on ties.
  std::vector<std::tuple<double, int, int, int>> all;
  all.reserve(static_cast<std::size_t>(sizes[0]) * sizes[1] * sizes[2]);
  double total = 0.0;
  for (int k1 = 0; k1 < sizes[0]; ++k1)
    for (int k2 = 0; k2 < sizes[1]; ++k2)
      for (int k3 = 0; k3 < sizes[2]; ++k3) {
        const double p = fe[0].values[k1] * fe[1].values[k2] * fe[2].values[k3];
        total += p;
        all.emplace_back(p, k1, k2, k3);
      }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::tie(std::get<1>(a), std::get<2>(a), std::get<3>(a)) <
           std::tie(std::get<1>(b), std::get<2>(b), std::get<3>(b));
  });

  const int K = ranks[0] * ranks[1] * ranks[2];
  const Eigen::Index D = static_cast<Eigen::Index>(sizes[0]) * sizes[1] * sizes[2];
  Eigen::MatrixXcd vectors(D, K);
  Eigen::VectorXd products(K);
  for (int j = 0; j < K; ++j) {
    const auto& [p, k1, k2, k3] = all[static_cast<std::size_t>(j)];
    vectors.col(j) =
        scene::kron3(fe[0].vectors.col(k1), fe[1].vectors.col(k2), fe[2].vectors.col(k3));
    products[j] = p;
  }
  return RejectionProjector(std::move(vectors), std::move(products), total,
                            {fe[0].values, fe[1].values, fe[2].values}, ranks);
}

RejectionProjector build_projector(const scene::CCubeConfig& cfg, const RegionSpec& region,
                                   const std::array<int, 3>& ranks) {
  const int L_s = coprime::lag_structure(cfg.sensor_set).contiguous_bound;
  const int L_t = coprime::lag_structure(cfg.pulse_set).contiguous_bound;
  return build_projector_dims(L_s, L_t, region, ranks);
}

covariance::HermitianCov reject(const covariance::HermitianCov& R,
                                const RejectionProjector& proj) {
  if (R.domain == covariance::CovDomain::Physical)
    throw DimensionMismatch("rejection operates on coarray-domain covariances");
  if (R.matrix.rows() != proj.dim())
    throw DimensionMismatch("covariance size does not match projector");
  const Eigen::MatrixXcd C = proj.complement();
  return {covariance::hermitian_part(C * R.matrix * C), R.domain, R.dim_a, R.dim_b};
}

}  // namespace copulse::rejection
