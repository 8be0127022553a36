#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "copulse/coprime.hpp"
#include "copulse/errors.hpp"
#include "copulse/rejection.hpp"
#include "copulse/scene.hpp"

using namespace copulse;

namespace {

std::vector<int> iota_seg(int n) {
  std::vector<int> seg(n);
  for (int i = 0; i < n; ++i) seg[i] = i;
  return seg;
}

Eigen::MatrixXcd kron_mat(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

rejection::RegionSpec reference_region() {
  rejection::RegionSpec region;
  region.center = {0.1, -0.3, 0.3};
  region.widths = {0.125, 0.125, 0.125};
  return region;
}

}  // namespace

TEST_CASE("prolate_matrix: kernel values and limits") {
  const Eigen::MatrixXd eye = rejection::prolate_matrix(5, 0.5);
  CHECK((eye - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-14);

  const Eigen::MatrixXd B = rejection::prolate_matrix(8, 1.0 / 14.0);
  CHECK(B.trace() == doctest::Approx(8.0 / 7.0).epsilon(1e-12));
  CHECK((B - B.transpose()).norm() < 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  CHECK(es.eigenvalues().sum() == doctest::Approx(8.0 / 7.0).epsilon(1e-10));
  CHECK(es.eigenvalues().minCoeff() > -1e-12);

  CHECK_THROWS_AS(rejection::prolate_matrix(0, 0.25), DimensionMismatch);
  CHECK_THROWS_AS(rejection::prolate_matrix(4, 0.0), BadBandwidth);
  CHECK_THROWS_AS(rejection::prolate_matrix(4, 0.6), BadBandwidth);
}

TEST_CASE("modulated_prolate: spectrum preserved, eigenvectors modulated") {
  const Eigen::MatrixXd B = rejection::prolate_matrix(7, 0.2);
  const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(7);
  CHECK((rejection::modulated_prolate(ones, B) - B.cast<std::complex<double>>()).norm() <
        1e-14);

  const Eigen::VectorXcd s = scene::steer(iota_seg(7), 0.31);
  const Eigen::MatrixXcd M = rejection::modulated_prolate(s, B);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(B);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> em(M);
  CHECK((eb.eigenvalues() - em.eigenvalues()).norm() < 1e-10);
  for (int k = 0; k < 7; ++k) {
    const Eigen::VectorXcd v = s.cwiseProduct(eb.eigenvectors().col(k).cast<std::complex<double>>());
    CHECK((M * v - eb.eigenvalues()[k] * v).norm() <= 1e-8);
  }
  CHECK_THROWS_AS(rejection::modulated_prolate(Eigen::VectorXcd::Ones(6), B),
                  DimensionMismatch);
}

TEST_CASE("region validation and default ranks") {
  rejection::RegionSpec bad = reference_region();
  bad.widths[1] = 0.0;
  CHECK_THROWS_AS(bad.validate(), BadScene);
  bad.widths[1] = 1.5;
  CHECK_THROWS_AS(bad.validate(), BadScene);

  const auto ranks = rejection::default_ranks(reference_region(), 8, 8, 8);
  CHECK(ranks == std::array<int, 3>{2, 2, 2});

  rejection::RegionSpec wide = reference_region();
  wide.widths = {1.0, 1.0, 1.0};
  CHECK(rejection::default_ranks(wide, 4, 4, 4) == std::array<int, 3>{4, 4, 4});
}

TEST_CASE("projector algebra on random regions") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uc(-0.5, 0.5);
  std::uniform_real_distribution<double> uw(0.1, 0.9);
  for (int trial = 0; trial < 10; ++trial) {
    rejection::RegionSpec region;
    region.center = {uc(rng), uc(rng), uc(rng)};
    region.widths = {uw(rng), uw(rng), uw(rng)};
    const int L_s = 3, L_t = 2;
    std::uniform_int_distribution<int> r1(0, L_s + 1), r2(0, L_t + 1);
    const std::array<int, 3> ranks{r1(rng), r2(rng), r1(rng)};
    const auto proj = rejection::build_projector_dims(L_s, L_t, region, ranks);
    const int K = ranks[0] * ranks[1] * ranks[2];
    CHECK(proj.rank() == K);
    CHECK(proj.dim() == 48);
    const Eigen::MatrixXcd P = proj.projector();
    CHECK((P * P - P).norm() <= 1e-8);
    CHECK((P - P.adjoint()).norm() <= 1e-10);
    CHECK(P.trace().real() == doctest::Approx(static_cast<double>(K)).epsilon(1e-8).scale(1.0));
    CHECK((proj.complement() + P - Eigen::MatrixXcd::Identity(48, 48)).norm() < 1e-12);
    CHECK(proj.tail_bound() >= -1e-12);
    CHECK(proj.tail_bound() <= 1.0 + 1e-12);
  }
}

TEST_CASE("separable eigenstructure of the Kronecker kernel") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> uc(-0.5, 0.5);
  std::uniform_real_distribution<double> uw(0.05, 0.45);
  std::uniform_int_distribution<int> up(3, 5);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXcd M[3];
    Eigen::MatrixXcd modvec[3];
    Eigen::VectorXd val[3];
    for (int i = 0; i < 3; ++i) {
      const int P = up(rng);
      const Eigen::MatrixXd B = rejection::prolate_matrix(P, uw(rng));
      const Eigen::VectorXcd s = scene::steer(iota_seg(P), uc(rng));
      M[i] = rejection::modulated_prolate(s, B);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
      val[i] = es.eigenvalues();
      modvec[i].resize(P, P);
      for (int c = 0; c < P; ++c)
        modvec[i].col(c) = s.cwiseProduct(es.eigenvectors().col(c).cast<std::complex<double>>());
      const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(P));
      CHECK((M[i] * modvec[i].col(k) - val[i][k] * modvec[i].col(k)).norm() <= 1e-8);
    }
    // (M1 kron M2 kron M3)(a kron b kron c) = (l1 l2 l3)(a kron b kron c)
    std::array<int, 3> pick;
    for (int i = 0; i < 3; ++i)
      pick[static_cast<std::size_t>(i)] =
          static_cast<int>(rng() % static_cast<std::uint64_t>(modvec[i].cols()));
    const Eigen::VectorXcd v =
        scene::kron3(modvec[0].col(pick[0]), modvec[1].col(pick[1]), modvec[2].col(pick[2]));
    const Eigen::MatrixXcd MK = kron_mat(kron_mat(M[0], M[1]), M[2]);
    const double lam = val[0][pick[0]] * val[1][pick[1]] * val[2][pick[2]];
    CHECK((MK * v - lam * v).norm() <= 1e-8 * v.norm());
  }
}

TEST_CASE("rank selection is a prefix of one global ordering") {
  const auto region = reference_region();
  // equal products of per-factor ranks give the identical projector
  const auto a = rejection::build_projector_dims(7, 7, region, {4, 1, 1});
  const auto b = rejection::build_projector_dims(7, 7, region, {1, 2, 2});
  CHECK(a.rank() == 4);
  CHECK(b.rank() == 4);
  CHECK((a.projector() - b.projector()).norm() < 1e-12);

  // selected products are descending and start at the top triple
  const auto proj = rejection::build_projector_dims(7, 7, region, {2, 2, 2});
  const auto& prod = proj.selected_products();
  for (Eigen::Index i = 1; i < prod.size(); ++i) CHECK(prod[i] <= prod[i - 1] + 1e-15);
  const double top = proj.factor_eigenvalues()[0][0] * proj.factor_eigenvalues()[1][0] *
                     proj.factor_eigenvalues()[2][0];
  CHECK(prod[0] == doctest::Approx(top).epsilon(1e-12));

  CHECK_THROWS_AS(rejection::build_projector_dims(7, 7, region, {9, 2, 2}), RankTooLarge);
  CHECK_THROWS_AS(rejection::build_projector_dims(7, 7, region, {-1, 2, 2}), RankTooLarge);
}

TEST_CASE("full rank reproduces the identity, zero rank the complement") {
  const auto region = reference_region();
  const auto full = rejection::build_projector_dims(2, 1, region, {3, 2, 3});
  CHECK((full.projector() - Eigen::MatrixXcd::Identity(18, 18)).norm() <= 1e-8);
  CHECK(full.tail_bound() <= 1e-12);

  const auto zero = rejection::build_projector_dims(2, 1, region, {0, 0, 0});
  CHECK(zero.rank() == 0);
  CHECK((zero.complement() - Eigen::MatrixXcd::Identity(18, 18)).norm() == 0.0);
  CHECK(zero.tail_bound() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("reject: annihilation, invariance, and domain checks") {
  const auto region = reference_region();
  const auto proj = rejection::build_projector_dims(7, 7, region, {2, 2, 2});

  // a covariance built from selected directions is annihilated
  const Eigen::MatrixXcd V = proj.vectors();
  const Eigen::MatrixXcd R_in = V * V.adjoint();
  const auto rejected = rejection::reject(
      covariance::make_cov(R_in, covariance::CovDomain::CoarrayRecovered, 7, 7), proj);
  CHECK(rejected.matrix.norm() <= 1e-8 * R_in.norm());
  CHECK(rejected.domain == covariance::CovDomain::CoarrayRecovered);

  // zero-rank projector leaves the covariance untouched
  const auto zero = rejection::build_projector_dims(7, 7, region, {0, 0, 0});
  const Eigen::MatrixXcd R_any = Eigen::MatrixXcd::Identity(512, 512) * 3.0;
  const auto untouched = rejection::reject(
      covariance::make_cov(R_any, covariance::CovDomain::CoarrayRecovered, 7, 7), zero);
  CHECK((untouched.matrix - R_any).norm() < 1e-12);

  const auto phys = covariance::make_cov(Eigen::MatrixXcd::Identity(216, 216),
                                         covariance::CovDomain::Physical, 6, 6);
  CHECK_THROWS_AS(rejection::reject(phys, proj), DimensionMismatch);
  const auto small = covariance::make_cov(Eigen::MatrixXcd::Identity(27, 27),
                                          covariance::CovDomain::CoarrayRecovered, 2, 2);
  CHECK_THROWS_AS(rejection::reject(small, proj), DimensionMismatch);
}

TEST_CASE("tail bound equals the mean in-region leakage") {
  const auto region = reference_region();
  const auto proj = rejection::build_projector_dims(7, 7, region, {2, 2, 2});
  const Eigen::MatrixXcd V = proj.vectors();
  const auto seg = iota_seg(8);

  std::mt19937_64 rng(99);
  auto draw = [&](double c, double w) {
    std::uniform_real_distribution<double> u(c - w / 2.0, c + w / 2.0);
    return u(rng);
  };
  const int n_draws = 4000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n_draws; ++i) {
    const Eigen::VectorXcd v = scene::kron3(scene::steer(seg, draw(0.1, 0.125)),
                                            scene::steer(seg, draw(-0.3, 0.125)),
                                            scene::steer(seg, draw(0.3, 0.125)));
    const double n2 = v.squaredNorm();
    const double residue = (n2 - (V.adjoint() * v).squaredNorm()) / n2;
    sum += residue;
    sum2 += residue * residue;
  }
  const double mean = sum / n_draws;
  const double var = sum2 / n_draws - mean * mean;
  const double sem = std::sqrt(var / n_draws);
  CHECK(std::abs(mean - proj.tail_bound()) < 5.0 * sem + 1e-3);
}

TEST_CASE("raising a factor rank monotonically shrinks the residue") {
  const auto region = reference_region();
  const auto seg = iota_seg(8);
  std::mt19937_64 rng(123);
  auto draw = [&](double c, double w) {
    std::uniform_real_distribution<double> u(c - w / 2.0, c + w / 2.0);
    return u(rng);
  };
  std::vector<Eigen::VectorXcd> draws;
  for (int i = 0; i < 2000; ++i)
    draws.push_back(scene::kron3(scene::steer(seg, draw(0.1, 0.125)),
                                 scene::steer(seg, draw(-0.3, 0.125)),
                                 scene::steer(seg, draw(0.3, 0.125))));
  double prev = 2.0;
  for (int k = 1; k <= 4; ++k) {
    const auto proj = rejection::build_projector_dims(7, 7, region, {k, 2, 2});
    const Eigen::MatrixXcd V = proj.vectors();
    double sum = 0.0;
    for (const auto& v : draws)
      sum += (v.squaredNorm() - (V.adjoint() * v).squaredNorm()) / v.squaredNorm();
    const double mean = sum / static_cast<double>(draws.size());
    CHECK(mean <= prev + 1e-12);
    prev = mean;
  }
  CHECK(prev < 0.05);  // rank (4,2,2) leaves little in-region energy
}

TEST_CASE("config-level builder matches the explicit lag bounds") {
  scene::CCubeConfig cfg;
  cfg.sensor_set = coprime::build_coprime_set({2, 3});
  cfg.pulse_set = coprime::build_coprime_set({2, 3});
  cfg.d = 0.15;
  cfg.f_b = 1e9;
  cfg.T = 5e-4;
  cfg.T_p = 1e-6;
  cfg.v_p = 150.0;
  cfg.H = 6000.0;
  cfg.delta_f = 1.0 / (6.0 * cfg.T);
  cfg.validate();
  const auto region = reference_region();
  const auto via_cfg = rejection::build_projector(cfg, region, {2, 2, 2});
  const auto via_dims = rejection::build_projector_dims(7, 7, region, {2, 2, 2});
  CHECK(via_cfg.dim() == 512);
  CHECK((via_cfg.projector() - via_dims.projector()).norm() < 1e-12);
}
