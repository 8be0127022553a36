#include "copulse/rank.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "copulse/errors.hpp"

namespace copulse::rank {

namespace {

void check_args(int L_s, int L_t, int M, int N) {
  if (L_s < 0 || L_t < 0) throw DimensionMismatch("lag bounds must be nonnegative");
  if (M < 1 || N < 1) throw NonCoprime("beta numerator and denominator must be positive");
  if (std::gcd(M, N) != 1) throw NonCoprime("beta must be a reduced fraction");
}

}  // namespace

int rank_Rr(int L_s, int L_t, int M, int N) {
  check_args(L_s, L_t, M, N);
  if (M < L_s + 1 && N < L_t + 1) return N * (L_s + 1) + M * (L_t + 1) - M * N;
  return (L_s + 1) * (L_t + 1);
}

RankBranch rank_branch(int L_s, int L_t, int M, int N) {
  check_args(L_s, L_t, M, N);
  if (!(M < L_s + 1 && N < L_t + 1)) return RankBranch::Saturated;
  return N == 1 ? RankBranch::IntegerBeta : RankBranch::GeneralFraction;
}

int clutter_rank(int L_s, int L_t, int M, int N, int N_p) {
  if (N_p < 1) throw DimensionMismatch("N_p must be >= 1");
  const int R_r = rank_Rr(L_s, L_t, M, N);
  return (N_p <= L_s + 1 ? N_p : L_s + 1) * R_r;
}

RankReport predict(int L_s, int L_t, int M, int N, int N_p) {
  RankReport rep;
  rep.R_r = rank_Rr(L_s, L_t, M, N);
  rep.total_rank = clutter_rank(L_s, L_t, M, N, N_p);
  rep.branch = rank_branch(L_s, L_t, M, N);
  return rep;
}

SelectionMatrix build_P(int L_s, int L_t, int M, int N, const Fraction& two_d_over_lambda) {
  check_args(L_s, L_t, M, N);
  if (two_d_over_lambda.den != 1 || two_d_over_lambda.num != N)
    throw UnsupportedSpacing("selection matrix requires 2d/lambda_b = N");
  const int rows = (L_s + 1) * (L_t + 1);
  const int cols = L_t * M + L_s * N + 1;
  SelectionMatrix out;
  out.P = Eigen::MatrixXd::Zero(rows, cols);
  std::set<int> occupied;
  for (int k = 0; k <= L_t; ++k)
    for (int n = 0; n <= L_s; ++n) {
      const int pos = k * M + n * N;
      out.P(k * (L_s + 1) + n, pos) = 1.0;
      occupied.insert(pos);
    }
  out.positions.assign(occupied.begin(), occupied.end());
  return out;
}

int empirical_rank(const covariance::HermitianCov& R, double noise_floor, double rel_threshold) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(R.matrix, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd lam = es.eigenvalues().array() - noise_floor;
  const double top = lam.maxCoeff();
  if (top <= 0.0) return 0;
  return static_cast<int>((lam.array() >= rel_threshold * top).count());
}

int empirical_rank_noise_referenced(const covariance::HermitianCov& R) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(R.matrix, Eigen::EigenvaluesOnly);
  Eigen::VectorXd lam = es.eigenvalues();
  std::vector<double> v(lam.data(), lam.data() + lam.size());
  std::sort(v.begin(), v.end());
  const double floor = v[v.size() / 2];
  if (floor <= 0.0) return static_cast<int>((lam.array() > 0.0).count());
  return static_cast<int>((lam.array() > 3.0 * floor).count());
}

}  // namespace copulse::rank
