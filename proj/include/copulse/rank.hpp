#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "copulse/covariance.hpp"
#include "copulse/fraction.hpp"

namespace copulse::rank {

enum class RankBranch { GeneralFraction, Saturated, IntegerBeta };

struct RankReport {
  int R_r = 0;         // rank of the spatial selection matrix
  int total_rank = 0;  // predicted clutter rank for the requested N_p
  RankBranch branch = RankBranch::GeneralFraction;
  std::optional<int> empirical_rank;
  std::vector<double> eigenvalues;  // descending, optional diagnostics
};

// Closed-form rank of the selection matrix: N(L_s+1) + M(L_t+1) - MN when
// both M < L_s+1 and N < L_t+1, otherwise the saturated (L_s+1)(L_t+1).
int rank_Rr(int L_s, int L_t, int M, int N);
RankBranch rank_branch(int L_s, int L_t, int M, int N);

// Piecewise total clutter rank: N_p * R_r up to N_p = L_s+1, constant after.
int clutter_rank(int L_s, int L_t, int M, int N, int N_p);

RankReport predict(int L_s, int L_t, int M, int N, int N_p);

// 0/1 selection matrix mapping the (time k, receive n) grid onto the integer
// positions k M + n N; rows ordered k(L_s+1)+n, columns 0..L_t M + L_s N.
// Valid only under the closed form's spacing condition 2d/lambda_b = N.
struct SelectionMatrix {
  Eigen::MatrixXd P;           // (L_s+1)(L_t+1) x (L_t M + L_s N + 1)
  std::vector<int> positions;  // occupied column values, ascending
};

SelectionMatrix build_P(int L_s, int L_t, int M, int N, const Fraction& two_d_over_lambda);

// Count of eigenvalues of R above rel_threshold * largest, after subtracting
// a known noise floor. Intended for analytic covariances where the clutter
// spectrum has a hard cliff.
int empirical_rank(const covariance::HermitianCov& R, double noise_floor,
                   double rel_threshold = 1e-6);

// Sample-covariance variant: the smoothing scale is fit from the spectrum
// (median eigenvalue taken as the noise level) and eigenvalues above 3x that
// level are counted.
int empirical_rank_noise_referenced(const covariance::HermitianCov& R);

}  // namespace copulse::rank
