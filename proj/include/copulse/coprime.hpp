#pragma once

#include <map>
#include <utility>
#include <vector>

namespace copulse::coprime {

// Co-prime integer pair (M, N) with gcd 1. When used as an array/pulse pattern
// the small member must be strictly smaller than the large one.
struct CoprimePair {
  int m_small = 1;
  int n_large = 2;
};

// Sparse index set S = {M i, 0 <= i <= N-1} u {N j, 1 <= j <= 2M-1}.
struct CoprimeSet {
  CoprimePair pair;
  std::vector<int> indices;  // sorted, duplicate-free, starts at 0
  int cardinality() const { return static_cast<int>(indices.size()); }
};

// Difference-coarray bookkeeping. contiguous_bound L = M N + M - 1; every lag
// in [-L, L] is reachable and pairs_by_lag[lag + L] lists all (a, b) with
// indices[a] - indices[b] = lag. Lags beyond the contiguous segment are kept
// in noncontiguous for diagnostics only; no downstream op consumes them.
struct LagStructure {
  int contiguous_bound = 0;
  std::vector<int> full_difference_set;
  std::vector<std::vector<std::pair<int, int>>> pairs_by_lag;
  std::map<int, std::vector<std::pair<int, int>>> noncontiguous;

  const std::vector<std::pair<int, int>>& pairs_for(int lag) const;
};

CoprimeSet build_coprime_set(CoprimePair pair);
LagStructure lag_structure(const CoprimeSet& set);

// Number of distinct values {l M + p N : 0 <= l <= l_max, 0 <= p <= p_max}.
// Closed form: full grid count when one factor saturates, otherwise
// l_max M + p_max N + 1 - (M-1)(N-1).
long long count_distinct_sums(int M, int N, int l_max, int p_max);

}  // namespace copulse::coprime
