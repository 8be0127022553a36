#include "copulse/coprime.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "copulse/errors.hpp"

namespace copulse::coprime {

CoprimeSet build_coprime_set(CoprimePair pair) {
  const int M = pair.m_small, N = pair.n_large;
  if (M < 1 || N < 1 || std::gcd(M, N) != 1)
    throw NonCoprime("pair (" + std::to_string(M) + "," + std::to_string(N) + ") is not co-prime");
  if (M >= N)
    throw BadOrder("pattern pair requires m_small < n_large, got (" + std::to_string(M) + "," +
                   std::to_string(N) + ")");
  std::set<int> s;
  for (int i = 0; i < N; ++i) s.insert(M * i);
  for (int j = 1; j <= 2 * M - 1; ++j) s.insert(N * j);
  return CoprimeSet{pair, std::vector<int>(s.begin(), s.end())};
}

LagStructure lag_structure(const CoprimeSet& set) {
  const int M = set.pair.m_small, N = set.pair.n_large;
  LagStructure out;
  out.contiguous_bound = M * N + M - 1;
  const int L = out.contiguous_bound;
  out.pairs_by_lag.assign(2 * L + 1, {});
  std::set<int> diffs;
  const int P = set.cardinality();
  for (int a = 0; a < P; ++a) {
    for (int b = 0; b < P; ++b) {
      const int lag = set.indices[a] - set.indices[b];
      diffs.insert(lag);
      if (std::abs(lag) <= L)
        out.pairs_by_lag[lag + L].emplace_back(a, b);
      else
        out.noncontiguous[lag].emplace_back(a, b);
    }
  }
  out.full_difference_set.assign(diffs.begin(), diffs.end());
  return out;
}

const std::vector<std::pair<int, int>>& LagStructure::pairs_for(int lag) const {
  const int L = contiguous_bound;
  if (lag < -L || lag > L)
    throw DimensionMismatch("lag " + std::to_string(lag) + " outside contiguous segment");
  return pairs_by_lag[lag + L];
}

long long count_distinct_sums(int M, int N, int l_max, int p_max) {
  if (M < 1 || N < 1 || std::gcd(M, N) != 1)
    throw NonCoprime("count_distinct_sums requires co-prime positive (M,N)");
  if (l_max < 0 || p_max < 0) throw DimensionMismatch("negative grid bound");
  if (N >= l_max + 1 || M >= p_max + 1)
    return static_cast<long long>(l_max + 1) * (p_max + 1);
  return static_cast<long long>(l_max) * M + static_cast<long long>(p_max) * N + 1 -
         static_cast<long long>(M - 1) * (N - 1);
}

}  // namespace copulse::coprime
