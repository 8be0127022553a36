#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "copulse/coprime.hpp"
#include "copulse/errors.hpp"

using namespace copulse;
using coprime::build_coprime_set;
using coprime::count_distinct_sums;
using coprime::lag_structure;

namespace {

std::vector<std::pair<int, int>> coprime_pairs(int max_m, int max_n) {
  std::vector<std::pair<int, int>> out;
  for (int m = 1; m <= max_m; ++m)
    for (int n = m + 1; n <= max_n; ++n)
      if (std::gcd(m, n) == 1) out.emplace_back(m, n);
  return out;
}

std::set<int> brute_sums(int M, int N, int l_max, int p_max) {
  std::set<int> vals;
  for (int l = 0; l <= l_max; ++l)
    for (int p = 0; p <= p_max; ++p) vals.insert(l * M + p * N);
  return vals;
}

}  // namespace

TEST_CASE("coprime set construction") {
  const auto s = build_coprime_set({2, 3});
  CHECK(s.indices == std::vector<int>{0, 2, 3, 4, 6, 9});
  CHECK(s.cardinality() == 6);

  const auto tiny = build_coprime_set({1, 2});
  CHECK(tiny.indices == std::vector<int>{0, 1, 2});
  CHECK(tiny.cardinality() == 3);

  const auto wide = build_coprime_set({3, 4});
  CHECK(wide.indices == std::vector<int>{0, 3, 4, 6, 8, 9, 12, 16, 20});
  CHECK(wide.cardinality() == 9);

  CHECK_THROWS_AS(build_coprime_set({2, 4}), NonCoprime);
  CHECK_THROWS_AS(build_coprime_set({3, 3}), NonCoprime);
  CHECK_THROWS_AS(build_coprime_set({3, 2}), BadOrder);
}

TEST_CASE("cardinality formula holds for a pair sweep") {
  for (const auto& [m, n] : coprime_pairs(5, 8)) {
    const auto s = build_coprime_set({m, n});
    CHECK(s.cardinality() == n + 2 * m - 1);
    CHECK(std::is_sorted(s.indices.begin(), s.indices.end()));
    CHECK(std::adjacent_find(s.indices.begin(), s.indices.end()) == s.indices.end());
  }
}

TEST_CASE("lag structure bounds and pair lists") {
  const auto s = build_coprime_set({2, 3});
  const auto lags = lag_structure(s);
  CHECK(lags.contiguous_bound == 7);
  CHECK(lag_structure(build_coprime_set({1, 2})).contiguous_bound == 2);

  // every contiguous lag reachable, and lag 0 uses all self pairs
  for (int lag = -lags.contiguous_bound; lag <= lags.contiguous_bound; ++lag) {
    const auto& pairs = lags.pairs_for(lag);
    CHECK(!pairs.empty());
    for (const auto& [a, b] : pairs) CHECK(s.indices[a] - s.indices[b] == lag);
  }
  CHECK(lags.pairs_for(0).size() == static_cast<std::size_t>(s.cardinality()));

  // lag 7 reachable as 9 - 2
  bool found = false;
  for (const auto& [a, b] : lags.pairs_for(7))
    if (s.indices[a] == 9 && s.indices[b] == 2) found = true;
  CHECK(found);

  CHECK_THROWS_AS(lags.pairs_for(lags.contiguous_bound + 1), DimensionMismatch);
}

TEST_CASE("difference set covers the contiguous segment for all pairs") {
  for (const auto& [m, n] : coprime_pairs(4, 6)) {
    const auto lags = lag_structure(build_coprime_set({m, n}));
    CHECK(lags.contiguous_bound == m * n + m - 1);
    for (int lag = -lags.contiguous_bound; lag <= lags.contiguous_bound; ++lag)
      CHECK(!lags.pairs_for(lag).empty());
  }
}

TEST_CASE("count_distinct_sums reference values") {
  CHECK(count_distinct_sums(1, 1, 7, 7) == 15);
  CHECK(count_distinct_sums(3, 4, 7, 7) == 44);
  CHECK(count_distinct_sums(4, 1, 2, 2) == 9);  // saturated 3x3 grid
  // (M-1)(N-1) = 0: no holes, full arithmetic count
  CHECK(count_distinct_sums(1, 2, 5, 3) == 5 * 1 + 3 * 2 + 1);
  CHECK_THROWS_AS(count_distinct_sums(2, 4, 5, 5), NonCoprime);
}

TEST_CASE("count_distinct_sums equals brute force oracle") {
  for (int m = 1; m <= 6; ++m)
    for (int n = 1; n <= 6; ++n) {
      if (std::gcd(m, n) != 1) continue;
      for (int l = 0; l <= 9; ++l)
        for (int p = 0; p <= 9; ++p)
          CHECK(count_distinct_sums(m, n, l, p) ==
                static_cast<long long>(brute_sums(m, n, l, p).size()));
    }
}

TEST_CASE("hole positions are symmetric about the midpoint") {
  for (const auto& [m, n] : coprime_pairs(5, 7)) {
    const int l_max = 9, p_max = 9;
    const auto vals = brute_sums(m, n, l_max, p_max);
    const int top = l_max * m + p_max * n;
    std::set<int> holes;
    for (int v = 0; v <= top; ++v)
      if (!vals.count(v)) holes.insert(v);
    for (int h : holes) CHECK(holes.count(top - h) == 1);
  }
}
