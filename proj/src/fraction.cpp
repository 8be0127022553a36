#include "copulse/fraction.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "copulse/errors.hpp"

namespace copulse {

Fraction make_fraction(std::int64_t n, std::int64_t d) {
  if (d == 0) throw BadScene("fraction with zero denominator");
  if (d < 0) { n = -n; d = -d; }
  const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
  return Fraction{g ? n / g : n, g ? d / g : d};
}

Fraction rationalize(double x, std::int64_t max_den, double rel_tol) {
  if (!std::isfinite(x)) throw BadScene("cannot rationalize non-finite value");
  const double scale = std::max(std::abs(x), 1.0);
  // continued-fraction convergents p/q of x
  std::int64_t p0 = 1, q0 = 0;  // h_{-1}
  std::int64_t p1 = 0, q1 = 1;  // h_{-2} ordering swapped below
  double frac = x;
  std::int64_t pp = 0, qq = 1;
  for (int it = 0; it < 64; ++it) {
    const double fa = std::floor(frac);
    const auto a = static_cast<std::int64_t>(fa);
    pp = a * p0 + p1;
    qq = a * q0 + q1;
    if (qq > max_den) break;
    if (std::abs(x - static_cast<double>(pp) / static_cast<double>(qq)) <= rel_tol * scale)
      return make_fraction(pp, qq);
    p1 = p0; q1 = q0; p0 = pp; q0 = qq;
    const double rem = frac - fa;
    if (rem < 1e-15) break;
    frac = 1.0 / rem;
  }
  throw BadScene("value " + std::to_string(x) +
                 " is not representable as a small reduced fraction");
}

}  // namespace copulse
