#pragma once

#include <cstdint>

namespace copulse {

// Exact reduced fraction. Used for the Doppler/space coupling ratio
// beta = 2 v_p T / d and the spacing ratio 2d/lambda_b, both of which feed
// integer-valued rank formulas and must not be carried as floating point.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Fraction&) const = default;
};

// Reduce n/d to lowest terms with positive denominator.
Fraction make_fraction(std::int64_t n, std::int64_t d);

// Continued-fraction rationalization of x. Throws BadScene when no convergent
// with denominator <= max_den matches x to within rel_tol.
Fraction rationalize(double x, std::int64_t max_den = 1 << 16, double rel_tol = 1e-9);

}  // namespace copulse
