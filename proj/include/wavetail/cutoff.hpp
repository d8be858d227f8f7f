#pragma once

// Smooth cutoff chi: chi == 0 on (-inf, 1/2], chi == 1 on [1, inf),
// built from the standard exp(-1/x) mollifier. chi_gt(y, s) = chi(s/y).

#include <cmath>

namespace wavetail {

namespace detail {
inline double bump_e(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
inline double bump_e_prime(double x) {
  return x > 0.0 ? std::exp(-1.0 / x) / (x * x) : 0.0;
}
}  // namespace detail

inline double chi(double x) {
  const double n = detail::bump_e(x - 0.5);
  if (n == 0.0) return 0.0;
  const double d = detail::bump_e(1.0 - x);
  if (d == 0.0) return 1.0;
  return n / (n + d);
}

inline double chi_prime(double x) {
  const double n = detail::bump_e(x - 0.5);
  const double d = detail::bump_e(1.0 - x);
  if (n == 0.0 || d == 0.0) return 0.0;
  const double np = detail::bump_e_prime(x - 0.5);
  const double dp = detail::bump_e_prime(1.0 - x);  // -d/dx of d
  const double s = n + d;
  return (np * d + n * dp) / (s * s);
}

inline double chi_gt(double y, double s) { return chi(s / y); }
inline double chi_gt_prime(double y, double s) { return chi_prime(s / y) / y; }

}  // namespace wavetail
