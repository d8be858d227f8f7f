#pragma once

// Shared small utilities: constants, error types, index helpers.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavetail {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kFourPi = 4.0 * kPi;

// Thrown when an operation's preconditions are violated (bad degree,
// out-of-range query, invalid profile, ...). CLI maps this to exit code 2.
struct precondition_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown on numerical failure during a run (CFL violation, hyperbolicity
// loss, caustic, NaN). CLI maps this to exit code 3.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double sq(double x) { return x * x; }
inline double cube(double x) { return x * x * x; }

// Japanese bracket <x> = sqrt(1 + x^2).
inline double jbrk(double x) { return std::sqrt(1.0 + x * x); }

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n < 2) throw precondition_error("linspace: need n >= 2");
  std::vector<double> x(n);
  const double h = (b - a) / double(n - 1);
  for (std::size_t i = 0; i < n; ++i) x[i] = a + h * double(i);
  x.back() = b;
  return x;
}

// Logarithmically spaced grid on [a, b], a > 0.
inline std::vector<double> logspace(double a, double b, std::size_t n) {
  if (a <= 0.0 || b <= a) throw precondition_error("logspace: need 0 < a < b");
  std::vector<double> x = linspace(std::log(a), std::log(b), n);
  for (auto& v : x) v = std::exp(v);
  return x;
}

inline bool finite_all(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace wavetail
