#pragma once

// Metric coefficient family g^{ab}(u) restricted to the spherically
// symmetric class: g^{00} = -1, g^{0r} = b(u), g^{rr} = a2(u) + c(u),
// angular part a2(u). Each coefficient is a polynomial in u with
// a2(0) = 1, b(0) = c(0) = 0. Also the initial data container.

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "wavetail/common.hpp"
#include "wavetail/sphere.hpp"

namespace wavetail {

class Poly {
 public:
  Poly() : c_{0.0} {}
  explicit Poly(std::vector<double> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) c_.push_back(0.0);
  }
  static Poly constant(double v) { return Poly({v}); }

  double operator()(double u) const {
    double r = 0.0;
    for (std::size_t i = c_.size(); i-- > 0;) r = r * u + c_[i];
    return r;
  }
  double deriv_at0() const { return c_.size() > 1 ? c_[1] : 0.0; }
  double at0() const { return c_[0]; }
  const std::vector<double>& coeffs() const { return c_; }

 private:
  std::vector<double> c_;  // c_[k] multiplies u^k
};

struct MetricSpec {
  Poly a2 = Poly({1.0});  // coefficient of the delta^{ij} part
  Poly b = Poly({0.0});   // g^{0r}(u)
  Poly c = Poly({0.0});   // radial-radial correction

  static MetricSpec minkowski() { return MetricSpec{}; }

  // The well-studied family -d_t^2 + a(u)^2 Laplacian with a(u) = 1 + k u.
  static MetricSpec a_linear(double k) {
    return MetricSpec{Poly({1.0, 2.0 * k, k * k}), Poly({0.0}), Poly({0.0})};
  }

  void validate() const {
    if (std::abs(a2.at0() - 1.0) > 1e-14 || std::abs(b.at0()) > 1e-14 ||
        std::abs(c.at0()) > 1e-14)
      throw precondition_error("MetricSpec: g(0) must be Minkowski");
  }

  // Characteristic speeds of the radial operator at field value u.
  double discriminant(double u) const { return sq(b(u)) + a2(u) + c(u); }
  double speed_out(double u) const {
    const double d = discriminant(u);
    if (d <= 0.0) throw numerical_error("MetricSpec: hyperbolicity loss");
    return std::sqrt(d) - b(u);
  }
  double speed_in(double u) const {
    const double d = discriminant(u);
    if (d <= 0.0) throw numerical_error("MetricSpec: hyperbolicity loss");
    return std::sqrt(d) + b(u);
  }

  // d/du of G's quadratic form for this family is direction-independent.
  double g_constant() const {
    return a2.deriv_at0() - 2.0 * b.deriv_at0() + c.deriv_at0();
  }

  bool is_trivial() const {
    return a2.coeffs().size() <= 1 && b.coeffs().size() <= 1 &&
           c.coeffs().size() <= 1;
  }
};

inline sphere::GProfile compute_g(const MetricSpec& m,
                                  const sphere::SphereGrid& grid) {
  m.validate();
  return sphere::constant_g(grid, m.g_constant());
}

// Compactly supported radial data (u0, u1) on [0, R0], smooth at the axis.
struct InitialData {
  std::function<double(double)> u0;
  std::function<double(double)> u1;
  double r0 = 2.0;       // support radius
  double epsilon = 0.1;  // data amplitude

  double u0_at(double r) const { return r >= r0 ? 0.0 : (u0 ? u0(r) : 0.0); }
  double u1_at(double r) const { return r >= r0 ? 0.0 : (u1 ? u1(r) : 0.0); }

  // Smooth even bump exp(-1/(1 - (r/r0)^2)) scaled to peak amplitude `amp`,
  // identically zero for r >= r0. Even in r, so odd radial derivatives
  // vanish at the axis.
  static std::function<double(double)> bump(double r0, double amp) {
    return [r0, amp](double r) {
      const double x = r / r0;
      if (x >= 1.0) return 0.0;
      return amp * std::exp(1.0 - 1.0 / (1.0 - x * x));
    };
  }

  static InitialData gaussian_bump(double r0, double epsilon,
                                   double amp = 1.0) {
    InitialData d;
    d.r0 = r0;
    d.epsilon = epsilon;
    d.u0 = bump(r0, amp);
    d.u1 = [](double) { return 0.0; };
    return d;
  }
};

}  // namespace wavetail
