#pragma once

// Interpolation: 4-point Lagrange cubic on uniform grids (exact at nodes,
// reproduces cubics, O(h^4)), bicubic tensor product, and monotone cubic
// Hermite (PCHIP) on nonuniform grids.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "wavetail/common.hpp"

namespace wavetail {

// Lagrange cubic through 4 consecutive uniform samples. u in [0,1] measures
// position between sample 1 and sample 2 of the window.
inline double lagrange4(double f0, double f1, double f2, double f3, double u) {
  const double um1 = u + 1.0, us1 = u - 1.0, us2 = u - 2.0;
  return -f0 * u * us1 * us2 / 6.0 + f1 * um1 * us1 * us2 / 2.0 -
         f2 * um1 * u * us2 / 2.0 + f3 * um1 * u * us1 / 6.0;
}

// Cubic interpolation of uniformly sampled data at x (grid x0 + i*dx).
// Near the ends the 4-point window is shifted (one-sided, still cubic).
inline double interp_uniform(const std::vector<double>& f, double x0,
                             double dx, double x) {
  const std::size_t n = f.size();
  if (n < 4) throw precondition_error("interp_uniform: need >= 4 samples");
  double s = (x - x0) / dx;
  const double smax = double(n - 1);
  if (s < -1e-9 || s > smax + 1e-9)
    throw precondition_error("interp_uniform: query outside grid");
  s = std::clamp(s, 0.0, smax);
  std::ptrdiff_t i = std::ptrdiff_t(std::floor(s));
  i = std::clamp<std::ptrdiff_t>(i - 1, 0, std::ptrdiff_t(n) - 4);
  const double u = s - double(i) - 1.0;
  return lagrange4(f[i], f[i + 1], f[i + 2], f[i + 3], u);
}

// Monotone cubic Hermite (Fritsch-Carlson) on a strictly increasing grid.
class Pchip {
 public:
  Pchip() = default;
  Pchip(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || n != y_.size()) throw precondition_error("Pchip: bad sizes");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1]))
        throw precondition_error("Pchip: grid not strictly increasing");
    m_.assign(n, 0.0);
    std::vector<double> d(n - 1), h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      d[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    if (n == 2) {
      m_[0] = m_[1] = d[0];
    } else {
      m_[0] = edge_slope(h[0], h[1], d[0], d[1]);
      m_[n - 1] = edge_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
      for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] == 0.0 || d[i] == 0.0 || (d[i - 1] > 0) != (d[i] > 0)) {
          m_[i] = 0.0;
        } else {
          const double w1 = 2.0 * h[i] + h[i - 1];
          const double w2 = h[i] + 2.0 * h[i - 1];
          m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
      }
    }
  }

  double operator()(double x) const {
    const std::size_t i = cell(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return y_[i] * (2 * t3 - 3 * t2 + 1) + h * m_[i] * (t3 - 2 * t2 + t) +
           y_[i + 1] * (-2 * t3 + 3 * t2) + h * m_[i + 1] * (t3 - t2);
  }

  double derivative(double x) const {
    const std::size_t i = cell(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t;
    return (y_[i] * (6 * t2 - 6 * t) + h * m_[i] * (3 * t2 - 4 * t + 1) +
            y_[i + 1] * (-6 * t2 + 6 * t) + h * m_[i + 1] * (3 * t2 - 2 * t)) /
           h;
  }

  double xmin() const { return x_.front(); }
  double xmax() const { return x_.back(); }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }

 private:
  static double edge_slope(double h0, double h1, double d0, double d1) {
    double m = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m * d0 <= 0)
      m = 0.0;
    else if (d0 * d1 < 0 && std::abs(m) > 3 * std::abs(d0))
      m = 3 * d0;
    return m;
  }
  std::size_t cell(double x) const {
    if (x < x_.front() - 1e-12 * (1 + std::abs(x_.front())) ||
        x > x_.back() + 1e-12 * (1 + std::abs(x_.back())))
      throw precondition_error("Pchip: query outside grid");
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::ptrdiff_t i = std::distance(x_.begin(), it) - 1;
    return std::size_t(std::clamp<std::ptrdiff_t>(
        i, 0, std::ptrdiff_t(x_.size()) - 2));
  }
  std::vector<double> x_, y_, m_;
};

// Natural cubic spline (C^2) on a strictly increasing grid; preferred for
// smooth data chains that get differentiated downstream.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 3 || n != y_.size())
      throw precondition_error("CubicSpline: bad sizes");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1]))
        throw precondition_error("CubicSpline: grid not increasing");
    m_.assign(n, 0.0);
    std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
    b[0] = 1.0;
    b[n - 1] = 1.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
      a[i] = h0 / 6.0;
      b[i] = (h0 + h1) / 3.0;
      c[i] = h1 / 6.0;
      d[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
    }
    // Thomas algorithm
    for (std::size_t i = 1; i < n; ++i) {
      const double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      d[i] -= w * d[i - 1];
    }
    m_[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
      m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
  }

  double operator()(double x) const {
    const std::size_t i = cell(x);
    const double h = x_[i + 1] - x_[i];
    const double A = (x_[i + 1] - x) / h, B = (x - x_[i]) / h;
    return A * y_[i] + B * y_[i + 1] +
           ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h /
               6.0;
  }

  double xmin() const { return x_.front(); }
  double xmax() const { return x_.back(); }

 private:
  std::size_t cell(double x) const {
    if (x < x_.front() - 1e-9 * (1 + std::abs(x_.front())) ||
        x > x_.back() + 1e-9 * (1 + std::abs(x_.back())))
      throw precondition_error("CubicSpline: query outside grid");
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::ptrdiff_t i = std::distance(x_.begin(), it) - 1;
    return std::size_t(
        std::clamp<std::ptrdiff_t>(i, 0, std::ptrdiff_t(x_.size()) - 2));
  }
  std::vector<double> x_, y_, m_;
};

// Local cubic Lagrange on a nonuniform strictly increasing grid.
inline double interp_grid(const std::vector<double>& x,
                          const std::vector<double>& y, double xi) {
  const std::size_t n = x.size();
  if (n < 2) throw precondition_error("interp_grid: need >= 2 samples");
  if (n < 4) {  // linear fallback for tiny grids
    const std::size_t i = (xi >= x[n - 2]) ? n - 2 : 0;
    const double t = (xi - x[i]) / (x[i + 1] - x[i]);
    return y[i] * (1 - t) + y[i + 1] * t;
  }
  auto it = std::upper_bound(x.begin(), x.end(), xi);
  std::ptrdiff_t i = std::distance(x.begin(), it) - 1;
  i = std::clamp<std::ptrdiff_t>(i - 1, 0, std::ptrdiff_t(n) - 4);
  double r = 0.0;
  for (int a = 0; a < 4; ++a) {
    double l = 1.0;
    for (int b = 0; b < 4; ++b)
      if (b != a) l *= (xi - x[i + b]) / (x[i + a] - x[i + b]);
    r += l * y[i + a];
  }
  return r;
}

}  // namespace wavetail
