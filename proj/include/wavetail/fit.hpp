#pragma once

// Small least-squares helpers: straight lines, c0 + c1/t models,
// power-law slopes, and observed convergence order from grid triplets.

#include <cmath>
#include <cstddef>
#include <vector>

#include "wavetail/common.hpp"

namespace wavetail {

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double rms_residual = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x,
                        const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw precondition_error("fit_line: bad input");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = double(n) * sxx - sx * sx;
  LineFit f;
  if (det == 0.0) throw precondition_error("fit_line: degenerate abscissae");
  f.slope = (double(n) * sxy - sx * sy) / det;
  f.intercept = (sy * sxx - sx * sxy) / det;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i)
    ss += sq(y[i] - f.intercept - f.slope * x[i]);
  f.rms_residual = std::sqrt(ss / double(n));
  return f;
}

// Fits y(t) = c + a/t; returns the t->inf limit c and the fit residual.
struct LimitFit {
  double limit = 0.0;
  double coeff = 0.0;
  double rms_residual = 0.0;
};

inline LimitFit fit_limit_in_invt(const std::vector<double>& t,
                                  const std::vector<double>& y) {
  std::vector<double> x(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] <= 0) throw precondition_error("fit_limit_in_invt: t <= 0");
    x[i] = 1.0 / t[i];
  }
  if (t.size() == 1) return {y[0], 0.0, 0.0};
  const LineFit f = fit_line(x, y);
  return {f.intercept, f.slope, f.rms_residual};
}

// Quadratic Richardson: y(t) = c + a/t + b/t^2, solved by 3x3 normal
// equations on x = 1/t (falls back to the linear model for few samples).
inline LimitFit fit_limit_in_invt2(const std::vector<double>& t,
                                   const std::vector<double>& y) {
  const std::size_t n = t.size();
  if (n < 5) return fit_limit_in_invt(t, y);
  double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  double rhs[3] = {0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    if (t[i] <= 0) throw precondition_error("fit_limit_in_invt2: t <= 0");
    const double x = 1.0 / t[i];
    const double p[3] = {1.0, x, x * x};
    for (int a = 0; a < 3; ++a) {
      rhs[a] += p[a] * y[i];
      for (int b = 0; b < 3; ++b) m[a][b] += p[a] * p[b];
    }
  }
  // Gaussian elimination with partial pivoting on the 3x3 system.
  int piv[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int best = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[piv[r]][col]) > std::abs(m[piv[best]][col])) best = r;
    std::swap(piv[col], piv[best]);
    const double d = m[piv[col]][col];
    if (d == 0.0) return fit_limit_in_invt(t, y);
    for (int r = col + 1; r < 3; ++r) {
      const double f = m[piv[r]][col] / d;
      for (int c = col; c < 3; ++c) m[piv[r]][c] -= f * m[piv[col]][c];
      rhs[piv[r]] -= f * rhs[piv[col]];
    }
  }
  double sol[3];
  for (int col = 3; col-- > 0;) {
    double acc = rhs[piv[col]];
    for (int c = col + 1; c < 3; ++c) acc -= m[piv[col]][c] * sol[c];
    sol[col] = acc / m[piv[col]][col];
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 1.0 / t[i];
    ss += sq(y[i] - sol[0] - sol[1] * x - sol[2] * x * x);
  }
  return {sol[0], sol[1], std::sqrt(ss / double(n))};
}

// Log-log slope of |y| against x (decay/growth exponent). Zero-crossing
// samples are skipped; returns slope and rms residual in log space.
inline LineFit fit_power_law(const std::vector<double>& x,
                             const std::vector<double>& y,
                             double floor = 1e-300) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0 && std::abs(y[i]) > floor) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(std::abs(y[i])));
    }
  }
  if (lx.size() < 2) throw precondition_error("fit_power_law: too few samples");
  return fit_line(lx, ly);
}

// Observed order p from errors at h, h/2, h/4 (errors against a reference)
// or from solution differences on a nested triplet.
inline double observed_order(double e_coarse, double e_fine) {
  if (!(e_coarse > 0) || !(e_fine > 0))
    throw numerical_error("observed_order: nonpositive errors");
  return std::log2(e_coarse / e_fine);
}

struct OrderEstimate {
  double order = 0.0;
  bool conclusive = true;
};

// Triplet estimate from ||u_h - u_{h/2}|| and ||u_{h/2} - u_{h/4}||.
inline OrderEstimate order_from_differences(double d01, double d12) {
  OrderEstimate e;
  if (!(d01 > 0) || !(d12 > 0) || d12 >= d01) {
    e.conclusive = false;
    return e;
  }
  e.order = std::log2(d01 / d12);
  return e;
}

}  // namespace wavetail
