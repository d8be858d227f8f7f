#pragma once

// Quadrature: adaptive Gauss-Kronrod (7-15) for callables, piecewise
// Gauss-Legendre over sampled grids, and cumulative trapezoid/Simpson.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "wavetail/common.hpp"

namespace wavetail {

namespace gk {
// Standard Gauss-Kronrod 15-point nodes/weights on [-1,1] (symmetric half).
inline constexpr double xk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
inline constexpr double wk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};
}  // namespace gk

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evals = 0;
  bool converged = true;
};

namespace detail {

template <class F>
inline void gk15(const F& f, double a, double b, double* val, double* err) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double resk = 0.0, resg = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double x = gk::xk[i] * h;
    const double f1 = f(c - x);
    const double f2 = (i == 7) ? f1 : f(c + x);
    const double fs = (i == 7) ? f1 : (f1 + f2);
    resk += gk::wk[i] * fs;
    if (i % 2 == 1) resg += gk::wg[i / 2] * fs;
  }
  *val = resk * h;
  *err = std::abs((resk - resg) * h);
}

template <class F>
inline void adapt(const F& f, double a, double b, double tol, int depth,
                  QuadResult* out) {
  double v, e;
  gk15(f, a, b, &v, &e);
  out->evals += 15;
  const double floor_tol = 5e-16 * (1.0 + std::abs(v));
  const bool budget_out = out->evals > 3'000'000;
  if (e <= std::max(tol, floor_tol) || depth >= 24 || budget_out ||
      b - a < 1e-14 * (std::abs(a) + 1.0)) {
    out->value += v;
    out->error += e;
    if (e > std::max(tol, floor_tol) && (depth >= 24 || budget_out))
      out->converged = false;
    return;
  }
  const double m = 0.5 * (a + b);
  adapt(f, a, m, 0.5 * tol, depth + 1, out);
  adapt(f, m, b, 0.5 * tol, depth + 1, out);
}

}  // namespace detail

template <class F>
inline QuadResult integrate(const F& f, double a, double b,
                            double abstol = 1e-12) {
  QuadResult r;
  if (a == b) return r;
  if (a > b) {
    r = integrate(f, b, a, abstol);
    r.value = -r.value;
    return r;
  }
  detail::adapt(f, a, b, abstol, 0, &r);
  return r;
}

// Integral over [a, infinity) via x = a + y/(1-y), y in [0,1).
template <class F>
inline QuadResult integrate_to_inf(const F& f, double a,
                                   double abstol = 1e-12) {
  auto g = [&](double y) {
    const double om = 1.0 - y;
    const double x = a + y / om;
    return f(x) / (om * om);
  };
  return integrate(g, 0.0, 1.0 - 1e-12, abstol);
}

// Cumulative trapezoid of samples y on grid x; out[0] = 0.
inline std::vector<double> cumtrapz(const std::vector<double>& x,
                                    const std::vector<double>& y) {
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return out;
}

// Composite 5-point Gauss-Legendre of a callable over each cell of a grid.
template <class F>
inline double grid_quad(const F& f, const std::vector<double>& x) {
  static const double gx[5] = {-0.906179845938664, -0.538469310105683, 0.0,
                               0.538469310105683, 0.906179845938664};
  static const double gw[5] = {0.236926885056189, 0.478628670499366,
                               0.568888888888889, 0.478628670499366,
                               0.236926885056189};
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double c = 0.5 * (x[i] + x[i + 1]), h = 0.5 * (x[i + 1] - x[i]);
    double s = 0.0;
    for (int k = 0; k < 5; ++k) s += gw[k] * f(c + h * gx[k]);
    total += s * h;
  }
  return total;
}

}  // namespace wavetail
