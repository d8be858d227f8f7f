#pragma once

// w = r*u sampled on a uniform (t, r) grid, with bicubic point access.
// Row-major: level n holds w(t_n, r_j), j = 0..nr-1, t_n = t0 + n*dt.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "wavetail/common.hpp"
#include "wavetail/interp.hpp"

namespace wavetail {

class SpacetimeField1D {
 public:
  SpacetimeField1D() = default;
  SpacetimeField1D(double t0, double dt, std::size_t nt, double dr,
                   std::size_t nr)
      : t0_(t0), dt_(dt), dr_(dr), nt_(nt), nr_(nr), w_(nt * nr, 0.0) {}

  double t0() const { return t0_; }
  double dt() const { return dt_; }
  double dr() const { return dr_; }
  double t_max() const { return t0_ + dt_ * double(nt_ - 1); }
  double r_max() const { return dr_ * double(nr_ - 1); }
  std::size_t nt() const { return nt_; }
  std::size_t nr() const { return nr_; }

  double& at(std::size_t n, std::size_t j) { return w_[n * nr_ + j]; }
  double at(std::size_t n, std::size_t j) const { return w_[n * nr_ + j]; }
  const std::vector<double>& data() const { return w_; }
  std::vector<double>& data() { return w_; }

  struct Meta {
    double cfl = 0.0;
    int scheme_order = 2;
    std::string metric_desc, data_desc, run_id;
  };
  Meta meta;

  // Bicubic (4x4 Lagrange) sample of w; exact at nodes.
  double sample_w(double t, double r) const {
    const double s = (t - t0_) / dt_;
    const double x = r / dr_;
    if (s < -1e-9 || s > double(nt_ - 1) + 1e-9 || x < -1e-9 ||
        x > double(nr_ - 1) + 1e-9)
      throw precondition_error("SpacetimeField1D: sample outside grid");
    auto base = [](double v, std::size_t n) {
      std::ptrdiff_t i = std::ptrdiff_t(std::floor(v));
      return std::clamp<std::ptrdiff_t>(i - 1, 0, std::ptrdiff_t(n) - 4);
    };
    if (nt_ < 4 || nr_ < 4)
      throw precondition_error("SpacetimeField1D: grid too small to sample");
    const std::ptrdiff_t i0 = base(s, nt_), j0 = base(x, nr_);
    const double us = s - double(i0) - 1.0, ux = x - double(j0) - 1.0;
    double col[4];
    for (int a = 0; a < 4; ++a) {
      const double* row = &w_[(i0 + a) * nr_ + j0];
      col[a] = lagrange4(row[0], row[1], row[2], row[3], ux);
    }
    return lagrange4(col[0], col[1], col[2], col[3], us);
  }

  // u = w / r; at the axis u = d_r w (one-sided, second order).
  double sample_u(double t, double r) const {
    if (r > 2.0 * dr_) return sample_w(t, r) / r;
    // Near the axis, w/r loses digits; use the parity-odd expansion.
    const double w1 = sample_w(t, dr_), w2 = sample_w(t, 2.0 * dr_);
    const double c1 = (8.0 * w1 - w2) / (6.0 * dr_);
    const double c3 = (w2 - 2.0 * w1) / (6.0 * cube(dr_));
    return c1 + c3 * r * r;  // w = c1 r + c3 r^3 (odd in r)
  }

 private:
  double t0_ = 0.0, dt_ = 0.0, dr_ = 0.0;
  std::size_t nt_ = 0, nr_ = 0;
  std::vector<double> w_;
};

}  // namespace wavetail
