#pragma once

// Long-time evolution of the spherically symmetric reduction of
// g^{ab}(u) d^2_{ab} u = 0 on w = r*u:
//
//   w_tt = 2 b w_tr - (2b/r) w_t + (a2 + c) w_rr - (2c/r) w_r + (2c/r^2) w
//
// (all 1/r terms cancel when b = c = 0). Explicit leapfrog with frozen
// coefficients at the current level; predictor-corrector pass for the
// w_t terms when b != 0. Also a linear Cauchy solver per spherical mode,
// used by oracles, and self-convergence utilities.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "wavetail/common.hpp"
#include "wavetail/field1d.hpp"
#include "wavetail/fit.hpp"
#include "wavetail/interp.hpp"
#include "wavetail/metric.hpp"

namespace wavetail {

// View of one accepted time level, passed to observers during evolution.
struct StepView {
  std::size_t n = 0;     // level index
  double t = 0.0;
  double dr = 0.0, dt = 0.0;
  const std::vector<double>* w = nullptr;      // current level
  const std::vector<double>* w_prev = nullptr; // previous level
  std::size_t j_active = 0;                    // last updated index
  double epsilon = 0.0;

  double r_of(std::size_t j) const { return dr * double(j); }
  double w_at(double r) const {
    return interp_uniform(*w, 0.0, dr, std::min(r, dr * double(w->size() - 1)));
  }
  double u_at(double r) const {
    if (r > 2.0 * dr) return w_at(r) / r;
    const double w1 = (*w)[1], w2 = (*w)[2];
    const double c1 = (8.0 * w1 - w2) / (6.0 * dr);
    const double c3 = (w2 - 2.0 * w1) / (6.0 * cube(dr));
    return c1 + c3 * r * r;
  }
  double u_axis() const { return (4.0 * (*w)[1] - (*w)[2]) / (2.0 * dr); }
};

using StepObserver = std::function<void(const StepView&)>;

struct QnlwParams {
  MetricSpec metric;
  InitialData data;
  double t_max = 100.0;
  double dr = 0.02;
  double cfl = 0.5;
  double speed_margin = 0.25;  // dt set against speed_out(0) * (1 + margin)
  std::size_t store_every_t = 1;  // 0 disables field storage
  std::size_t store_every_r = 1;
  double r_pad = 10.0;  // extra grid beyond the domain of influence, in dr units
  // Kreiss-Oliger strength; damps the grid-scale dispersive wake that would
  // otherwise contaminate cross-fan differencing. O(dr^3) in the modified
  // equation, so second-order convergence is unaffected. 0 disables.
  double ko_sigma = 0.3;
};

struct QnlwDiagnostics {
  double max_abs_u = 0.0;
  double min_discriminant = 1e300;
  double max_speed_seen = 0.0;
  double cfl_margin = 0.0;          // max over run of speed*dt/dr
  double exterior_max_w = 0.0;      // max |w| beyond the light cone + margin
  bool hyperbolicity_warning = false;
  std::size_t steps = 0;
};

struct QnlwResult {
  SpacetimeField1D field;  // empty when store_every_t == 0
  QnlwDiagnostics diag;
};

namespace detail {

inline void check_nan(const std::vector<double>& w, std::size_t hi, double t) {
  for (std::size_t j = 0; j <= hi; ++j)
    if (!std::isfinite(w[j]))
      throw numerical_error("evolve_qnlw: NaN at t = " + std::to_string(t));
}

}  // namespace detail

inline QnlwResult evolve_qnlw(const QnlwParams& p,
                              const std::vector<StepObserver>& observers = {}) {
  p.metric.validate();
  const MetricSpec& m = p.metric;
  const double eps = p.data.epsilon;
  const double r0 = p.data.r0;
  const double lam0 = m.speed_out(0.0);
  const double lam_bound =
      std::max(m.speed_out(0.0), m.speed_in(0.0)) * (1.0 + p.speed_margin);
  const double dt = p.cfl * p.dr / (lam0 * (1.0 + p.speed_margin));
  const std::size_t nt = std::size_t(std::ceil(p.t_max / dt)) + 1;
  const double r_max = r0 + lam_bound * p.t_max + p.r_pad * p.dr;
  const std::size_t nr = std::size_t(std::ceil(r_max / p.dr)) + 1;
  const double dr = p.dr, dt2 = dt * dt, inv_dr2 = 1.0 / (dr * dr);

  const bool simple = (m.b.coeffs().size() <= 1 && m.c.coeffs().size() <= 1 &&
                       std::abs(m.b.at0()) < 1e-300 &&
                       std::abs(m.c.at0()) < 1e-300);

  std::vector<double> w_old(nr, 0.0), w_cur(nr, 0.0), w_new(nr, 0.0);
  std::vector<double> inv_r(nr, 0.0);
  for (std::size_t j = 1; j < nr; ++j) inv_r[j] = 1.0 / (dr * double(j));

  // t = 0 level: w = eps * r * u0.
  for (std::size_t j = 0; j < nr; ++j) {
    const double r = dr * double(j);
    w_old[j] = eps * r * p.data.u0_at(r);
  }

  QnlwDiagnostics diag;
  QnlwResult out;
  const std::size_t kt = std::max<std::size_t>(p.store_every_t, 1);
  const std::size_t kr = std::max<std::size_t>(p.store_every_r, 1);
  const bool store = p.store_every_t > 0;
  std::size_t nt_store = store ? (nt - 1) / kt + 1 : 0;
  std::size_t nr_store = store ? (nr - 1) / kr + 1 : 0;
  if (store) {
    out.field = SpacetimeField1D(0.0, dt * double(kt), nt_store,
                                 dr * double(kr), nr_store);
    out.field.meta.cfl = p.cfl;
    out.field.meta.scheme_order = 2;
  }

  auto active_j = [&](double t) {
    const double edge = r0 + lam_bound * t + 4.0 * dr;
    return std::min(nr - 2, std::size_t(std::ceil(edge / dr)));
  };

  // RHS of w_tt. wt may be null (then the b-terms use bw as backward estimate).
  auto rhs_at = [&](const std::vector<double>& w, const std::vector<double>* wt,
                    std::size_t j, double w_jm1, double u) {
    const double a2c = m.a2(u) + m.c(u);
    double acc = a2c * (w[j + 1] - 2.0 * w[j] + w_jm1) * inv_dr2;
    if (!simple) {
      const double bu = m.b(u), cu = m.c(u);
      const double wr = (w[j + 1] - w_jm1) / (2.0 * dr);
      acc += -2.0 * cu * inv_r[j] * wr + 2.0 * cu * inv_r[j] * inv_r[j] * w[j];
      if (wt) {
        const double wtr = j + 1 < wt->size() && j >= 1
                               ? ((*wt)[j + 1] - (*wt)[j - 1]) / (2.0 * dr)
                               : 0.0;
        acc += 2.0 * bu * (wtr - (*wt)[j] * inv_r[j]);
      }
    }
    return acc;
  };

  // First level by Taylor expansion: w(dt) = w(0) + dt w_t(0) + dt^2/2 w_tt(0).
  {
    std::vector<double> wt0(nr, 0.0);
    for (std::size_t j = 0; j < nr; ++j) {
      const double r = dr * double(j);
      wt0[j] = eps * r * p.data.u1_at(r);
    }
    const std::size_t hi = active_j(0.0);
    for (std::size_t j = 1; j <= hi; ++j) {
      const double u = w_old[j] * inv_r[j];
      w_cur[j] = w_old[j] + dt * wt0[j] +
                 0.5 * dt2 * rhs_at(w_old, &wt0, j, w_old[j - 1], u);
    }
    w_cur[0] = 0.0;
  }

  // Inline fast path coefficients for polynomial a2 of degree <= 2.
  const auto& a2c_ = m.a2.coeffs();
  const double a0 = a2c_.size() > 0 ? a2c_[0] : 1.0;
  const double a1 = a2c_.size() > 1 ? a2c_[1] : 0.0;
  const double a2q = a2c_.size() > 2 ? a2c_[2] : 0.0;
  const bool simple_quad = simple && a2c_.size() <= 3;

  const double ko = p.ko_sigma * dt / dr / 16.0;
  auto apply_ko = [&](const std::vector<double>& w, std::vector<double>& wn,
                      std::size_t hi) {
    if (ko == 0.0) return;
    for (std::size_t j = 2; j + 2 <= hi; ++j)
      wn[j] -= ko * (w[j - 2] - 4.0 * w[j - 1] + 6.0 * w[j] -
                     4.0 * w[j + 1] + w[j + 2]);
  };

  auto emit = [&](std::size_t n, double t, const std::vector<double>& w,
                  const std::vector<double>& wp, std::size_t hi) {
    if (store && n % kt == 0) {
      const std::size_t ns = n / kt;
      if (ns < nt_store)
        for (std::size_t js = 0; js < nr_store; ++js)
          out.field.at(ns, js) = w[js * kr];
    }
    if (!observers.empty()) {
      StepView v;
      v.n = n;
      v.t = t;
      v.dr = dr;
      v.dt = dt;
      v.w = &w;
      v.w_prev = &wp;
      v.j_active = hi;
      v.epsilon = eps;
      for (const auto& ob : observers) ob(v);
    }
  };

  emit(0, 0.0, w_old, w_old, active_j(0.0));
  emit(1, dt, w_cur, w_old, active_j(dt));

  std::vector<double> wt_est(simple ? 0 : nr, 0.0);
  double max_u_run = 0.0;

  for (std::size_t n = 1; n + 1 < nt; ++n) {
    const double t = dt * double(n);
    const std::size_t hi = active_j(t);
    if (simple_quad) {
      const double* w = w_cur.data();
      const double* wo = w_old.data();
      double* wn = w_new.data();
      const double* ir = inv_r.data();
      for (std::size_t j = 1; j <= hi; ++j) {
        const double u = w[j] * ir[j];
        const double lap = (w[j + 1] - 2.0 * w[j] + w[j - 1]) * inv_dr2;
        wn[j] = 2.0 * w[j] - wo[j] + dt2 * (a0 + u * (a1 + a2q * u)) * lap;
      }
    } else {
      // Predictor with backward-difference w_t, then centered corrector.
      for (std::size_t j = 1; j <= hi; ++j)
        wt_est[j] = (w_cur[j] - w_old[j]) / dt;
      wt_est[0] = 0.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 1; j <= hi; ++j) {
          const double u = w_cur[j] * inv_r[j];
          w_new[j] = 2.0 * w_cur[j] - w_old[j] +
                     dt2 * rhs_at(w_cur, &wt_est, j, w_cur[j - 1], u);
        }
        w_new[0] = 0.0;
        if (pass == 0)
          for (std::size_t j = 1; j <= hi; ++j)
            wt_est[j] = (w_new[j] - w_old[j]) / (2.0 * dt);
      }
    }
    apply_ko(w_cur, w_new, hi);
    w_new[0] = 0.0;
    for (std::size_t j = hi + 1; j < nr; ++j) w_new[j] = 0.0;

    std::swap(w_old, w_cur);
    std::swap(w_cur, w_new);
    const double tn = dt * double(n + 1);

    // Periodic health checks; cadence keeps the hot loop branch-free.
    if (n % 256 == 0 || n + 2 == nt) {
      detail::check_nan(w_cur, hi, tn);
      double mu = 0.0;
      for (std::size_t j = 1; j <= hi; ++j)
        mu = std::max(mu, std::abs(w_cur[j] * inv_r[j]));
      max_u_run = std::max(max_u_run, mu);
      const double disc = m.discriminant(mu) < m.discriminant(-mu)
                              ? m.discriminant(mu)
                              : m.discriminant(-mu);
      diag.min_discriminant = std::min(diag.min_discriminant, disc);
      const double sp = std::max(m.speed_out(mu), std::max(m.speed_in(mu),
                            std::max(m.speed_out(-mu), m.speed_in(-mu))));
      diag.max_speed_seen = std::max(diag.max_speed_seen, sp);
      if (m.a2(mu) + m.c(mu) <= 0.0 || m.a2(-mu) + m.c(-mu) <= 0.0)
        throw numerical_error("evolve_qnlw: hyperbolicity loss (a2+c <= 0)");
      if (m.a2(mu) + m.c(mu) <= sq(m.b(mu))) diag.hyperbolicity_warning = true;
      if (sp * dt / dr > 1.0)
        throw numerical_error("evolve_qnlw: CFL violated at runtime");
      diag.cfl_margin = std::max(diag.cfl_margin, sp * dt / dr);
    }
    emit(n + 1, tn, w_cur, w_old, hi);
    diag.steps = n + 1;
  }

  // Finite-speed-of-propagation diagnostic at the final level.
  {
    const double t_end = dt * double(nt - 1);
    const double edge = r0 + lam_bound * t_end;
    const std::size_t j_edge = std::min(nr, std::size_t(edge / dr) + 1);
    for (std::size_t j = j_edge; j < nr; ++j)
      diag.exterior_max_w = std::max(diag.exterior_max_w, std::abs(w_cur[j]));
  }
  diag.max_abs_u = max_u_run;
  out.diag = diag;
  return out;
}

// ---------------------------------------------------------------------------
// Linear Cauchy solver for one spherical-harmonic mode:
//   box_m phi = F  per mode:  w_tt = w_rr - l(l+1) w / r^2 - r F_l,
// where w = r phi_l. Axis ghost uses the parity of r^{l+1}.

struct LinearModeParams {
  std::size_t ell = 0;
  std::function<double(double)> phi0;  // initial phi
  std::function<double(double)> phi1;  // initial d_t phi
  std::function<double(double, double)> source;  // F(t, r), may be null
  double t_max = 20.0;
  double r_max = 40.0;
  double dr = 0.02;
  double cfl = 0.45;
};

struct LinearModeResult {
  SpacetimeField1D field;  // stores w = r phi
  double axis_regularity = 0.0;  // max |w(r1)| / expected tip scale, diagnostic
};

inline LinearModeResult evolve_linear_mode(const LinearModeParams& p) {
  const double dr = p.dr;
  const std::size_t nr = std::size_t(std::ceil(p.r_max / dr)) + 1;
  const double lcoef = double(p.ell * (p.ell + 1));
  // Stability cap includes the near-axis potential.
  const double dt = p.cfl * dr * 2.0 / std::sqrt(4.0 + lcoef);
  const std::size_t nt = std::size_t(std::ceil(p.t_max / dt)) + 1;
  const double dt2 = dt * dt, inv_dr2 = 1.0 / (dr * dr);

  std::vector<double> w_old(nr, 0.0), w_cur(nr, 0.0), w_new(nr, 0.0);
  std::vector<double> V(nr, 0.0);
  for (std::size_t j = 1; j < nr; ++j) V[j] = lcoef / sq(dr * double(j));

  LinearModeResult out;
  out.field = SpacetimeField1D(0.0, dt, nt, dr, nr);

  auto rhs = [&](const std::vector<double>& w, double t, std::size_t j) {
    double acc = (w[j + 1] - 2.0 * w[j] + w[j - 1]) * inv_dr2 - V[j] * w[j];
    if (p.source) acc -= dr * double(j) * p.source(t, dr * double(j));
    return acc;
  };

  for (std::size_t j = 0; j < nr; ++j) {
    const double r = dr * double(j);
    w_old[j] = p.phi0 ? r * p.phi0(r) : 0.0;
  }
  for (std::size_t j = 1; j + 1 < nr; ++j) {
    const double r = dr * double(j);
    const double wt0 = p.phi1 ? r * p.phi1(r) : 0.0;
    w_cur[j] = w_old[j] + dt * wt0 + 0.5 * dt2 * rhs(w_old, 0.0, j);
  }
  w_cur[0] = 0.0;
  for (std::size_t j = 0; j < nr; ++j) {
    out.field.at(0, j) = w_old[j];
    if (nt > 1) out.field.at(1, j) = w_cur[j];
  }

  for (std::size_t n = 1; n + 1 < nt; ++n) {
    const double t = dt * double(n);
    for (std::size_t j = 1; j + 1 < nr; ++j)
      w_new[j] = 2.0 * w_cur[j] - w_old[j] + dt2 * rhs(w_cur, t, j);
    w_new[0] = 0.0;
    w_new[nr - 1] = 0.0;
    std::swap(w_old, w_cur);
    std::swap(w_cur, w_new);
    for (std::size_t j = 0; j < nr; ++j) out.field.at(n + 1, j) = w_cur[j];
    if (n % 512 == 0) detail::check_nan(w_cur, nr - 1, t);
  }

  // Axis regularity monitor: w ~ r^{l+1} near the tip.
  double reg = 0.0;
  for (std::size_t n = 0; n < nt; ++n) {
    const double w1 = std::abs(out.field.at(n, 1));
    const double w2 = std::abs(out.field.at(n, 2));
    const double expect = w2 / std::pow(2.0, double(p.ell + 1));
    if (w2 > 1e-12) reg = std::max(reg, w1 / std::max(expect, 1e-300));
  }
  out.axis_regularity = reg;
  return out;
}

// ---------------------------------------------------------------------------
// Self-convergence: runs a sampler at nested resolutions and estimates the
// observed order from consecutive differences.

struct ConvergenceReport {
  std::vector<double> resolutions;
  std::vector<double> differences;  // max-norm between consecutive levels
  double observed_order = 0.0;
  bool conclusive = true;
};

inline ConvergenceReport convergence_study(
    const std::function<std::vector<double>(double)>& sample_at,
    const std::vector<double>& resolutions) {
  if (resolutions.size() < 3)
    throw precondition_error("convergence_study: need >= 3 resolutions");
  for (std::size_t i = 0; i + 1 < resolutions.size(); ++i) {
    const double ratio = resolutions[i] / resolutions[i + 1];
    if (std::abs(ratio - 2.0) > 1e-9)
      throw precondition_error(
          "convergence_study: resolutions must be factor-2 nested");
  }
  ConvergenceReport rep;
  rep.resolutions = resolutions;
  std::vector<std::vector<double>> samples;
  for (double h : resolutions) samples.push_back(sample_at(h));
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    if (samples[i].size() != samples[i + 1].size())
      throw precondition_error("convergence_study: sampler size mismatch");
    double d = 0.0;
    for (std::size_t k = 0; k < samples[i].size(); ++k)
      d = std::max(d, std::abs(samples[i][k] - samples[i + 1][k]));
    rep.differences.push_back(d);
  }
  double order_sum = 0.0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i + 1 < rep.differences.size(); ++i) {
    const auto est =
        order_from_differences(rep.differences[i], rep.differences[i + 1]);
    if (!est.conclusive) rep.conclusive = false;
    order_sum += est.order;
    ++cnt;
  }
  rep.observed_order = cnt ? order_sum / double(cnt) : 0.0;
  return rep;
}

}  // namespace wavetail
