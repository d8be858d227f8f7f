#pragma once

// Optical function by the method of characteristics. Outgoing curves
// dr/dt = sqrt(b^2 + a2 + c) - b carry a constant label q assigned on the
// boundary of Omega = {t > t_start, r > (t + t_start)/2 + 2 R0} where
// q = r - t. Cross-fan differencing yields q_r, then
// mu = q_t - q_r = -(1 + lambda_+) q_r and U = r u / eps, resampled on an
// (s, q) grid with s = eps ln t - delta, delta = eps ln t_start.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wavetail/common.hpp"
#include "wavetail/field1d.hpp"
#include "wavetail/fit.hpp"
#include "wavetail/interp.hpp"
#include "wavetail/metric.hpp"
#include "wavetail/qnlw.hpp"
#include "wavetail/reduced.hpp"

namespace wavetail::eikonal {

struct RegionSpec {
  double t_start = 50.0;
  double inner_slope = 0.5;  // cone boundary r = slope (t + t_start) + 2 R0
  double r0 = 2.0;

  // Entry point of the label-q characteristic on the boundary of Omega.
  double entry_time(double q) const {
    if (q >= 2.0 * r0) return t_start;
    return t_start + 2.0 * (2.0 * r0 - q);
  }
};

// Characteristic fan samples. Rows are sample times; columns are curves
// ordered by increasing label. Inactive (not yet entered) entries are NaN.
struct OpticalFunction {
  RegionSpec region;
  double delta = 0.0;
  double epsilon = 0.1;
  std::vector<double> q_label;            // increasing
  std::vector<double> t_row;              // sample times, increasing
  std::vector<double> r, u, w;            // [row * nq + k]
  std::vector<std::size_t> first_row;     // first active row per curve

  std::size_t nq() const { return q_label.size(); }
  std::size_t rows() const { return t_row.size(); }
  std::size_t idx(std::size_t row, std::size_t k) const {
    return row * nq() + k;
  }

  // Label ordering must be preserved across the fan (no caustics).
  void check_ordering() const {
    for (std::size_t row = 0; row < rows(); ++row)
      for (std::size_t k = 0; k + 1 < nq(); ++k) {
        const double a = r[idx(row, k)], b = r[idx(row, k + 1)];
        if (std::isnan(a) || std::isnan(b)) continue;
        if (!(a < b))
          throw numerical_error(
              "eikonal: characteristic crossing (caustic) at t = " +
              std::to_string(t_row[row]));
      }
  }
};

// Sample times t_m = t_start exp(s_m / eps), uniform in s up to t_end.
inline std::vector<double> fan_sample_times(double t_start, double t_end,
                                            double epsilon, std::size_t n) {
  if (t_end <= t_start)
    throw precondition_error("fan_sample_times: t_end <= t_start");
  std::vector<double> s = linspace(0.0, epsilon * std::log(t_end / t_start), n);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = t_start * std::exp(s[i] / epsilon);
  return t;
}

// ---------------------------------------------------------------------------
// Offline eikonal solve on a stored field.

struct EikonalParams {
  double t_start = 50.0;
  double r0 = 2.0;
  double epsilon = 0.1;
  std::vector<double> q_label;     // target labels (increasing)
  std::size_t n_s_samples = 25;
  double h_sub = 0.2;              // ODE substep
};

template <class Field>
inline OpticalFunction solve_eikonal(const Field& field,
                                     const MetricSpec& metric,
                                     const EikonalParams& par) {
  OpticalFunction opt;
  opt.region = RegionSpec{par.t_start, 0.5, par.r0};
  opt.epsilon = par.epsilon;
  opt.delta = par.epsilon * std::log(par.t_start);
  opt.q_label = par.q_label;
  opt.t_row = fan_sample_times(par.t_start, field.t_max(), par.epsilon,
                               par.n_s_samples);
  const std::size_t nq = opt.nq(), nr = opt.rows();
  opt.r.assign(nq * nr, std::nan(""));
  opt.u.assign(nq * nr, std::nan(""));
  opt.w.assign(nq * nr, std::nan(""));
  opt.first_row.assign(nq, nr);

  auto speed = [&](double t, double r) {
    return metric.speed_out(field.sample_u(t, r));
  };

  for (std::size_t k = 0; k < nq; ++k) {
    const double q = opt.q_label[k];
    double t = opt.region.entry_time(q);
    if (t >= field.t_max()) continue;
    double r = t + q;
    for (std::size_t row = 0; row < nr; ++row) {
      const double t_target = opt.t_row[row];
      if (t_target < t) continue;
      while (t < t_target - 1e-12) {
        const double h = std::min(par.h_sub, t_target - t);
        const double k1 = speed(t, r);
        const double k2 = speed(t + 0.5 * h, r + 0.5 * h * k1);
        const double k3 = speed(t + 0.5 * h, r + 0.5 * h * k2);
        const double k4 = speed(t + h, r + h * k3);
        r += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        t += h;
      }
      if (opt.first_row[k] == nr) opt.first_row[k] = row;
      opt.r[opt.idx(row, k)] = r;
      opt.u[opt.idx(row, k)] = field.sample_u(t, r);
      opt.w[opt.idx(row, k)] = field.sample_w(t, r);
    }
  }
  opt.check_ordering();
  return opt;
}

// ---------------------------------------------------------------------------
// Co-evolving fan: advances curves one solver step at a time from the live
// levels (Heun in time, cubic interpolation in r) and records rows at the
// requested sample times. For use as an evolve_qnlw observer.

class FanObserver {
 public:
  FanObserver(const MetricSpec& metric, RegionSpec region, double epsilon,
              std::vector<double> q_label, std::vector<double> sample_times)
      : metric_(metric) {
    opt_.region = region;
    opt_.epsilon = epsilon;
    opt_.delta = epsilon * std::log(region.t_start);
    opt_.q_label = std::move(q_label);
    opt_.t_row = std::move(sample_times);
    const std::size_t n = opt_.nq() * opt_.rows();
    opt_.r.assign(n, std::nan(""));
    opt_.u.assign(n, std::nan(""));
    opt_.w.assign(n, std::nan(""));
    opt_.first_row.assign(opt_.nq(), opt_.rows());
    pos_.assign(opt_.nq(), 0.0);
    active_.assign(opt_.nq(), false);
    next_row_.assign(opt_.nq(), 0);
  }

  void operator()(const StepView& v) {
    const double t0 = v.t - v.dt, t1 = v.t;
    dr_ = v.dr;
    if (v.n == 0) {
      prev_ = *v.w;
      return;
    }
    for (std::size_t k = 0; k < opt_.nq(); ++k) {
      const double q = opt_.q_label[k];
      const double te = opt_.region.entry_time(q);
      if (!active_[k]) {
        if (t1 >= te) {
          active_[k] = true;
          // place on the boundary and advance the fractional step
          pos_[k] = te + q;
          advance(prev_, *v.w, t0, t1, std::max(te, t0), t1, k);
          // rows targeted before entry stay unrecorded
          while (next_row_[k] < opt_.rows() && opt_.t_row[next_row_[k]] < te)
            ++next_row_[k];
        }
      } else {
        advance(prev_, *v.w, t0, t1, t0, t1, k);
      }
      if (active_[k]) record(v, k, t1);
    }
    prev_ = *v.w;
  }

  // Call once after the evolution completes.
  OpticalFunction finalize() {
    for (auto& [row, t] : row_time_) opt_.t_row[row] = t;
    opt_.check_ordering();
    return opt_;
  }

  const OpticalFunction& optical() const { return opt_; }

 private:
  static double u_of(const std::vector<double>& w, double dr, double r) {
    const double rmax = dr * double(w.size() - 1);
    const double rc = std::clamp(r, 0.0, rmax);
    if (rc > 2.0 * dr) return interp_uniform(w, 0.0, dr, rc) / rc;
    const double c1 = (8.0 * w[1] - w[2]) / (6.0 * dr);
    const double c3 = (w[2] - 2.0 * w[1]) / (6.0 * cube(dr));
    return c1 + c3 * rc * rc;
  }

  void advance(const std::vector<double>& w0, const std::vector<double>& w1,
               double t0, double t1, double from, double to, std::size_t k) {
    // Heun step with linear-in-time field interpolation between levels.
    const double h = to - from;
    if (h <= 0.0) return;
    const double dr = dr_;
    auto u_at = [&](double t, double r) {
      const double th = (t - t0) / (t1 - t0);
      return (1.0 - th) * u_of(w0, dr, r) + th * u_of(w1, dr, r);
    };
    double r = pos_[k];
    const double k1 = metric_.speed_out(u_at(from, r));
    const double k2 = metric_.speed_out(u_at(to, r + h * k1));
    pos_[k] = r + 0.5 * h * (k1 + k2);
  }

  void record(const StepView& v, std::size_t k, double t1) {
    while (next_row_[k] < opt_.rows() && opt_.t_row[next_row_[k]] <= t1) {
      const std::size_t row = next_row_[k];
      // adopt the actual step time for the whole row (shared cadence)
      row_time_[row] = t1;
      if (opt_.first_row[k] == opt_.rows()) opt_.first_row[k] = row;
      const double r = pos_[k];
      opt_.r[opt_.idx(row, k)] = r;
      const double rmax = v.dr * double(v.w->size() - 1);
      const double rc = std::clamp(r, 0.0, rmax);
      opt_.w[opt_.idx(row, k)] = interp_uniform(*v.w, 0.0, v.dr, rc);
      opt_.u[opt_.idx(row, k)] = u_of(*v.w, v.dr, rc);
      ++next_row_[k];
    }
  }


  MetricSpec metric_;
  OpticalFunction opt_;
  std::vector<double> pos_;
  std::vector<bool> active_;
  std::vector<std::size_t> next_row_;
  std::vector<double> prev_;
  std::map<std::size_t, double> row_time_;
  double dr_ = 0.0;
};

// ---------------------------------------------------------------------------
// (mu, U) on the (s, q) grid.

struct MuU {
  std::vector<double> s_grid;   // per row
  std::vector<double> t_grid;   // per row
  std::vector<double> q_grid;   // interior labels
  std::vector<double> mu, U, Uq;  // [row * nq + k], NaN when inactive
  double epsilon = 0.1;
  double delta = 0.0;
  std::size_t nq() const { return q_grid.size(); }
  std::size_t idx(std::size_t row, std::size_t k) const {
    return row * nq() + k;
  }
};

inline MuU compute_mu_u(const OpticalFunction& opt, const MetricSpec& metric) {
  if (opt.nq() < 3)
    throw precondition_error("compute_mu_u: need at least 3 curves");
  MuU m;
  m.epsilon = opt.epsilon;
  m.delta = opt.delta;
  m.t_grid = opt.t_row;
  m.s_grid.resize(opt.rows());
  for (std::size_t row = 0; row < opt.rows(); ++row)
    m.s_grid[row] = opt.epsilon * std::log(opt.t_row[row]) - opt.delta;
  // interior labels only (cross-fan differences need both neighbors)
  m.q_grid.assign(opt.q_label.begin() + 1, opt.q_label.end() - 1);
  m.mu.assign(opt.rows() * m.nq(), std::nan(""));
  m.U.assign(opt.rows() * m.nq(), std::nan(""));
  m.Uq.assign(opt.rows() * m.nq(), std::nan(""));
  for (std::size_t row = 0; row < opt.rows(); ++row)
    for (std::size_t k = 1; k + 1 < opt.nq(); ++k) {
      const double rm = opt.r[opt.idx(row, k - 1)];
      const double rp = opt.r[opt.idx(row, k + 1)];
      const double r0 = opt.r[opt.idx(row, k)];
      if (std::isnan(rm) || std::isnan(rp) || std::isnan(r0)) continue;
      const double dq = opt.q_label[k + 1] - opt.q_label[k - 1];
      const double q_r = dq / (rp - rm);
      const double lam = metric.speed_out(opt.u[opt.idx(row, k)]);
      const double Um = opt.w[opt.idx(row, k - 1)] / opt.epsilon;
      const double Up = opt.w[opt.idx(row, k + 1)] / opt.epsilon;
      m.mu[m.idx(row, k - 1)] = -(1.0 + lam) * q_r;
      m.U[m.idx(row, k - 1)] = opt.w[opt.idx(row, k)] / opt.epsilon;
      m.Uq[m.idx(row, k - 1)] = (Up - Um) / dq;
    }
  return m;
}

// ---------------------------------------------------------------------------
// Limits A, A1, A2 by fitting the reduced-system forms with a 1/t
// Richardson correction over the trailing fit window.

struct LimitProfiles {
  reduced::RadiationProfile A, A1, A2;
  double fit_s_lo = 0.0, fit_s_hi = 0.0;
  double max_rms_residual = 0.0;     // worst single-q fit rms (diagnostic)
  double median_rms_residual = 0.0;  // reported extraction quality
  bool unreliable = false;
  double epsilon = 0.1;
  double delta = 0.0;
};

struct ExtractParams {
  // Fit window: rows with t >= t_window_fraction * t_end. A time-based
  // window keeps different-gauge runs on the same field comparable.
  double t_window_fraction = 0.15;
  double residual_threshold = 5e-2;
  double r0 = 2.0;
  int richardson_order = 1;       // 1: c + a/t, 2: c + a/t + b/t^2
};

inline LimitProfiles extract_limits(const MuU& m, const reduced::GFn& g,
                                    const ExtractParams& par = {}) {
  LimitProfiles out;
  out.epsilon = m.epsilon;
  out.delta = m.delta;
  const std::size_t nq = m.nq();
  std::vector<double> A(nq), A1(nq), A2(nq), all_rms;
  double worst = 0.0;
  const std::size_t rows = m.s_grid.size();
  const double t_lo = par.t_window_fraction * m.t_grid.back();
  out.fit_s_hi = m.s_grid.back();
  out.fit_s_lo = m.epsilon * std::log(std::max(t_lo, 1.0)) - m.delta;
  for (std::size_t k = 0; k < nq; ++k) {
    std::vector<double> ts, ss, p, mus, uqs;
    for (std::size_t row = 0; row < rows; ++row) {
      const double mu = m.mu[m.idx(row, k)];
      if (std::isnan(mu)) continue;
      if (m.t_grid[row] < t_lo) continue;
      ts.push_back(m.t_grid[row]);
      ss.push_back(m.s_grid[row]);
      p.push_back(mu * m.Uq[m.idx(row, k)]);
      mus.push_back(mu);
      uqs.push_back(m.Uq[m.idx(row, k)]);
    }
    if (ts.size() < 4) {
      out.unreliable = true;
      A[k] = ts.empty() ? 0.0 : -0.5 * p.back();
      A1[k] = ts.empty() ? -2.0 : mus.back();
      A2[k] = ts.empty() ? 0.0 : uqs.back();
      continue;
    }
    const auto pfit = par.richardson_order >= 2 ? fit_limit_in_invt2(ts, p)
                                                : fit_limit_in_invt(ts, p);
    A[k] = -0.5 * pfit.limit;
    const double gv = g(0);
    std::vector<double> y1(ts.size()), y2(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      y1[i] = mus[i] * std::exp(0.5 * gv * A[k] * ss[i]);
      y2[i] = uqs[i] * std::exp(-0.5 * gv * A[k] * ss[i]);
    }
    const auto f1 = par.richardson_order >= 2 ? fit_limit_in_invt2(ts, y1)
                                              : fit_limit_in_invt(ts, y1);
    const auto f2 = par.richardson_order >= 2 ? fit_limit_in_invt2(ts, y2)
                                              : fit_limit_in_invt(ts, y2);
    A1[k] = f1.limit;
    A2[k] = f2.limit;
    const double scale =
        std::max({std::abs(A1[k]), std::abs(A2[k]), std::abs(pfit.limit), 1e-12});
    const double rms = std::max({pfit.rms_residual, f1.rms_residual,
                                 f2.rms_residual}) / scale;
    worst = std::max(worst, rms);
    all_rms.push_back(rms);
  }
  out.max_rms_residual = worst;
  if (!all_rms.empty()) {
    std::nth_element(all_rms.begin(), all_rms.begin() + all_rms.size() / 2,
                     all_rms.end());
    out.median_rms_residual = all_rms[all_rms.size() / 2];
  }
  if (out.median_rms_residual > par.residual_threshold) out.unreliable = true;
  out.A = reduced::RadiationProfile::from_samples(reduced::ProfileKind::A,
                                                  m.q_grid, A, par.r0);
  out.A1 = reduced::RadiationProfile::from_samples(reduced::ProfileKind::A1,
                                                   m.q_grid, A1, par.r0);
  out.A2 = reduced::RadiationProfile::from_samples(reduced::ProfileKind::A2,
                                                   m.q_grid, A2, par.r0);
  out.A.fit_decay();
  out.A1.fit_decay();
  out.A2.fit_decay();
  return out;
}

// ---------------------------------------------------------------------------
// Reparametrization to the scattering data: F(q) = 2R0 - int_{2R0}^q 2/A1,
// Ahat(F(q)) = A(q). Samples of Ahat land on the image grid F(q_k), so no
// interpolation of A is involved.

struct Reparametrized {
  reduced::RadiationProfile ahat;
  std::vector<double> F;          // F at the input grid nodes
  double f_over_q_max = 1.0;      // max <F>/<q> and <q>/<F> monitor
  Pchip F_interp;                 // monotone interpolant q -> F

  double F_at(double q) const { return F_interp(q); }

  // Fhat = F^{-1}: exact inverse of the monotone interpolant
  // (bisection bracket + Newton polish).
  double Fhat_at(double x) const {
    const auto& qs = F_interp.x();
    if (x <= F.front()) return qs.front();
    if (x >= F.back()) return qs.back();
    double lo = qs.front(), hi = qs.back();
    for (int it = 0; it < 60 && hi - lo > 1e-14 * (1.0 + std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (F_interp(mid) < x)
        lo = mid;
      else
        hi = mid;
    }
    double q = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {
      const double d = F_interp.derivative(q);
      if (d <= 0.0) break;
      q = std::clamp(q - (F_interp(q) - x) / d, lo, hi);
    }
    return q;
  }
};

inline Reparametrized reparametrize(const LimitProfiles& lim, double r0) {
  const auto& qg = lim.A1.q;
  const std::size_t n = qg.size();
  for (std::size_t i = 0; i < n; ++i)
    if (lim.A1.value(i) >= 0.0)
      throw precondition_error("reparametrize: A1 must be negative");
  // Integrate F' = -2/A1 downward from q = 2R0 where F = 2R0. Between the
  // top grid node and 2R0 the profile takes its tail value -2, so F = q.
  auto a1fn = lim.A1.fn();
  std::vector<double> F(n);
  double upper_q = 2.0 * r0, upper_F = 2.0 * r0;
  std::vector<double> Fv(n);
  for (std::size_t i = n; i-- > 0;) {
    const double cell = integrate(
        [&](double p) { return -2.0 / a1fn(p); }, qg[i],
        upper_q, 1e-12).value;
    Fv[i] = upper_F - cell;
    upper_q = qg[i];
    upper_F = Fv[i];
  }
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(Fv[i] < Fv[i + 1]))
      throw numerical_error("reparametrize: F not strictly increasing");
  Reparametrized out;
  out.F = Fv;
  out.F_interp = Pchip(qg, Fv);
  std::vector<double> avals(n);
  for (std::size_t i = 0; i < n; ++i) avals[i] = lim.A.value(i);
  out.ahat = reduced::RadiationProfile::from_samples(
      reduced::ProfileKind::Ahat, Fv, avals, r0);
  out.ahat.fit_decay();
  double mon = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = jbrk(Fv[i]), b = jbrk(qg[i]);
    mon = std::max(mon, std::max(a / b, b / a));
  }
  out.f_over_q_max = mon;
  return out;
}

// ---------------------------------------------------------------------------
// Gauge comparison.

struct GaugeReport {
  double frkl_rel_discrepancy = 0.0;  // sup-norm of L difference / scale
  double composition_max_error = 0.0; // Qbar(Q(q)) - q on the overlap
  bool unreliable = false;
};

// L through both gauges via the (A, A1, J) form on a shared t-grid.
inline double frkl_gauge_discrepancy(const LimitProfiles& l1,
                                     const LimitProfiles& l2,
                                     const reduced::GFn& g,
                                     const std::vector<double>& t_grid) {
  reduced::FrkLParams p1, p2;
  p1.epsilon = l1.epsilon;
  p1.delta = l1.delta;
  p2.epsilon = l2.epsilon;
  p2.delta = l2.delta;
  auto L1 = reduced::frkl_from_a_a1(l1.A.fn(), l1.A1.fn(), g, t_grid, p1);
  auto L2 = reduced::frkl_from_a_a1(l2.A.fn(), l2.A1.fn(), g, t_grid, p2);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    num = std::max(num, std::abs(L1.value(i) - L2.value(i)));
    den = std::max(den, std::abs(L1.value(i)));
  }
  return den > 0.0 ? num / den : num;
}

// Q_infty: the late-time limit of gauge-2 labels along gauge-1 curves, with
// a 1/t Richardson correction over the trailing rows of gauge 1. Gauge-2
// curve radii are interpolated in time via per-curve offsets r - t.
inline Pchip q_infinity_map(const OpticalFunction& o1,
                            const OpticalFunction& o2,
                            std::size_t n_rows_fit = 6) {
  std::vector<Pchip> off2(o2.nq());
  std::vector<bool> have2(o2.nq(), false);
  for (std::size_t j = 0; j < o2.nq(); ++j) {
    std::vector<double> ts, os;
    for (std::size_t ri = 0; ri < o2.rows(); ++ri) {
      const double r2 = o2.r[o2.idx(ri, j)];
      if (std::isnan(r2)) continue;
      ts.push_back(o2.t_row[ri]);
      os.push_back(r2 - o2.t_row[ri]);
    }
    if (ts.size() >= 3) {
      off2[j] = Pchip(ts, os);
      have2[j] = true;
    }
  }
  std::vector<double> qs, vals;
  for (std::size_t k = 0; k < o1.nq(); ++k) {
    std::vector<double> ts, q2s;
    for (std::size_t ri = o1.rows() - std::min(n_rows_fit, o1.rows());
         ri < o1.rows(); ++ri) {
      const double r1 = o1.r[o1.idx(ri, k)];
      if (std::isnan(r1)) continue;
      const double tau = o1.t_row[ri];
      std::vector<double> r2row, q2row;
      for (std::size_t j = 0; j < o2.nq(); ++j) {
        if (!have2[j] || tau < off2[j].xmin() || tau > off2[j].xmax())
          continue;
        r2row.push_back(tau + off2[j](tau));
        q2row.push_back(o2.q_label[j]);
      }
      if (r2row.size() < 4) continue;
      if (r1 < r2row.front() || r1 > r2row.back()) continue;
      ts.push_back(tau);
      q2s.push_back(interp_grid(r2row, q2row, r1));
    }
    if (ts.size() >= 3) {
      qs.push_back(o1.q_label[k]);
      vals.push_back(fit_limit_in_invt(ts, q2s).limit);
    }
  }
  if (qs.size() < 4)
    throw precondition_error("q_infinity_map: insufficient overlap");
  return Pchip(qs, vals);
}

inline GaugeReport gauge_compare(const OpticalFunction& o1,
                                 const LimitProfiles& l1,
                                 const OpticalFunction& o2,
                                 const LimitProfiles& l2,
                                 const reduced::GFn& g,
                                 const std::vector<double>& t_grid) {
  GaugeReport rep;
  rep.unreliable = l1.unreliable || l2.unreliable;
  rep.frkl_rel_discrepancy = frkl_gauge_discrepancy(l1, l2, g, t_grid);
  try {
    const Pchip q12 = q_infinity_map(o1, o2);
    const Pchip q21 = q_infinity_map(o2, o1);
    double worst = 0.0;
    for (double q = q12.xmin(); q <= q12.xmax();
         q += (q12.xmax() - q12.xmin()) / 64.0) {
      const double im = q12(q);
      if (im < q21.xmin() || im > q21.xmax()) continue;
      worst = std::max(worst, std::abs(q21(im) - q));
    }
    rep.composition_max_error = worst;
  } catch (const precondition_error&) {
    rep.unreliable = true;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Synthetic MuU datasets manufactured from the exact hat solution, for
// round-trip and gauge tests. The underlying truth is the delta_data hat
// flow; the dataset is presented in gauge delta_gauge, optionally with a
// monotone relabeling phi (then mu scales by phi' and U_q by 1/phi').

struct SyntheticGauge {
  double delta_data = 0.0;
  double delta_gauge = 0.0;
  std::function<double(double)> phi;        // identity when null
  std::function<double(double)> phi_prime;  // 1 when null
};

inline MuU synthetic_mu_u(const reduced::ProfileFn& ahat,
                          const reduced::GFn& g, double epsilon,
                          const std::vector<double>& t_samples,
                          const std::vector<double>& q_grid,
                          const SyntheticGauge& sg) {
  MuU m;
  m.epsilon = epsilon;
  m.delta = sg.delta_gauge;
  m.t_grid = t_samples;
  m.s_grid.resize(t_samples.size());
  for (std::size_t i = 0; i < t_samples.size(); ++i)
    m.s_grid[i] = epsilon * std::log(t_samples[i]) - sg.delta_gauge;
  m.q_grid.resize(q_grid.size());
  for (std::size_t k = 0; k < q_grid.size(); ++k)
    m.q_grid[k] = sg.phi ? sg.phi(q_grid[k]) : q_grid[k];
  m.mu.assign(t_samples.size() * q_grid.size(), 0.0);
  m.U.assign(t_samples.size() * q_grid.size(), 0.0);
  m.Uq.assign(t_samples.size() * q_grid.size(), 0.0);
  const double gv = g(0);
  for (std::size_t row = 0; row < t_samples.size(); ++row) {
    const double s_true = epsilon * std::log(t_samples[row]) - sg.delta_data;
    auto integrand = [&](double p) {
      const double a = ahat(p);
      return a * std::exp(0.5 * gv * a * s_true);
    };
    auto cum = reduced::cumulative_from_hi(integrand, q_grid, ahat.support_hi);
    for (std::size_t k = 0; k < q_grid.size(); ++k) {
      const double a = ahat(q_grid[k]);
      const double dphi = sg.phi_prime ? sg.phi_prime(q_grid[k]) : 1.0;
      m.mu[m.idx(row, k)] = dphi * -2.0 * std::exp(-0.5 * gv * a * s_true);
      m.Uq[m.idx(row, k)] = a * std::exp(0.5 * gv * a * s_true) / dphi;
      m.U[m.idx(row, k)] = -cum[k];
    }
  }
  return m;
}

}  // namespace wavetail::eikonal
