#pragma once

// The comparison linear wave v: per-mode Goursat (characteristic cone)
// solves in double-null coordinates pb = t - r, sb = t + r, the l = 0
// closed form, cone data from L(t, omega) and its commuted variants,
// conserved quantities, the radiation field B, the plane-wave
// representation, and the flat-space forward-solve / Huygens / cutoff
// oracles.
//
// Mode equation on w = r v_l:  d_pb d_sb w = -(l(l+1)/4) w / r^2,
// with data (d_t + d_r)(r v_l) = f_l(t) on pb = 0 and w = 0 on the axis
// pb = sb.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "wavetail/common.hpp"
#include "wavetail/cutoff.hpp"
#include "wavetail/field1d.hpp"
#include "wavetail/fit.hpp"
#include "wavetail/interp.hpp"
#include "wavetail/qnlw.hpp"
#include "wavetail/quad.hpp"
#include "wavetail/reduced.hpp"
#include "wavetail/sphere.hpp"

namespace wavetail::linwave {

// ---------------------------------------------------------------------------
// Cone data. The l = 0 entry is the projection value (sphere average); the
// l = 1, 2 entries are coefficients against the orthonormal degree-1/2
// basis (sphere::paper_y1, sphere::ortho_y2).

struct ConeData {
  std::vector<double> t_grid;                // increasing, t >= 0
  std::vector<double> l0;                    // f_(0)(t)
  std::array<std::vector<double>, 3> l1;
  std::array<std::vector<double>, 5> l2;

  static ConeData zeros(std::vector<double> t) {
    ConeData c;
    c.t_grid = std::move(t);
    c.l0.assign(c.t_grid.size(), 0.0);
    for (auto& v : c.l1) v.assign(c.t_grid.size(), 0.0);
    for (auto& v : c.l2) v.assign(c.t_grid.size(), 0.0);
    return c;
  }

  std::size_t n_modes_nonzero(double tol = 0.0) const {
    auto nz = [tol](const std::vector<double>& v) {
      for (double x : v)
        if (std::abs(x) > tol) return true;
      return false;
    };
    std::size_t n = nz(l0) ? 1 : 0;
    for (const auto& v : l1) n += nz(v) ? 1 : 0;
    for (const auto& v : l2) n += nz(v) ? 1 : 0;
    return n;
  }
};

// f_l(t) = chi_{>10}(t) L_l(t) / t per mode. Sphere-constant L populates
// only the l = 0 entry.
inline ConeData cone_data_from_frkl(const reduced::CharDataL& L) {
  ConeData c = ConeData::zeros(L.t_grid);
  for (std::size_t it = 0; it < L.t_grid.size(); ++it) {
    const double t = L.t_grid[it];
    const double fac = chi_gt(10.0, t) / t;
    if (fac == 0.0) continue;
    if (L.n_omega == 1) {
      c.l0[it] = fac * L.value(it, 0);
    } else {
      if (!L.grid)
        throw precondition_error("cone_data_from_frkl: missing sphere grid");
      std::vector<double> row(L.n_omega);
      for (std::size_t n = 0; n < L.n_omega; ++n) row[n] = L.value(it, n);
      sphere::SphereField f(*L.grid, row);
      const auto mc = sphere::mode_coeffs(f);
      c.l0[it] = fac * mc.f0 / std::sqrt(kFourPi);  // coefficient -> mean
      for (int i = 0; i < 3; ++i) c.l1[i][it] = fac * mc.f1[i];
      for (int i = 0; i < 5; ++i) c.l2[i][it] = fac * mc.f2[i];
    }
  }
  return c;
}

// Commuted data for a single mode series f(t): S gives t f'(t); the
// t-derivative uses 5-point local Lagrange differentiation on the grid.
inline std::vector<double> commuted_mode_data_s(const std::vector<double>& t,
                                                const std::vector<double>& f) {
  auto df = reduced::detail::d_dq(t, f);
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = t[i] * df[i];
  return out;
}

// Commuted data on a full sphere-resolved series f(t, omega). Weighted
// fields only: S, rotations, boosts.
struct SphereSeries {
  std::vector<double> t_grid;
  const sphere::SphereGrid* grid = nullptr;
  std::vector<double> values;  // [it * n_nodes + node]
  std::size_t n_nodes() const { return grid ? grid->n_nodes() : 1; }
  double value(std::size_t it, std::size_t node) const {
    return values[it * n_nodes() + node];
  }
};

inline SphereSeries commuted_cone_data(const SphereSeries& f,
                                       reduced::VectorField z) {
  SphereSeries out = f;
  const std::size_t nn = f.n_nodes(), nt = f.t_grid.size();
  if (z == reduced::VectorField::Partial)
    throw precondition_error(
        "commuted_cone_data: only weighted fields act on cone data");
  // t-derivative per node
  std::vector<double> tdf(nt * nn, 0.0);
  {
    std::vector<double> col(nt);
    for (std::size_t n = 0; n < nn; ++n) {
      for (std::size_t it = 0; it < nt; ++it) col[it] = f.value(it, n);
      auto d = reduced::detail::d_dq(f.t_grid, col);
      for (std::size_t it = 0; it < nt; ++it)
        tdf[it * nn + n] = f.t_grid[it] * d[it];
    }
  }
  using VF = reduced::VectorField;
  if (z == VF::S) {
    out.values = tdf;
    return out;
  }
  if (!f.grid)
    throw precondition_error("commuted_cone_data: rotation/boost needs grid");
  int ai = 0, aj = 0;
  if (z == VF::Omega12) ai = 1, aj = 2;
  if (z == VF::Omega13) ai = 1, aj = 3;
  if (z == VF::Omega23) ai = 2, aj = 3;
  if (z == VF::Boost1) ai = 1;
  if (z == VF::Boost2) ai = 2;
  if (z == VF::Boost3) ai = 3;
  const auto& g = *f.grid;
  for (std::size_t it = 0; it < nt; ++it) {
    std::vector<double> row(nn);
    for (std::size_t n = 0; n < nn; ++n) row[n] = f.value(it, n);
    sphere::SphereField sf(g, row);
    if (aj != 0) {  // rotation: w_i d_j f - w_j d_i f
      auto di = sphere::angular_derivative(sf, aj);
      auto dj = sphere::angular_derivative(sf, ai);
      for (std::size_t n = 0; n < nn; ++n) {
        const std::size_t i = n / g.n_phi(), jn = n % g.n_phi();
        const auto w = g.omega(i, jn);
        out.values[it * nn + n] =
            w[ai - 1] * di.values()[n] - w[aj - 1] * dj.values()[n];
      }
    } else {  // boost: t w_i d_t f + d_{w_i} f
      auto dang = sphere::angular_derivative(sf, ai);
      for (std::size_t n = 0; n < nn; ++n) {
        const std::size_t i = n / g.n_phi(), jn = n % g.n_phi();
        const auto w = g.omega(i, jn);
        out.values[it * nn + n] =
            w[ai - 1] * tdf[it * nn + n] + dang.values()[n];
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// One spherical-harmonic mode of the linear wave on the double-null grid.

class ModeWave {
 public:
  ModeWave() = default;
  ModeWave(std::size_t ell, double h, std::size_t np, std::size_t ns)
      : ell_(ell), h_(h), np_(np), ns_(ns), w_((np + 1) * (ns + 1), 0.0) {}

  std::size_t ell() const { return ell_; }
  double h() const { return h_; }
  double pbar_max() const { return h_ * double(np_); }
  double sbar_max() const { return h_ * double(ns_); }
  std::size_t np() const { return np_; }
  std::size_t ns() const { return ns_; }

  double& at(std::size_t i, std::size_t j) { return w_[i * (ns_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const {
    return w_[i * (ns_ + 1) + j];
  }

  // w = r v_l at (t, r); 4x4 Lagrange in (pb, sb), windows clamped to the
  // triangle j >= i.
  double sample_w(double t, double r) const {
    const double pb = t - r, sb = t + r;
    if (pb < -1e-9 || sb > sbar_max() + 1e-9 || pb > pbar_max() + 1e-9 ||
        sb < pb - 1e-9)
      throw precondition_error("ModeWave: sample outside domain");
    const double si = std::clamp(pb / h_, 0.0, double(np_));
    const double sj = std::clamp(sb / h_, 0.0, double(ns_));
    std::ptrdiff_t i0 = std::clamp<std::ptrdiff_t>(
        std::ptrdiff_t(std::floor(si)) - 1, 0, std::ptrdiff_t(np_) - 3);
    // the sb-window must stay inside the triangle for the window's largest i
    if (i0 + 3 > std::ptrdiff_t(ns_) - 3)
      throw precondition_error("ModeWave: sample too close to the corner");
    std::ptrdiff_t j0 = std::clamp<std::ptrdiff_t>(
        std::ptrdiff_t(std::floor(sj)) - 1, i0 + 3, std::ptrdiff_t(ns_) - 3);
    const double up = si - double(i0) - 1.0, us = sj - double(j0) - 1.0;
    double col[4];
    for (int a = 0; a < 4; ++a) {
      const double* row = &w_[(i0 + a) * (ns_ + 1) + j0];
      col[a] = lagrange4(row[0], row[1], row[2], row[3], us);
    }
    return lagrange4(col[0], col[1], col[2], col[3], up);
  }

  double sample_v(double t, double r) const {
    if (r > h_) return sample_w(t, r) / r;
    // near the axis w ~ r^{l+1}; dividing interpolated w by tiny r loses
    // digits, so evaluate at r = h and scale with the leading power.
    if (ell_ > 0)
      return sample_w(t, h_) / h_ * std::pow(r / h_, double(ell_));
    return (4.0 * sample_w(t, h_) - sample_w(t, 2.0 * h_)) / (2.0 * h_);
  }

  // 2 d_sb w = (d_t + d_r) w along the cone direction, centered in j.
  double dplus_w(std::size_t i, std::size_t j) const {
    if (j == 0 || j >= ns_) throw precondition_error("dplus_w: edge node");
    return (at(i, j + 1) - at(i, j - 1)) / h_;
  }

  std::string provenance;

 private:
  std::size_t ell_ = 0;
  double h_ = 0.1;
  std::size_t np_ = 0, ns_ = 0;
  std::vector<double> w_;
};

struct GoursatParams {
  double h = 0.1;
  double pbar_max = 100.0;
  double sbar_max = 200.0;
  double tip_regularity_tol = 1e-6;  // |w| allowed near the tip when the
                                     // data vanishes there (flag only)
};

// Second-order double-null marching from cone data f(t) (one mode).
inline ModeWave goursat_solve_mode(std::size_t ell,
                                   const std::function<double(double)>& f_at,
                                   const GoursatParams& par) {
  const double h = par.h;
  const std::size_t np = std::size_t(std::round(par.pbar_max / h));
  const std::size_t ns = std::size_t(std::round(par.sbar_max / h));
  if (ns < np) throw precondition_error("goursat_solve_mode: sbar < pbar");
  ModeWave mw(ell, h, np, ns);
  // Cone values w(0, sb) = int_0^{sb/2} f; cumulative per cell (GL5).
  {
    double acc = 0.0;
    mw.at(0, 0) = 0.0;
    for (std::size_t j = 1; j <= ns; ++j) {
      const double a = 0.5 * h * double(j - 1), b = 0.5 * h * double(j);
      static const double gx[5] = {-0.906179845938664, -0.538469310105683, 0.0,
                                   0.538469310105683, 0.906179845938664};
      static const double gw[5] = {0.236926885056189, 0.478628670499366,
                                   0.568888888888889, 0.478628670499366,
                                   0.236926885056189};
      const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
      double s = 0.0;
      for (int k = 0; k < 5; ++k) s += gw[k] * f_at(c + hw * gx[k]);
      acc += s * hw;
      mw.at(0, j) = acc;
    }
  }

  const double lfac = double(ell * (ell + 1));
  for (std::size_t i = 0; i < np; ++i) {
    mw.at(i + 1, i + 1) = 0.0;  // axis
    if (ell > 0) {
      // First off-axis point (r = h/2) by the regularity ansatz
      // w = c(t) r^{l+1}: linear extrapolation of c along the axis.
      mw.at(i + 1, i + 2) = (i >= 1)
                                ? 2.0 * mw.at(i, i + 1) - mw.at(i - 1, i)
                                : mw.at(i, i + 1);
    }
    for (std::size_t j = (ell > 0 ? i + 3 : i + 2); j <= ns; ++j) {
      const double rbar = 0.5 * (double(j) - double(i) - 1.0) * h;
      const double kt = lfac / (4.0 * rbar * rbar);
      const double inv_h2 = 1.0 / (h * h);
      const double rhs =
          (mw.at(i + 1, j - 1) + mw.at(i, j) - mw.at(i, j - 1)) * inv_h2 -
          0.25 * kt *
              (mw.at(i + 1, j - 1) + mw.at(i, j) + mw.at(i, j - 1));
      mw.at(i + 1, j) = rhs / (inv_h2 + 0.25 * kt);
    }
  }
  mw.provenance = "goursat l=" + std::to_string(ell);
  return mw;
}

inline ModeWave goursat_solve_mode(std::size_t ell,
                                   const std::vector<double>& t_grid,
                                   const std::vector<double>& f,
                                   const GoursatParams& par) {
  if (t_grid.size() != f.size() || t_grid.size() < 3)
    throw precondition_error("goursat_solve_mode: bad data");
  // C^2 interpolation: the marched field gets differentiated up to three
  // times downstream, so interpolant kinks matter.
  auto fi = std::make_shared<CubicSpline>(t_grid, f);
  auto f_at = [fi](double t) {
    if (t <= fi->xmin() || t >= fi->xmax()) return 0.0;
    return (*fi)(t);
  };
  return goursat_solve_mode(ell, f_at, par);
}

// Max mismatch between the marched (d_t + d_r) w on the cone and the data.
inline double cone_reproduction_error(const ModeWave& mw,
                                      const std::vector<double>& t_grid,
                                      const std::vector<double>& f) {
  Pchip fi(t_grid, f);
  double worst = 0.0;
  for (std::size_t j = 1; j < mw.ns(); ++j) {
    const double t = 0.5 * mw.h() * double(j);
    if (t <= fi.xmin() || t >= fi.xmax()) continue;
    worst = std::max(worst, std::abs(mw.dplus_w(0, j) - fi(t)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// l = 0 closed form: (r v_(0))(t, r) = int_{(t-r)/2}^{(t+r)/2} chi L0(p)/p dp.

inline double v0_closed_form_rv(const std::function<double(double)>& L0,
                                double t, double r, double quad_tol = 1e-12) {
  if (t - r < -1e-12)
    throw precondition_error("v0_closed_form: needs t >= r");
  auto integrand = [&](double p) {
    const double c = chi_gt(10.0, p);
    return c == 0.0 ? 0.0 : c * L0(p) / p;
  };
  const double lo = std::max(0.5 * (t - r), 1e-12);
  return integrate(integrand, lo, 0.5 * (t + r), quad_tol).value;
}

inline double v0_closed_form(const std::function<double(double)>& L0, double t,
                             double r, double quad_tol = 1e-12) {
  if (r < 1e-9) {
    const double c = chi_gt(10.0, 0.5 * t);
    return c == 0.0 ? 0.0 : 2.0 * c * L0(0.5 * t) / t;
  }
  return v0_closed_form_rv(L0, t, r, quad_tol) / r;
}

// ---------------------------------------------------------------------------
// Mode synthesis: v(t, r, omega) from the per-mode waves.

struct ModeSet {
  ModeWave l0;
  std::array<ModeWave, 3> l1;
  std::array<ModeWave, 5> l2;
  bool has_l0 = false;
  std::array<bool, 3> has_l1 = {false, false, false};
  std::array<bool, 5> has_l2 = {false, false, false, false, false};
  double epsilon = 0.1;

  double v_at(double t, double r, double w1, double w2, double w3) const {
    double acc = 0.0;
    if (has_l0) acc += l0.sample_v(t, r);
    for (int i = 0; i < 3; ++i)
      if (has_l1[i])
        acc += l1[i].sample_v(t, r) * sphere::paper_y1(i + 1, w1, w2, w3);
    for (int i = 0; i < 5; ++i)
      if (has_l2[i])
        acc += l2[i].sample_v(t, r) * sphere::ortho_y2(i + 1, w1, w2, w3);
    return acc;
  }

  // Sphere-average value (the l = 0 part).
  double v0_at(double t, double r) const {
    return has_l0 ? l0.sample_v(t, r) : 0.0;
  }
};

inline ModeSet assemble_v(const ConeData& data, const GoursatParams& par,
                          double epsilon, double drop_tol = 0.0) {
  ModeSet ms;
  ms.epsilon = epsilon;
  auto nz = [&](const std::vector<double>& v) {
    for (double x : v)
      if (std::abs(x) > drop_tol) return true;
    return false;
  };
  if (nz(data.l0)) {
    ms.l0 = goursat_solve_mode(0, data.t_grid, data.l0, par);
    ms.has_l0 = true;
  }
  for (int i = 0; i < 3; ++i)
    if (nz(data.l1[i])) {
      ms.l1[i] = goursat_solve_mode(1, data.t_grid, data.l1[i], par);
      ms.has_l1[i] = true;
    }
  for (int i = 0; i < 5; ++i)
    if (nz(data.l2[i])) {
      ms.l2[i] = goursat_solve_mode(2, data.t_grid, data.l2[i], par);
      ms.has_l2[i] = true;
    }
  return ms;
}

// ---------------------------------------------------------------------------
// Radiation field of one mode: B_mode(p) = -(1/2 eps) lim_{T->inf}
// r (d_t - d_r) v evaluated along (T, p + T), with a one-term 1/T
// Richardson correction. r (d_t - d_r) v = 2 d_pb w + w / r.

struct ExtractBParams {
  double richardson_pair = 0.5;  // second sample at this fraction of T_max
  std::size_t n_fit = 5;         // samples between the pair, fitted in 1/T
};

inline std::vector<double> extract_b_mode(const ModeWave& mw, double epsilon,
                                          const std::vector<double>& p_grid,
                                          const ExtractBParams& par = {}) {
  std::vector<double> out(p_grid.size(), 0.0);
  const double h = mw.h();
  for (std::size_t k = 0; k < p_grid.size(); ++k) {
    const double p = p_grid[k];
    if (p >= 0.0)
      throw precondition_error("extract_b_mode: p must be negative");
    const double pb = -p;
    if (pb > mw.pbar_max() - 2.0 * h)
      throw precondition_error("extract_b_mode: p beyond marched domain");
    // samples of r (d_t - d_r) v at increasing radius along fixed pb; the
    // transverse tail is C/r at leading order, so extrapolate in 1/r
    std::vector<double> rs, vals;
    const double sb_hi = mw.sbar_max() - 2.0 * h;
    const double sb_lo = std::max(par.richardson_pair * sb_hi, pb + 6.0 * h);
    for (std::size_t m = 0; m < par.n_fit; ++m) {
      const double sb =
          sb_lo + (sb_hi - sb_lo) * double(m) / double(par.n_fit - 1);
      const double t = 0.5 * (sb + pb), r = 0.5 * (sb - pb);
      // diagonal difference = (d_t - d_r) w = 2 d_pb w
      const double dmw =
          (mw.sample_w(t + h, r - h) - mw.sample_w(t - h, r + h)) / (2.0 * h);
      const double val = dmw + mw.sample_w(t, r) / r;
      rs.push_back(r);
      vals.push_back(val);
    }
    out[k] = -fit_limit_in_invt2(rs, vals).limit / (2.0 * epsilon);
  }
  return out;
}

// Full radiation field B(p, omega) synthesized from per-mode extractions.
inline reduced::RadiationProfile extract_b(const ModeSet& ms,
                                           const std::vector<double>& p_grid,
                                           const sphere::SphereGrid* grid,
                                           const ExtractBParams& par = {}) {
  reduced::RadiationProfile B;
  B.kind = reduced::ProfileKind::B;
  B.q = p_grid;
  B.support_hi = 0.0;
  const bool multi = grid && (ms.has_l1[0] || ms.has_l1[1] || ms.has_l1[2] ||
                              ms.has_l2[0] || ms.has_l2[1] || ms.has_l2[2] ||
                              ms.has_l2[3] || ms.has_l2[4]);
  B.n_omega = multi ? grid->n_nodes() : 1;
  B.grid = multi ? grid : nullptr;
  B.values.assign(p_grid.size() * B.n_omega, 0.0);

  auto add_mode = [&](const ModeWave& mw, auto&& basis_fn) {
    const auto vals = extract_b_mode(mw, ms.epsilon, p_grid, par);
    for (std::size_t iq = 0; iq < p_grid.size(); ++iq) {
      if (B.n_omega == 1) {
        B.value(iq, 0) += vals[iq] * basis_fn(0.0, 0.0, 1.0);
      } else {
        for (std::size_t i = 0; i < grid->n_theta(); ++i)
          for (std::size_t j = 0; j < grid->n_phi(); ++j) {
            const auto w = grid->omega(i, j);
            B.value(iq, grid->node(i, j)) +=
                vals[iq] * basis_fn(w[0], w[1], w[2]);
          }
      }
    }
  };
  if (ms.has_l0)
    add_mode(ms.l0, [](double, double, double) { return 1.0; });
  for (int i = 0; i < 3; ++i)
    if (ms.has_l1[i])
      add_mode(ms.l1[i], [i](double a, double b, double c) {
        return sphere::paper_y1(i + 1, a, b, c);
      });
  for (int i = 0; i < 5; ++i)
    if (ms.has_l2[i])
      add_mode(ms.l2[i], [i](double a, double b, double c) {
        return sphere::ortho_y2(i + 1, a, b, c);
      });
  B.fit_decay();
  return B;
}

// ---------------------------------------------------------------------------
// Plane-wave superposition. With the B_I/A_I convention,
//   Z^I v(t, x) = -(eps / 4 pi) int P(x . w - t, w) dsigma(w).
// Profiles of kind B or Ahat differ by the factor -2 (B_0 = -2 B,
// A_0 = -2 Ahat) and are converted internally.

inline double plane_wave_eval(const reduced::RadiationProfile& prof,
                              double epsilon, double t, double r,
                              const std::array<double, 3>& xhat) {
  if (r >= t)
    throw precondition_error("plane_wave_eval: needs |x| < t");
  const double conv = (prof.kind == reduced::ProfileKind::B ||
                       prof.kind == reduced::ProfileKind::Ahat)
                          ? -2.0
                          : 1.0;
  auto pf = prof.fn();
  if (prof.n_omega == 1) {
    // 1D reduction: -(eps/2) (1/r) int_{-r}^{r} P(y - t) dy
    if (r < 1e-9) return -epsilon * conv * pf(-t, 0);
    const double val = integrate([&](double y) { return pf(y - t, 0); }, -r,
                                 r, 1e-12).value;
    return -0.5 * epsilon * conv * val / r;
  }
  if (!prof.grid)
    throw precondition_error("plane_wave_eval: profile lacks sphere grid");
  const auto& g = *prof.grid;
  double acc = 0.0;
  for (std::size_t i = 0; i < g.n_theta(); ++i)
    for (std::size_t j = 0; j < g.n_phi(); ++j) {
      const auto w = g.omega(i, j);
      const double xdw =
          r * (xhat[0] * w[0] + xhat[1] * w[1] + xhat[2] * w[2]);
      acc += pf(xdw - t, g.node(i, j)) * g.weight(i, j);
    }
  return -epsilon * conv * acc / kFourPi;
}

// ---------------------------------------------------------------------------
// Conserved quantities along incoming rays for l = 0, 1, 2.

struct ConservedQuantity {
  std::size_t ell = 0;
  std::vector<double> sbar;        // sampled outgoing coordinate
  std::vector<double> pbar;        // sampled incoming coordinate
  std::vector<double> values;      // [ip * sbar.size() + is]
  double drift = 0.0;              // max variation along pbar at fixed sbar

  double value(std::size_t ip, std::size_t is) const {
    return values[ip * sbar.size() + is];
  }
};

inline ConservedQuantity conserved_quantity(const ModeWave& mw,
                                            double t_min = 20.0,
                                            double r_min = 2.0) {
  const std::size_t ell = mw.ell();
  if (ell > 2)
    throw precondition_error("conserved_quantity: l must be 0, 1, or 2");
  const double h = mw.h();
  ConservedQuantity cq;
  cq.ell = ell;

  // Q at (i, j) by nested centered sb-differences of w along fixed pb.
  auto r_of = [&](std::size_t i, std::size_t j) {
    return 0.5 * h * (double(j) - double(i));
  };
  auto d1 = [&](std::size_t i, std::size_t j) {  // (d_t + d_r) w = 2 d_sb w
    return (mw.at(i, j + 1) - mw.at(i, j - 1)) / h;
  };
  auto q_of = [&](std::size_t i, std::size_t j) {
    if (ell == 0) return d1(i, j);
    if (ell == 1) {
      // r^{-2} (d_t+d_r)( r^2 (d_t+d_r) w )
      auto inner = [&](std::size_t jj) {
        return sq(r_of(i, jj)) * d1(i, jj);
      };
      return (inner(j + 1) - inner(j - 1)) / h / sq(r_of(i, j));
    }
    // l = 2: r^{-4} (d_t+d_r)( (r^2 (d_t+d_r))^2 w )
    auto lvl1 = [&](std::size_t jj) { return sq(r_of(i, jj)) * d1(i, jj); };
    auto lvl2 = [&](std::size_t jj) {
      return sq(r_of(i, jj)) * (lvl1(jj + 1) - lvl1(jj - 1)) / h;
    };
    return (lvl2(j + 1) - lvl2(j - 1)) / h / sq(sq(r_of(i, j)));
  };

  // sample lattice at fixed physical positions (snapped to the grid), so
  // drifts are comparable across resolutions
  const std::size_t margin = 5;
  std::vector<std::size_t> iset, jset;
  const double pb_stride = mw.pbar_max() / 8.0;
  const double sb_stride = mw.sbar_max() / 24.0;
  for (double pb = pb_stride; pb < mw.pbar_max(); pb += pb_stride) {
    const std::size_t i = std::size_t(std::round(pb / h));
    if (i >= margin && i + margin <= mw.np()) iset.push_back(i);
  }
  for (double sb = sb_stride; sb < mw.sbar_max(); sb += sb_stride) {
    const std::size_t j = std::size_t(std::round(sb / h));
    if (j >= margin && j + margin <= mw.ns()) jset.push_back(j);
  }
  for (std::size_t j : jset) cq.sbar.push_back(h * double(j));
  for (std::size_t i : iset) cq.pbar.push_back(h * double(i));
  cq.values.assign(iset.size() * jset.size(), std::nan(""));
  for (std::size_t a = 0; a < iset.size(); ++a)
    for (std::size_t b = 0; b < jset.size(); ++b) {
      const std::size_t i = iset[a], j = jset[b];
      if (j < i + 2 * margin) continue;
      const double t = 0.5 * h * (double(j) + double(i));
      const double r = r_of(i, j);
      if (t < t_min || r < r_min) continue;
      cq.values[a * jset.size() + b] = q_of(i, j);
    }

  // drift: variation along pbar at fixed sbar
  double drift = 0.0;
  for (std::size_t b = 0; b < jset.size(); ++b) {
    double lo = 1e300, hi = -1e300;
    for (std::size_t a = 0; a < iset.size(); ++a) {
      const double v = cq.values[a * jset.size() + b];
      if (std::isnan(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi >= lo) drift = std::max(drift, hi - lo);
  }
  cq.drift = drift;
  return cq;
}

// ---------------------------------------------------------------------------
// Flat-space forward-solve oracle (spherically symmetric majorant):
//   r psi(T, r) = -int_0^r int_0^{T-r+s} (T-r+2s-s') Ftilde(s', T-r+2s-s')
// with the two-branch envelope Ftilde. Also the shape of the bound.

struct ForwardOracleParams {
  double B = 1.0;
  double alpha = 2.0;
  double eta0 = 1.0;
  double quad_tol = 1e-10;
};

inline double forward_majorant(const ForwardOracleParams& p, double t,
                               double r) {
  if (t <= 0.0) return 0.0;
  if (r <= 0.5 * t)
    return p.B * std::pow(jbrk(t - r), -p.alpha) *
           std::pow(jbrk(r), -2.0 - p.eta0);
  return p.B * std::pow(jbrk(t - r), -1.0 - p.eta0) *
         std::pow(jbrk(r), -p.alpha - 1.0);
}

inline double forward_solve_oracle_rpsi(const ForwardOracleParams& p, double T,
                                        double r) {
  if (p.alpha <= 1.0)
    throw precondition_error("forward_solve_oracle: alpha must exceed 1");
  if (p.eta0 <= 0.0)
    throw precondition_error("forward_solve_oracle: eta0 must be positive");
  auto inner = [&](double s) {
    const double hi = T - r + s;
    if (hi <= 0.0) return 0.0;
    auto f = [&](double sp) {
      const double rad = T - r + 2.0 * s - sp;
      return rad * forward_majorant(p, sp, rad);
    };
    // branch switch where rad = sp / 2
    const double split = 2.0 / 3.0 * (T - r + 2.0 * s);
    double acc = 0.0;
    if (split > 0.0 && split < hi) {
      acc += integrate(f, 0.0, split, p.quad_tol).value;
      acc += integrate(f, split, hi, p.quad_tol).value;
    } else {
      acc += integrate(f, 0.0, hi, p.quad_tol).value;
    }
    return acc;
  };
  return -integrate(inner, 0.0, r, p.quad_tol * 10.0).value;
}

inline double forward_bound_shape(const ForwardOracleParams& p, double T,
                                  double r) {
  const double a = r * std::pow(jbrk(T - r), -p.alpha);
  const double b =
      std::pow(jbrk(T - r), -p.alpha + 1.0) / (p.alpha - 1.0);
  return p.B / p.eta0 * std::min(a, b);
}

// ---------------------------------------------------------------------------
// Cutoff commutator residual on a (t, r) patch:
//   box(chi_{>H}(t-r) phi) - chi box phi + 2 chi' r^{-1} (d_t+d_r)(r phi).
// Second-order differencing of a callable phi; chi' analytic. Returns the
// max |residual| on the patch interior.

struct PatchSpec {
  double t0 = 10.0, t1 = 20.0;
  double r0 = 1.0, r1 = 15.0;
  double h = 0.05;
};

template <class Phi>
inline double cutoff_commutator_residual(const Phi& phi, double H,
                                         const PatchSpec& patch,
                                         double* support_violation = nullptr) {
  const double h = patch.h;
  auto box = [&](auto&& f, double t, double r) {
    const double d2t =
        (f(t + h, r) - 2.0 * f(t, r) + f(t - h, r)) / (h * h);
    const double d2r =
        (f(t, r + h) - 2.0 * f(t, r) + f(t, r - h)) / (h * h);
    const double dr = (f(t, r + h) - f(t, r - h)) / (2.0 * h);
    return -d2t + d2r + 2.0 / r * dr;
  };
  auto chif = [&](double t, double r) { return chi_gt(H, t - r); };
  auto prod = [&](double t, double r) { return chif(t, r) * phi(t, r); };
  double worst = 0.0, outside = 0.0;
  for (double t = patch.t0; t <= patch.t1 + 1e-12; t += 4.0 * h)
    for (double r = patch.r0; r <= patch.r1 + 1e-12; r += 4.0 * h) {
      const double boxp = box(prod, t, r);
      const double boxphi = box(phi, t, r);
      const double dplus_rphi =
          ((r + h) * phi(t + h, r + h) - (r - h) * phi(t - h, r - h)) /
          (2.0 * h);
      const double res = boxp - chif(t, r) * boxphi +
                         2.0 * chi_gt_prime(H, t - r) * dplus_rphi / r;
      worst = std::max(worst, std::abs(res));
      const double q = t - r;
      if (q < 0.5 * H - 2.0 * h || q > H + 2.0 * h)
        outside = std::max(outside, std::abs(boxp - chif(t, r) * boxphi));
    }
  if (support_violation) *support_violation = outside;
  return worst;
}

// ---------------------------------------------------------------------------
// Strong Huygens check: evolve a mode with the full source and with the
// source restricted to the dependence region D_{T,X}, compare at the probe.

struct HuygensSource {
  std::function<double(double, double)> F;  // F(t, r)
  double t_lo = 0.0, t_hi = 0.0;            // support bounds (descriptor)
};

struct HuygensResult {
  double full_value = 0.0;
  double masked_value = 0.0;
  double deviation = 0.0;
};

inline bool in_dependence_region(double T, double X, double t, double r) {
  return (t + r >= T - X - 1e-12) && (t + r <= T + X + 1e-12) &&
         (t - r <= T - X + 1e-12);
}

// Signed distance-like gauge of how far (t, r) lies outside D_{T,X};
// nonpositive inside.
inline double outside_d_gauge(double T, double X, double t, double r) {
  return std::max({(T - X) - (t + r), (t + r) - (T + X), (t - r) - (T - X)});
}

inline HuygensResult huygens_check(std::size_t ell, const HuygensSource& src,
                                   double T, double X, double dr, double r_max,
                                   double collar = 0.5) {
  LinearModeParams lp;
  lp.ell = ell;
  lp.t_max = T + 2.0 * dr;
  lp.r_max = r_max;
  lp.dr = dr;
  lp.source = src.F;
  auto full = evolve_linear_mode(lp);

  // The mask is 1 on D and rolls smoothly to 0 across a fixed collar that
  // lies entirely outside D, so the masked continuum solution agrees at the
  // probe and the source stays smooth on the grid.
  LinearModeParams lm = lp;
  lm.source = [&, T, X, collar](double t, double r) {
    const double d = outside_d_gauge(T, X, t, r);
    const double m = 1.0 - chi_gt(collar, d);
    return m == 0.0 ? 0.0 : m * src.F(t, r);
  };
  auto masked = evolve_linear_mode(lm);

  HuygensResult out;
  out.full_value = full.field.sample_w(T, X) / X;
  out.masked_value = masked.field.sample_w(T, X) / X;
  out.deviation = std::abs(out.full_value - out.masked_value);
  return out;
}

}  // namespace wavetail::linwave
