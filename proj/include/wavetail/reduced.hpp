#pragma once

// The geometric reduced system and its exact solutions, the commuted
// asymptotic-profile recursions, the Jacobian factor J, and the
// characteristic-data integral L(t, omega).
//
// Reduced system (s = eps ln t - delta):
//   d_s (mu U_q) = 0,   d_s mu = (1/4) G(omega) mu^2 U_q.
// Exact "hat" solution from scattering data Ahat (mu normalized to -2):
//   mu = -2 exp(-G Ahat s / 2),  U_q = Ahat exp(G Ahat s / 2),
//   U  = -int_q^inf Ahat exp(G Ahat s / 2) dp.
// Exact "tilde" solution from (A, A1), with A1 A2 = -2A.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "wavetail/common.hpp"
#include "wavetail/fit.hpp"
#include "wavetail/interp.hpp"
#include "wavetail/quad.hpp"
#include "wavetail/sphere.hpp"

namespace wavetail::reduced {

// A q-profile, possibly varying over the sphere. `support_hi` is the point
// beyond which the profile takes its canonical tail value (0 for radiation
// profiles, -2 for A1-like ones). `breakpoints`, when present, are the
// integration cells of an underlying sample grid.
struct ProfileFn {
  std::function<double(double q, std::size_t node)> f;
  double support_hi = 2.0;
  double tail_value = 0.0;
  bool sphere_const = true;
  std::vector<double> breakpoints;

  double operator()(double q, std::size_t node = 0) const {
    if (q >= support_hi) return tail_value;
    return f(q, sphere_const ? 0 : node);
  }

  static ProfileFn radial(std::function<double(double)> g, double hi,
                          double tail = 0.0) {
    ProfileFn p;
    p.f = [g = std::move(g)](double q, std::size_t) { return g(q); };
    p.support_hi = hi;
    p.tail_value = tail;
    return p;
  }
};

// Evaluate G per sphere node; sphere-constant pipelines use node 0.
struct GFn {
  std::function<double(std::size_t node)> g;
  bool is_const = true;
  double operator()(std::size_t node = 0) const { return g(is_const ? 0 : node); }

  static GFn constant(double v) {
    return GFn{[v](std::size_t) { return v; }, true};
  }
  static GFn from_profile(const sphere::GProfile& gp) {
    const auto vals = gp.values.values();
    return GFn{[vals](std::size_t n) { return vals[n]; }, gp.is_constant};
  }
};

template <class F>
inline void detail_quad_panel(const F& fun, double a, double b, double* v,
                              double* e, int depth = 0) {
  wavetail::detail::gk15(fun, a, b, v, e);
  if (*e > 1e-13 * (1.0 + std::abs(*v)) && depth < 12) {
    const double m = 0.5 * (a + b);
    double v1, e1, v2, e2;
    detail_quad_panel(fun, a, m, &v1, &e1, depth + 1);
    detail_quad_panel(fun, m, b, &v2, &e2, depth + 1);
    *v = v1 + v2;
    *e = e1 + e2;
  }
}

// Integral of `fun` over [lo, hi], honoring sample-grid breakpoints.
template <class F>
inline double integrate_q(const F& fun, double lo, double hi,
                          const std::vector<double>& breakpoints,
                          double abstol = 1e-12) {
  if (hi <= lo) return 0.0;
  if (breakpoints.empty()) return integrate(fun, lo, hi, abstol).value;
  std::vector<double> cells;
  cells.push_back(lo);
  for (double b : breakpoints)
    if (b > lo && b < hi) cells.push_back(b);
  cells.push_back(hi);
  return grid_quad(fun, cells);
}

// I(q_i) = int_{q_i}^{hi} fun dp for every node of an increasing grid,
// accumulated from the top with one GK15 panel per cell.
template <class F>
inline std::vector<double> cumulative_from_hi(const F& fun,
                                              const std::vector<double>& q_grid,
                                              double hi) {
  const std::size_t n = q_grid.size();
  std::vector<double> out(n, 0.0);
  double acc = 0.0;
  double top = hi;
  for (std::size_t i = n; i-- > 0;) {
    if (q_grid[i] < top) {
      double v, e;
      detail_quad_panel(fun, q_grid[i], top, &v, &e);
      acc += v;
      top = q_grid[i];
    }
    out[i] = acc;
  }
  return out;
}

enum class SourceKind { tilde, hat, ode };

struct ReducedState {
  std::vector<double> s_grid, q_grid;
  std::size_t n_omega = 1;
  std::vector<double> mu, U, Uq;  // [is * nq * n_omega + iq * n_omega + node]
  SourceKind source_kind = SourceKind::hat;

  std::size_t idx(std::size_t is, std::size_t iq, std::size_t node) const {
    return (is * q_grid.size() + iq) * n_omega + node;
  }
  void allocate() {
    const std::size_t n = s_grid.size() * q_grid.size() * n_omega;
    mu.assign(n, 0.0);
    U.assign(n, 0.0);
    Uq.assign(n, 0.0);
  }
  double max_residual_mu_uq_drift() const {
    double m = 0.0;
    for (std::size_t iq = 0; iq < q_grid.size(); ++iq)
      for (std::size_t node = 0; node < n_omega; ++node) {
        const double p0 = mu[idx(0, iq, node)] * Uq[idx(0, iq, node)];
        for (std::size_t is = 1; is < s_grid.size(); ++is)
          m = std::max(m, std::abs(mu[idx(is, iq, node)] *
                                       Uq[idx(is, iq, node)] - p0));
      }
    return m;
  }
};

inline ReducedState exact_hat_solution(const ProfileFn& ahat, const GFn& g,
                                       std::vector<double> s_grid,
                                       std::vector<double> q_grid,
                                       double quad_tol = 1e-12,
                                       const sphere::SphereGrid* grid = nullptr) {
  ReducedState st;
  st.s_grid = std::move(s_grid);
  st.q_grid = std::move(q_grid);
  st.n_omega =
      (ahat.sphere_const && g.is_const) || !grid ? 1 : grid->n_nodes();
  st.source_kind = SourceKind::hat;
  st.allocate();
  for (std::size_t node = 0; node < st.n_omega; ++node) {
    const double gv = g(node);
    for (std::size_t is = 0; is < st.s_grid.size(); ++is) {
      const double s = st.s_grid[is];
      auto integrand = [&](double p) {
        const double a = ahat(p, node);
        return a * std::exp(0.5 * gv * a * s);
      };
      auto cum = cumulative_from_hi(integrand, st.q_grid, ahat.support_hi);
      for (std::size_t iq = 0; iq < st.q_grid.size(); ++iq) {
        const double q = st.q_grid[iq];
        const double a = ahat(q, node);
        st.mu[st.idx(is, iq, node)] = -2.0 * std::exp(-0.5 * gv * a * s);
        st.Uq[st.idx(is, iq, node)] = a * std::exp(0.5 * gv * a * s);
        st.U[st.idx(is, iq, node)] = -cum[iq];
      }
    }
  }
  return st;
}

inline ReducedState exact_tilde_solution(const ProfileFn& a,
                                         const ProfileFn& a1, const GFn& g,
                                         std::vector<double> s_grid,
                                         std::vector<double> q_grid,
                                         double quad_tol = 1e-12) {
  ReducedState st;
  st.s_grid = std::move(s_grid);
  st.q_grid = std::move(q_grid);
  st.n_omega = 1;
  st.source_kind = SourceKind::tilde;
  st.allocate();
  auto a2 = [&](double q, std::size_t node) {
    const double a1v = a1(q, node);
    if (a1v >= 0.0)
      throw precondition_error("exact_tilde_solution: A1 must be negative");
    return -2.0 * a(q, node) / a1v;
  };
  for (std::size_t node = 0; node < st.n_omega; ++node) {
    const double gv = g(node);
    for (std::size_t is = 0; is < st.s_grid.size(); ++is) {
      const double s = st.s_grid[is];
      auto integrand = [&](double p) {
        return a2(p, node) * std::exp(0.5 * gv * a(p, node) * s);
      };
      auto cum = cumulative_from_hi(integrand, st.q_grid, a.support_hi);
      for (std::size_t iq = 0; iq < st.q_grid.size(); ++iq) {
        const double q = st.q_grid[iq];
        const double av = a(q, node), a1v = a1(q, node);
        if (a1v < -3.0 - 1e-12 || a1v > -1.0 + 1e-12)
          throw precondition_error("exact_tilde_solution: A1 out of [-3,-1]");
        st.mu[st.idx(is, iq, node)] = a1v * std::exp(-0.5 * gv * av * s);
        st.Uq[st.idx(is, iq, node)] = a2(q, node) * std::exp(0.5 * gv * av * s);
        st.U[st.idx(is, iq, node)] = -cum[iq];
      }
    }
  }
  return st;
}

// Residual of the reduced system for a closed-form state, by analytic
// differentiation (not finite differences): for kind hat/tilde,
// d_s mu = -(G A / 2) mu and the equation demands (1/4) G mu^2 U_q.
inline double reduced_residual(const ReducedState& st, const ProfileFn& a,
                               const GFn& g) {
  double worst = 0.0;
  for (std::size_t node = 0; node < st.n_omega; ++node) {
    const double gv = g(node);
    for (std::size_t is = 0; is < st.s_grid.size(); ++is)
      for (std::size_t iq = 0; iq < st.q_grid.size(); ++iq) {
        const double av = a(st.q_grid[iq], node);
        const double mu = st.mu[st.idx(is, iq, node)];
        const double uq = st.Uq[st.idx(is, iq, node)];
        const double dsmu = -0.5 * gv * av * mu;
        worst = std::max(worst, std::abs(dsmu - 0.25 * gv * mu * mu * uq));
      }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Classical RK4 with step-doubling control on the per-node system
//   mu' = (G/4) mu^2 Uq,  Uq' = -(G/4) mu Uq^2.

struct OdeOutcome {
  ReducedState state;
  bool blew_up = false;
  double blowup_s = 0.0;
};

inline OdeOutcome integrate_reduced_ode(const std::vector<double>& mu0,
                                        const std::vector<double>& uq0,
                                        const GFn& g,
                                        const std::vector<double>& q_grid,
                                        const std::vector<double>& s_grid,
                                        double local_tol = 1e-10,
                                        double mu_bound = 1e6) {
  if (mu0.size() != q_grid.size() || uq0.size() != q_grid.size())
    throw precondition_error("integrate_reduced_ode: size mismatch");
  OdeOutcome out;
  ReducedState& st = out.state;
  st.s_grid = s_grid;
  st.q_grid = q_grid;
  st.n_omega = 1;
  st.source_kind = SourceKind::ode;
  st.allocate();

  auto rhs = [](double gv, double mu, double uq, double* dmu, double* duq) {
    *dmu = 0.25 * gv * mu * mu * uq;
    *duq = -0.25 * gv * mu * uq * uq;
  };
  auto rk4 = [&](double gv, double h, double& mu, double& uq) {
    double k1m, k1u, k2m, k2u, k3m, k3u, k4m, k4u;
    rhs(gv, mu, uq, &k1m, &k1u);
    rhs(gv, mu + 0.5 * h * k1m, uq + 0.5 * h * k1u, &k2m, &k2u);
    rhs(gv, mu + 0.5 * h * k2m, uq + 0.5 * h * k2u, &k3m, &k3u);
    rhs(gv, mu + h * k3m, uq + h * k3u, &k4m, &k4u);
    mu += h / 6.0 * (k1m + 2 * k2m + 2 * k3m + k4m);
    uq += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
  };

  const double gv = g(0);
  for (std::size_t iq = 0; iq < q_grid.size(); ++iq) {
    double mu = mu0[iq], uq = uq0[iq];
    st.mu[st.idx(0, iq, 0)] = mu;
    st.Uq[st.idx(0, iq, 0)] = uq;
    for (std::size_t is = 0; is + 1 < s_grid.size(); ++is) {
      const double s0 = s_grid[is], s1 = s_grid[is + 1];
      double s = s0;
      double h = (s1 - s0);
      while (s < s1 - 1e-15) {
        h = std::min(h, s1 - s);
        // step doubling: one h-step vs two h/2-steps
        double mu_a = mu, uq_a = uq;
        rk4(gv, h, mu_a, uq_a);
        double mu_b = mu, uq_b = uq;
        rk4(gv, 0.5 * h, mu_b, uq_b);
        rk4(gv, 0.5 * h, mu_b, uq_b);
        const double err =
            std::max(std::abs(mu_a - mu_b), std::abs(uq_a - uq_b));
        if (err > local_tol && h > 1e-12) {
          h *= 0.5;
          continue;
        }
        mu = mu_b;
        uq = uq_b;
        s += h;
        if (err < 0.02 * local_tol) h *= 2.0;
        if (std::abs(mu) > mu_bound) {
          out.blew_up = true;
          out.blowup_s = s;
          return out;
        }
      }
      st.mu[st.idx(is + 1, iq, 0)] = mu;
      st.Uq[st.idx(is + 1, iq, 0)] = uq;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Radiation profiles on a q-grid (sphere-constant or full sphere).

enum class ProfileKind { A, A1, A2, Ahat, AI, B, BI };

struct RadiationProfile {
  ProfileKind kind = ProfileKind::Ahat;
  std::vector<double> q;                 // increasing
  std::size_t n_omega = 1;
  std::vector<double> values;            // [iq * n_omega + node]
  const sphere::SphereGrid* grid = nullptr;  // when n_omega > 1
  double support_hi = 2.0;
  double decay_exponent = 0.0;           // fitted diagnostic
  bool clamped_warning = false;

  double value(std::size_t iq, std::size_t node = 0) const {
    return values[iq * n_omega + node];
  }
  double& value(std::size_t iq, std::size_t node = 0) {
    return values[iq * n_omega + node];
  }

  static RadiationProfile from_samples(ProfileKind k, std::vector<double> qg,
                                       std::vector<double> vals,
                                       double support_hi) {
    RadiationProfile p;
    p.kind = k;
    p.q = std::move(qg);
    p.values = std::move(vals);
    p.n_omega = 1;
    p.support_hi = support_hi;
    if (p.values.size() != p.q.size())
      throw precondition_error("RadiationProfile: size mismatch");
    p.enforce_invariants();
    return p;
  }

  double tail_value() const { return kind == ProfileKind::A1 ? -2.0 : 0.0; }

  void enforce_invariants() {
    if (kind == ProfileKind::A1) {
      for (auto& v : values) {
        if (v < -3.0 || v > -1.0) {
          clamped_warning = true;
          v = std::clamp(v, -3.0, -1.0);
        }
      }
    }
  }

  // Fitted tail decay rate of |values| over the most negative 40% of q.
  void fit_decay() {
    std::vector<double> xs, ys;
    const double q_lo = q.front(), q_hi = q_lo + 0.4 * (q.back() - q_lo);
    for (std::size_t i = 0; i < q.size(); ++i)
      if (q[i] <= q_hi && q[i] < -1.0) {
        xs.push_back(-q[i]);
        ys.push_back(value(i, 0) - tail_value());
      }
    if (xs.size() >= 3) {
      try {
        decay_exponent = fit_power_law(xs, ys, 1e-14).slope;
      } catch (const precondition_error&) {
        decay_exponent = 0.0;
      }
    }
  }

  ProfileFn fn(std::size_t node = 0) const {
    ProfileFn p;
    p.support_hi = support_hi;
    p.tail_value = tail_value();
    p.sphere_const = (n_omega == 1);
    p.breakpoints = q;
    std::vector<Pchip> interps;
    if (n_omega == 1) {
      interps.emplace_back(q, values);
    } else {
      for (std::size_t n = 0; n < n_omega; ++n) {
        std::vector<double> col(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) col[i] = value(i, n);
        interps.emplace_back(q, col);
      }
    }
    const double qlo = q.front(), qhi = q.back();
    const double tail = tail_value();
    p.f = [interps = std::move(interps), qlo, qhi, tail](
              double x, std::size_t n) {
      if (x < qlo || x > qhi) return tail;
      return interps[n](x);
    };
    (void)node;
    return p;
  }
};

// ---------------------------------------------------------------------------
// Jacobian factor J = -2 / (A1 exp(G A delta / 2)).

inline RadiationProfile jacobian_j(const RadiationProfile& a,
                                   const RadiationProfile& a1, const GFn& g,
                                   double delta) {
  if (a.q != a1.q || a.n_omega != a1.n_omega)
    throw precondition_error("jacobian_j: incompatible profiles");
  RadiationProfile j = a;
  j.kind = ProfileKind::BI;  // generic carrier; tail value handled below
  for (std::size_t iq = 0; iq < a.q.size(); ++iq)
    for (std::size_t node = 0; node < a.n_omega; ++node) {
      const double a1v = a1.value(iq, node);
      if (a1v == 0.0) throw precondition_error("jacobian_j: A1 vanishes");
      j.value(iq, node) =
          -2.0 / (a1v * std::exp(0.5 * g(node) * a.value(iq, node) * delta));
    }
  return j;
}

// ---------------------------------------------------------------------------
// The characteristic-data integral L(t, omega).

struct CharDataL {
  std::vector<double> t_grid;
  std::size_t n_omega = 1;
  std::vector<double> values;  // [it * n_omega + node]
  const sphere::SphereGrid* grid = nullptr;
  std::string construction;    // "from_Ahat" or "from_A_A1_J"
  double quad_error = 0.0;     // accumulated quadrature error estimate
  double tail_estimate = 0.0;  // truncated |q| tail bound from fitted decay

  double value(std::size_t it, std::size_t node = 0) const {
    return values[it * n_omega + node];
  }
  double& value(std::size_t it, std::size_t node = 0) {
    return values[it * n_omega + node];
  }
  double max_abs() const {
    double m = 0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

struct FrkLParams {
  double epsilon = 0.1;
  double delta = 0.0;       // gauge offset; s = eps ln t - delta
  double q_lo = -200.0;     // integration window when profile is analytic
  double quad_tol = 1e-12;
};

// Ahat form: L(t,w) = -(eps^2/2) G int Ahat^2 exp(G Ahat (eps ln t - delta)/2) dp.
inline CharDataL frkl_from_ahat(const ProfileFn& ahat, const GFn& g,
                                const std::vector<double>& t_grid,
                                const FrkLParams& par,
                                const sphere::SphereGrid* grid = nullptr) {
  for (double t : t_grid)
    if (t < 1.0) throw precondition_error("frkl: t must be >= 1");
  CharDataL L;
  L.t_grid = t_grid;
  L.construction = "from_Ahat";
  L.n_omega = (ahat.sphere_const && g.is_const) ? 1 : (grid ? grid->n_nodes() : 1);
  L.grid = grid;
  L.values.assign(t_grid.size() * L.n_omega, 0.0);
  const double lo = ahat.breakpoints.empty() ? par.q_lo : ahat.breakpoints.front();
  for (std::size_t node = 0; node < L.n_omega; ++node) {
    const double gv = g(node);
    if (gv == 0.0) continue;
    for (std::size_t it = 0; it < t_grid.size(); ++it) {
      const double s = par.epsilon * std::log(t_grid[it]) - par.delta;
      auto integrand = [&](double p) {
        const double a = ahat(p, node);
        return gv * a * a * std::exp(0.5 * gv * a * s);
      };
      L.value(it, node) = -0.5 * sq(par.epsilon) *
                          integrate_q(integrand, lo, ahat.support_hi,
                                      ahat.breakpoints, par.quad_tol);
    }
  }
  return L;
}

// (A, A1, J) form: L(t,w) = -(eps^2/2) G int A^2 exp(G A eps ln t / 2) J dp.
inline CharDataL frkl_from_a_a1(const ProfileFn& a, const ProfileFn& a1,
                                const GFn& g, const std::vector<double>& t_grid,
                                const FrkLParams& par,
                                const sphere::SphereGrid* grid = nullptr) {
  for (double t : t_grid)
    if (t < 1.0) throw precondition_error("frkl: t must be >= 1");
  CharDataL L;
  L.t_grid = t_grid;
  L.construction = "from_A_A1_J";
  L.n_omega = (a.sphere_const && g.is_const) ? 1 : (grid ? grid->n_nodes() : 1);
  L.grid = grid;
  L.values.assign(t_grid.size() * L.n_omega, 0.0);
  const double lo = a.breakpoints.empty() ? par.q_lo : a.breakpoints.front();
  for (std::size_t node = 0; node < L.n_omega; ++node) {
    const double gv = g(node);
    if (gv == 0.0) continue;
    for (std::size_t it = 0; it < t_grid.size(); ++it) {
      const double lnt = std::log(t_grid[it]);
      auto integrand = [&](double p) {
        const double av = a(p, node);
        const double a1v = a1(p, node);
        if (a1v == 0.0) throw precondition_error("frkl: A1 vanishes");
        const double jv = -2.0 / (a1v * std::exp(0.5 * gv * av * par.delta));
        return gv * av * av * std::exp(0.5 * gv * av * par.epsilon * lnt) * jv;
      };
      L.value(it, node) = -0.5 * sq(par.epsilon) *
                          integrate_q(integrand, lo, a.support_hi,
                                      a.breakpoints, par.quad_tol);
    }
  }
  return L;
}

// ---------------------------------------------------------------------------
// Commuted asymptotic profiles.
//
// UFamily stores d_s^m U_I at a reference s for m = 0..M on a q-grid x
// sphere tensor; the vector-field steps are exact in s (each weighted step
// consumes one derivative order), spectral on the sphere, and use local
// 5-point differentiation in q.

namespace detail {

// Derivative weights by Lagrange differentiation on 5 neighbors.
inline std::vector<double> d_dq(const std::vector<double>& x,
                                const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> out(n, 0.0);
  if (n < 5) throw precondition_error("d_dq: need >= 5 points");
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = std::min(std::max<std::ptrdiff_t>(std::ptrdiff_t(i) - 2, 0),
                             std::ptrdiff_t(n) - 5);
    double acc = 0.0;
    for (std::size_t a = 0; a < 5; ++a) {
      // derivative at x[i] of the Lagrange cardinal through x[c..c+4]
      double wsum = 0.0;
      for (std::size_t b = 0; b < 5; ++b) {
        if (b == a) continue;
        double prod = 1.0;
        for (std::size_t k = 0; k < 5; ++k) {
          if (k == a || k == b) continue;
          prod *= (x[i] - x[c + k]) / (x[c + a] - x[c + k]);
        }
        wsum += prod / (x[c + a] - x[c + b]);
      }
      acc += wsum * y[c + a];
    }
    out[i] = acc;
  }
  return out;
}

}  // namespace detail

enum class VectorField { S, Omega12, Omega13, Omega23, Boost1, Boost2, Boost3,
                         Partial };

struct UFamily {
  std::vector<double> q_grid;
  const sphere::SphereGrid* grid = nullptr;  // null => sphere-constant
  double epsilon = 0.1;
  std::size_t depth = 0;  // number of recursion steps applied
  // tensors[m][iq * n_omega + node] = d_s^m U_I at the reference s
  std::vector<std::vector<double>> tensors;

  std::size_t n_omega() const { return grid ? grid->n_nodes() : 1; }
  std::size_t orders() const { return tensors.size(); }

  double at(std::size_t m, std::size_t iq, std::size_t node = 0) const {
    return tensors[m][iq * n_omega() + node];
  }
};

struct AProfileTensor {
  std::vector<double> q_grid;
  const sphere::SphereGrid* grid = nullptr;
  std::vector<double> values;  // [iq * n_omega + node]
  std::size_t n_omega() const { return grid ? grid->n_nodes() : 1; }
  double at(std::size_t iq, std::size_t node = 0) const {
    return values[iq * n_omega() + node];
  }
};

// Base family from scattering data: d_s^m U = -int_q A (G A / 2)^m e^{GAs/2} dp.
inline UFamily base_u_family(const ProfileFn& ahat, const GFn& g, double s_ref,
                             double epsilon, std::size_t orders,
                             const std::vector<double>& q_grid,
                             const sphere::SphereGrid* grid = nullptr,
                             double quad_tol = 1e-12) {
  UFamily F;
  F.q_grid = q_grid;
  F.grid = (ahat.sphere_const && g.is_const) ? nullptr : grid;
  F.epsilon = epsilon;
  F.tensors.assign(orders + 1, {});
  const std::size_t nom = F.n_omega();
  for (auto& t : F.tensors) t.assign(q_grid.size() * nom, 0.0);
  for (std::size_t node = 0; node < nom; ++node) {
    const double gv = g(node);
    for (std::size_t m = 0; m <= orders; ++m) {
      auto integrand = [&](double p) {
        const double a = ahat(p, node);
        return a * std::pow(0.5 * gv * a, double(m)) *
               std::exp(0.5 * gv * a * s_ref);
      };
      auto cum = cumulative_from_hi(integrand, q_grid, ahat.support_hi);
      for (std::size_t iq = 0; iq < q_grid.size(); ++iq)
        F.tensors[m][iq * nom + node] = -cum[iq];
    }
  }
  return F;
}

inline AProfileTensor base_a_profile(const ProfileFn& ahat, const GFn& g,
                                     const std::vector<double>& q_grid,
                                     const sphere::SphereGrid* grid = nullptr) {
  AProfileTensor A;
  A.q_grid = q_grid;
  A.grid = (ahat.sphere_const && g.is_const) ? nullptr : grid;
  const std::size_t nom = A.n_omega();
  A.values.assign(q_grid.size() * nom, 0.0);
  for (std::size_t node = 0; node < nom; ++node)
    for (std::size_t iq = 0; iq < q_grid.size(); ++iq)
      A.values[iq * nom + node] = -2.0 * ahat(q_grid[iq], node);
  return A;
}

namespace detail {

// Angular derivative d_{omega_i} applied per q-row of a tensor.
inline std::vector<double> angular_rows(const std::vector<double>& ten,
                                        const std::vector<double>& q_grid,
                                        const sphere::SphereGrid& g, int axis) {
  std::vector<double> out(ten.size(), 0.0);
  const std::size_t nom = g.n_nodes();
  std::vector<double> row(nom);
  for (std::size_t iq = 0; iq < q_grid.size(); ++iq) {
    for (std::size_t n = 0; n < nom; ++n) row[n] = ten[iq * nom + n];
    sphere::SphereField sf(g, row);
    auto d = sphere::angular_derivative(sf, axis);
    for (std::size_t n = 0; n < nom; ++n) out[iq * nom + n] = d.values()[n];
  }
  return out;
}

inline std::vector<double> q_deriv_rows(const std::vector<double>& ten,
                                        const std::vector<double>& q_grid,
                                        std::size_t nom) {
  std::vector<double> out(ten.size(), 0.0);
  std::vector<double> col(q_grid.size());
  for (std::size_t n = 0; n < nom; ++n) {
    for (std::size_t iq = 0; iq < q_grid.size(); ++iq)
      col[iq] = ten[iq * nom + n];
    auto d = d_dq(q_grid, col);
    for (std::size_t iq = 0; iq < q_grid.size(); ++iq)
      out[iq * nom + n] = d[iq];
  }
  return out;
}

inline double omega_component(const sphere::SphereGrid& g, std::size_t node,
                              int axis) {
  const std::size_t i = node / g.n_phi(), j = node % g.n_phi();
  return g.omega(i, j)[axis - 1];
}

}  // namespace detail

// One recursion step on the U-family. Weighted fields consume one s-order.
inline UFamily recursion_step_u(const UFamily& in, VectorField z) {
  if (in.depth >= 3)
    throw precondition_error("recursion_step_u: |I| > 3 refused");
  UFamily out;
  out.q_grid = in.q_grid;
  out.grid = in.grid;
  out.epsilon = in.epsilon;
  out.depth = in.depth + 1;
  const std::size_t nom = in.n_omega();

  if (z == VectorField::Partial) {
    out.tensors.assign(in.orders() > 0 ? in.orders() - 1 : 0,
                       std::vector<double>(in.q_grid.size() * nom, 0.0));
    return out;
  }
  if (in.orders() < 2)
    throw precondition_error("recursion_step_u: s-derivative budget exhausted");
  const std::size_t mout = in.orders() - 1;
  out.tensors.assign(mout, std::vector<double>(in.q_grid.size() * nom, 0.0));

  const bool rot = (z == VectorField::Omega12 || z == VectorField::Omega13 ||
                    z == VectorField::Omega23);
  const bool boost = (z == VectorField::Boost1 || z == VectorField::Boost2 ||
                      z == VectorField::Boost3);
  if ((rot || boost) && !in.grid && rot) {
    // rotations kill sphere-constant profiles
    return out;
  }
  int ai = 0, aj = 0;
  if (z == VectorField::Omega12) ai = 1, aj = 2;
  if (z == VectorField::Omega13) ai = 1, aj = 3;
  if (z == VectorField::Omega23) ai = 2, aj = 3;
  if (z == VectorField::Boost1) ai = 1;
  if (z == VectorField::Boost2) ai = 2;
  if (z == VectorField::Boost3) ai = 3;

  for (std::size_t m = 0; m < mout; ++m) {
    const auto& Tm = in.tensors[m];
    const auto& Tm1 = in.tensors[m + 1];
    auto dq = detail::q_deriv_rows(Tm, in.q_grid, nom);
    if (z == VectorField::S) {
      for (std::size_t iq = 0; iq < in.q_grid.size(); ++iq)
        for (std::size_t n = 0; n < nom; ++n) {
          const std::size_t k = iq * nom + n;
          out.tensors[m][k] = in.epsilon * Tm1[k] +
                              in.q_grid[iq] * dq[k] - Tm[k];
        }
    } else if (rot) {
      if (!in.grid) continue;  // zero
      auto di = detail::angular_rows(Tm, in.q_grid, *in.grid, aj);
      auto dj = detail::angular_rows(Tm, in.q_grid, *in.grid, ai);
      for (std::size_t iq = 0; iq < in.q_grid.size(); ++iq)
        for (std::size_t n = 0; n < nom; ++n) {
          const std::size_t k = iq * nom + n;
          const double wi = detail::omega_component(*in.grid, n, ai);
          const double wj = detail::omega_component(*in.grid, n, aj);
          out.tensors[m][k] = wi * di[k] - wj * dj[k];
        }
    } else if (boost) {
      if (!in.grid)
        throw precondition_error(
            "recursion_step_u: boost on sphere-constant family needs a grid");
      auto dang = detail::angular_rows(Tm, in.q_grid, *in.grid, ai);
      for (std::size_t iq = 0; iq < in.q_grid.size(); ++iq)
        for (std::size_t n = 0; n < nom; ++n) {
          const std::size_t k = iq * nom + n;
          const double wi = detail::omega_component(*in.grid, n, ai);
          out.tensors[m][k] = in.epsilon * wi * Tm1[k] -
                              in.q_grid[iq] * wi * dq[k] + dang[k] -
                              wi * Tm[k];
        }
    }
  }
  return out;
}

inline AProfileTensor recursion_step_a(const AProfileTensor& in, VectorField z) {
  AProfileTensor out;
  out.q_grid = in.q_grid;
  out.grid = in.grid;
  const std::size_t nom = in.n_omega();
  out.values.assign(in.values.size(), 0.0);
  if (z == VectorField::Partial) return out;

  const bool rot = (z == VectorField::Omega12 || z == VectorField::Omega13 ||
                    z == VectorField::Omega23);
  const bool boost = (z == VectorField::Boost1 || z == VectorField::Boost2 ||
                      z == VectorField::Boost3);
  int ai = 0, aj = 0;
  if (z == VectorField::Omega12) ai = 1, aj = 2;
  if (z == VectorField::Omega13) ai = 1, aj = 3;
  if (z == VectorField::Omega23) ai = 2, aj = 3;
  if (z == VectorField::Boost1) ai = 1;
  if (z == VectorField::Boost2) ai = 2;
  if (z == VectorField::Boost3) ai = 3;

  auto dq = detail::q_deriv_rows(in.values, in.q_grid, nom);
  if (z == VectorField::S) {
    for (std::size_t iq = 0; iq < in.q_grid.size(); ++iq)
      for (std::size_t n = 0; n < nom; ++n)
        out.values[iq * nom + n] = in.q_grid[iq] * dq[iq * nom + n];
  } else if (rot) {
    if (!in.grid) return out;
    auto di = detail::angular_rows(in.values, in.q_grid, *in.grid, aj);
    auto dj = detail::angular_rows(in.values, in.q_grid, *in.grid, ai);
    for (std::size_t iq = 0; iq < in.q_grid.size(); ++iq)
      for (std::size_t n = 0; n < nom; ++n) {
        const std::size_t k = iq * nom + n;
        out.values[k] = detail::omega_component(*in.grid, n, ai) * di[k] -
                        detail::omega_component(*in.grid, n, aj) * dj[k];
      }
  } else if (boost) {
    if (!in.grid)
      throw precondition_error("recursion_step_a: boost needs a sphere grid");
    auto dang = detail::angular_rows(in.values, in.q_grid, *in.grid, ai);
    for (std::size_t iq = 0; iq < in.q_grid.size(); ++iq)
      for (std::size_t n = 0; n < nom; ++n) {
        const std::size_t k = iq * nom + n;
        const double wi = detail::omega_component(*in.grid, n, ai);
        out.values[k] = -in.q_grid[iq] * wi * dq[k] + dang[k] -
                        2.0 * wi * in.values[k];
      }
  }
  return out;
}

// lim_{q -> -inf} d_s^m U_I, read at the most negative grid node.
inline double u_family_limit(const UFamily& f, std::size_t m,
                             std::size_t node = 0) {
  if (m >= f.orders())
    throw precondition_error("u_family_limit: order out of range");
  return f.at(m, 0, node);
}

}  // namespace wavetail::reduced
