#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "wavetail/linwave.hpp"

using namespace wavetail;
using namespace wavetail::linwave;

namespace {

// Synthetic sphere-constant L0(rho), decaying, O(1e-2) scale.
double synth_l0(double rho) { return -0.01 * rho * std::exp(-rho / 8.0); }

std::vector<double> data_t_grid(double t_hi) {
  return linspace(4.0, t_hi, std::size_t(t_hi - 4.0) * 4 + 1);
}

// Cone data for one mode: f(t) = chi_{>10}(t) L0(t) / t.
std::vector<double> mode_data(const std::vector<double>& tg) {
  std::vector<double> f(tg.size());
  for (std::size_t i = 0; i < tg.size(); ++i)
    f[i] = chi_gt(10.0, tg[i]) * synth_l0(tg[i]) / tg[i];
  return f;
}

}  // namespace

TEST_CASE("cone data from L: zeros, sphere-constant, cutoff", "[linwave]") {
  reduced::CharDataL L;
  L.t_grid = {3.0, 4.0, 20.0, 40.0};
  L.n_omega = 1;
  L.values = {0.5, 0.7, -0.3, -0.2};  // arbitrary
  auto c = cone_data_from_frkl(L);
  CHECK(c.l0[0] == 0.0);  // t = 3 < 5: chi kills it
  CHECK(c.l0[1] == 0.0);  // t = 4 < 5
  CHECK(std::abs(c.l0[2] - (-0.3) / 20.0) < 1e-12);  // chi == 1 at t = 20
  for (const auto& v : c.l1)
    for (double x : v) CHECK(x == 0.0);

  reduced::CharDataL Lz = L;
  Lz.values = {0, 0, 0, 0};
  auto cz = cone_data_from_frkl(Lz);
  for (double x : cz.l0) CHECK(x == 0.0);
}

TEST_CASE("commuted cone data: zero and power rule", "[linwave]") {
  auto tg = logspace(10.0, 100.0, 200);
  std::vector<double> zero(tg.size(), 0.0), inv(tg.size());
  for (std::size_t i = 0; i < tg.size(); ++i) inv[i] = 1.0 / tg[i];
  auto cz = commuted_mode_data_s(tg, zero);
  for (double v : cz) CHECK(v == 0.0);
  auto cs = commuted_mode_data_s(tg, inv);
  for (std::size_t i = 2; i + 2 < tg.size(); ++i)
    CHECK(std::abs(cs[i] + 1.0 / tg[i]) < 2e-8);
}

TEST_CASE("goursat: zero data stays zero", "[linwave]") {
  auto tg = data_t_grid(40.0);
  std::vector<double> zero(tg.size(), 0.0);
  GoursatParams gp;
  gp.h = 0.2;
  gp.pbar_max = 20.0;
  gp.sbar_max = 80.0;
  auto mw = goursat_solve_mode(1, tg, zero, gp);
  for (std::size_t i = 0; i <= mw.np(); ++i)
    for (std::size_t j = 0; j <= mw.ns(); ++j) CHECK(mw.at(i, j) == 0.0);
}

TEST_CASE("goursat l=0 matches the closed form at second order", "[linwave]") {
  auto tg = data_t_grid(60.0);
  auto f = mode_data(tg);
  auto err_at = [&](double h) {
    GoursatParams gp;
    gp.h = h;
    gp.pbar_max = 56.0;
    gp.sbar_max = 120.0;
    auto data_fn = [&](double t) {
      return chi_gt(10.0, t) * synth_l0(t) / t;
    };
    auto mw = goursat_solve_mode(0, data_fn, gp);
    double e = 0.0;
    for (double t : {30.0, 45.0, 55.0})
      for (double r = 1.0; r < 14.0; r += 1.7) {
        const double got = mw.sample_w(t, r);
        const double ref = v0_closed_form_rv(synth_l0, t, r);
        e = std::max(e, std::abs(got - ref));
      }
    return e;
  };
  // The l = 0 double-null march telescopes exactly, so the only h-dependence
  // is the cone-integral quadrature; agreement is far below the O(h^2) bound.
  const double e1 = err_at(0.2), e2 = err_at(0.1), e3 = err_at(0.05);
  CHECK(e1 < 0.5 * sq(0.2));
  CHECK(e2 < 1e-10);
  CHECK(e3 < 1e-10);
}

TEST_CASE("goursat reproduces its cone data", "[linwave]") {
  auto tg = data_t_grid(60.0);
  auto f = mode_data(tg);
  GoursatParams gp;
  gp.h = 0.1;
  gp.pbar_max = 20.0;
  gp.sbar_max = 120.0;
  auto m0 = goursat_solve_mode(0, tg, f, gp);
  auto m2 = goursat_solve_mode(2, tg, f, gp);
  CHECK(cone_reproduction_error(m0, tg, f) < 5e-5);
  CHECK(cone_reproduction_error(m2, tg, f) < 5e-5);
}

TEST_CASE("conserved quantity: zero, l=0 paper value, l=1/2 drift order",
          "[linwave]") {
  auto tg = data_t_grid(60.0);
  auto f = mode_data(tg);

  // zero solution
  std::vector<double> zero(tg.size(), 0.0);
  GoursatParams gp;
  gp.h = 0.1;
  gp.pbar_max = 30.0;
  gp.sbar_max = 120.0;
  auto mz = goursat_solve_mode(0, tg, zero, gp);
  auto qz = conserved_quantity(mz);
  CHECK(qz.drift == 0.0);

  // l = 0: the quantity equals 2 chi L0((t+r)/2) / (t+r)
  auto m0 = goursat_solve_mode(0, tg, f, gp);
  auto q0 = conserved_quantity(m0);
  CHECK(q0.drift < 5e-6);
  for (std::size_t b = 0; b < q0.sbar.size(); ++b) {
    const double sb = q0.sbar[b];
    double got = std::nan("");
    for (std::size_t a = 0; a < q0.pbar.size(); ++a)
      if (!std::isnan(q0.value(a, b))) {
        got = q0.value(a, b);
        break;
      }
    if (std::isnan(got)) continue;
    const double expect = 2.0 * chi_gt(10.0, sb / 2.0) * synth_l0(sb / 2.0) / sb;
    CHECK(std::abs(got - expect) < 5e-5);
  }

  // l = 1, 2: drift converges to zero at second order
  for (std::size_t ell : {1u, 2u}) {
    auto drift_at = [&](double h) {
      GoursatParams g2;
      g2.h = h;
      g2.pbar_max = 30.0;
      g2.sbar_max = 120.0;
      auto mw = goursat_solve_mode(ell, tg, f, g2);
      return conserved_quantity(mw).drift;
    };
    const double d1 = drift_at(0.2), d2 = drift_at(0.1);
    const double p = observed_order(d1, d2);
    INFO("ell=" << ell << " d1=" << d1 << " d2=" << d2);
    CHECK(p > 1.5);
    CHECK(p < 2.6);
  }
}

TEST_CASE("v0 closed form basics", "[linwave]") {
  auto zerofn = [](double) { return 0.0; };
  CHECK(v0_closed_form(zerofn, 30.0, 4.0) == 0.0);
  // r -> 0 limit
  const double v_axis = v0_closed_form(synth_l0, 40.0, 0.0);
  CHECK(std::abs(v_axis - 2.0 * synth_l0(20.0) / 40.0) < 1e-14);
  const double v_near = v0_closed_form(synth_l0, 40.0, 1e-4);
  CHECK(std::abs(v_near - v_axis) < 1e-8);

  // reference quadrature at 10x resolution (composite Simpson)
  const double t = 37.0, r = 9.0;
  const double lo = 0.5 * (t - r), hi = 0.5 * (t + r);
  const std::size_t n = 1 << 16;
  const double h = (hi - lo) / double(n);
  auto g = [&](double p) { return chi_gt(10.0, p) * synth_l0(p) / p; };
  double acc = g(lo) + g(hi);
  for (std::size_t k = 1; k < n; ++k)
    acc += g(lo + h * double(k)) * ((k % 2) ? 4.0 : 2.0);
  acc *= h / 3.0;
  CHECK(std::abs(v0_closed_form_rv(synth_l0, t, r) - acc) < 1e-10);
}

TEST_CASE("radiation field of the l=0 mode matches the analytic formula",
          "[linwave]") {
  auto tg = data_t_grid(150.0);
  auto f = mode_data(tg);
  GoursatParams gp;
  gp.h = 0.1;
  gp.pbar_max = 46.0;
  gp.sbar_max = 300.0;
  auto mw = goursat_solve_mode(0, tg, f, gp);
  const double eps = 0.1;
  auto pg = linspace(-42.0, -21.0, 22);
  auto B = extract_b_mode(mw, eps, pg);
  double worst = 0.0;
  for (std::size_t k = 0; k < pg.size(); ++k) {
    const double p = pg[k];
    const double expect =
        -chi_gt(10.0, -p / 2.0) * synth_l0(-p / 2.0) / (eps * p);
    worst = std::max(worst, std::abs(B[k] - expect) / std::abs(expect));
  }
  CHECK(worst < 1e-3);

  // cross-check: v(t, 0) reconstructed from B via the plane-wave formula
  // equals the closed form at the axis (B0 = -2B).
  reduced::RadiationProfile Bp;
  Bp.kind = reduced::ProfileKind::B;
  Bp.q = pg;
  Bp.values = B;
  Bp.n_omega = 1;
  Bp.support_hi = 0.0;
  for (double t : {25.0, 35.0, 41.0}) {
    const double from_b = plane_wave_eval(Bp, eps, t, 0.0, {0, 0, 1});
    const double direct = v0_closed_form(synth_l0, t, 0.0);
    CHECK(std::abs(from_b - direct) < 1e-3 * std::abs(direct) + 1e-12);
  }
}

TEST_CASE("plane wave eval: zero profile and axis collapse", "[linwave]") {
  reduced::RadiationProfile z;
  z.kind = reduced::ProfileKind::BI;
  z.q = linspace(-40.0, -5.0, 30);
  z.values.assign(30, 0.0);
  z.n_omega = 1;
  CHECK(plane_wave_eval(z, 0.1, 20.0, 3.0, {0, 0, 1}) == 0.0);

  // x = 0, sphere-constant B0: value is -eps B0(-t)
  reduced::RadiationProfile b0;
  b0.kind = reduced::ProfileKind::BI;
  b0.q = linspace(-40.0, -5.0, 200);
  b0.values.resize(200);
  for (std::size_t i = 0; i < 200; ++i)
    b0.values[i] = std::exp(b0.q[i] / 10.0);
  b0.n_omega = 1;
  b0.support_hi = 0.0;
  const double got = plane_wave_eval(b0, 0.1, 20.0, 0.0, {0, 0, 1});
  CHECK(std::abs(got - (-0.1 * std::exp(-2.0))) < 1e-8);
}

TEST_CASE("plane wave representation matches mode synthesis", "[linwave]") {
  // modes l = 0, 1 (i=3), 2 (i=4) with distinct synthetic data
  auto tg = data_t_grid(200.0);
  ConeData cd = ConeData::zeros(tg);
  for (std::size_t i = 0; i < tg.size(); ++i) {
    const double t = tg[i];
    const double c = chi_gt(10.0, t);
    cd.l0[i] = c * (-0.01) * t * std::exp(-t / 8.0) / t;
    cd.l1[2][i] = c * (0.02) * std::exp(-sq((t - 18.0) / 6.0)) / t;
    cd.l2[3][i] = c * (-0.015) * std::exp(-sq((t - 16.0) / 5.0)) / t;
  }
  GoursatParams gp;
  gp.h = 0.1;
  gp.pbar_max = 60.0;
  gp.sbar_max = 400.0;
  const double eps = 0.1;
  auto ms = assemble_v(cd, gp, eps);
  REQUIRE(ms.has_l0);
  REQUIRE(ms.has_l1[2]);
  REQUIRE(ms.has_l2[3]);

  sphere::SphereGrid grid(8);
  auto pg = linspace(-56.0, -10.0, 185);
  auto B = extract_b(ms, pg, &grid);

  double worst = 0.0, scale = 0.0;
  for (double t : {30.0, 38.0})
    for (double r : {2.0, 6.0, 11.0})
      for (std::size_t nth : {1ul, 4ul})
        for (std::size_t nph : {0ul, 5ul, 11ul}) {
          const auto w = grid.omega(nth, nph);
          const double direct = ms.v_at(t, r, w[0], w[1], w[2]);
          const double pw = plane_wave_eval(B, eps, t, r, w);
          worst = std::max(worst, std::abs(direct - pw));
          scale = std::max(scale, std::abs(direct));
        }
  CHECK(worst < 1e-3 * scale);
}

TEST_CASE("linearity and single-mode synthesis", "[linwave]") {
  auto tg = data_t_grid(40.0);
  ConeData cd = ConeData::zeros(tg);
  for (std::size_t i = 0; i < tg.size(); ++i)
    cd.l0[i] = chi_gt(10.0, tg[i]) * synth_l0(tg[i]) / tg[i];
  GoursatParams gp;
  gp.h = 0.2;
  gp.pbar_max = 30.0;
  gp.sbar_max = 80.0;
  auto ms = assemble_v(cd, gp, 0.1);
  // omega-independence of a pure l=0 synthesis
  const double a = ms.v_at(30.0, 5.0, 1.0, 0.0, 0.0);
  const double b = ms.v_at(30.0, 5.0, 0.0, 1.0, 0.0);
  CHECK(a == b);
  CHECK(std::abs(a - ms.l0.sample_v(30.0, 5.0)) < 1e-15);
}

TEST_CASE("forward solve oracle: zero source and solver cross-check",
          "[linwave]") {
  ForwardOracleParams p;
  p.B = 0.0;
  CHECK(forward_solve_oracle_rpsi(p, 20.0, 5.0) == 0.0);
  CHECK_THROWS_AS((forward_solve_oracle_rpsi(
                      ForwardOracleParams{1.0, 0.9, 1.0, 1e-8}, 10.0, 2.0)),
                  precondition_error);

  // thin-shell source in {1 <= t - r <= 2}: the explicit double integral
  // (inner bounds clipped to the shell support) vs the l=0 mode solver
  auto shell = [](double t, double r) {
    const double q = t - r;
    if (q <= 1.0 || q >= 2.0) return 0.0;
    const double x = 2.0 * (q - 1.5);
    return std::exp(1.0 - 1.0 / (1.0 - x * x)) / sq(jbrk(r));
  };
  auto rpsi_oracle = [&](double T, double r) {
    auto inner = [&](double s) {
      const double v = T - r + 2.0 * s;
      double lo = 0.5 * (v + 1.0), hi = 0.5 * (v + 2.0);
      lo = std::max(lo, 0.0);
      hi = std::min(hi, T - r + s);
      if (hi <= lo) return 0.0;
      return integrate(
                 [&](double sp) {
                   const double rad = v - sp;
                   return rad * shell(sp, rad);
                 },
                 lo, hi, 1e-12)
          .value;
    };
    return -integrate(inner, 0.0, r, 1e-10).value;
  };

  auto solver_err = [&](double dr) {
    LinearModeParams lp;
    lp.ell = 0;
    lp.t_max = 16.0;
    lp.r_max = 40.0;
    lp.dr = dr;
    lp.source = shell;
    auto res = evolve_linear_mode(lp);
    double e = 0.0;
    for (double r : {2.0, 5.0, 9.0}) {
      const double got = res.field.sample_w(16.0, r);
      const double ref = rpsi_oracle(16.0, r);
      e = std::max(e, std::abs(got - ref));
    }
    return e;
  };
  const double e1 = solver_err(0.04), e2 = solver_err(0.02);
  CHECK(e2 < 5e-4);
  const double ord = observed_order(e1, e2);
  CHECK(ord > 1.5);
  CHECK(ord < 2.6);

  // the envelope itself as a matched smooth source
  ForwardOracleParams env{1.0, 2.0, 1.0, 1e-10};
  LinearModeParams lp;
  lp.ell = 0;
  lp.t_max = 12.0;
  lp.r_max = 30.0;
  lp.dr = 0.02;
  lp.source = [&](double t, double r) { return forward_majorant(env, t, r); };
  auto res = evolve_linear_mode(lp);
  for (double r : {2.0, 6.0}) {
    const double got = res.field.sample_w(12.0, r);
    const double ref = forward_solve_oracle_rpsi(env, 12.0, r);
    CHECK(std::abs(got - ref) < 5e-3 * std::abs(ref));
  }
}

TEST_CASE("forward oracle bound shape is finite and stable", "[linwave]") {
  ForwardOracleParams p;
  p.B = 1.0;
  p.alpha = 2.0;
  p.eta0 = 1.0;
  double sup = 0.0;
  for (double T : {10.0, 20.0, 40.0})
    for (double r : {1.0, 3.0, 0.45 * T, 0.9 * T}) {
      const double num = std::abs(forward_solve_oracle_rpsi(p, T, r));
      const double den = forward_bound_shape(p, T, r);
      sup = std::max(sup, num / den);
    }
  CHECK(sup < 50.0);   // finite, O(1)-ish constant
  CHECK(sup > 1e-3);   // and not trivially zero
}

TEST_CASE("cutoff commutator identity", "[linwave]") {
  // smooth phi: residual at second order in the patch spacing
  auto phi = [](double t, double r) {
    return std::sin(0.3 * t) * std::cos(0.2 * r) + 0.1 * t * r;
  };
  PatchSpec ps;
  ps.t0 = 6.0;
  ps.t1 = 14.0;
  ps.r0 = 2.0;
  ps.r1 = 10.0;
  ps.h = 0.02;
  const double res1 = cutoff_commutator_residual(phi, 4.0, ps);
  PatchSpec ps2 = ps;
  ps2.h = 0.01;
  const double res2 = cutoff_commutator_residual(phi, 4.0, ps2);
  CHECK(res1 / res2 > 2.5);
  CHECK(res1 / res2 < 6.0);

  // chi == 1 throughout the patch: the identity is exactly the differencing
  // error of box(phi) - box(phi); residual collapses to roundoff scale
  PatchSpec ps3 = ps;
  ps3.t0 = 30.0;
  ps3.t1 = 36.0;
  const double res3 = cutoff_commutator_residual(phi, 4.0, ps3);
  CHECK(res3 < 1e-9);

  // support: away from {H/2 <= t-r <= H} the commutator part vanishes
  double outside = 0.0;
  cutoff_commutator_residual(phi, 4.0, ps, &outside);
  (void)outside;  // exercised via res3; kept as API smoke
}

TEST_CASE("strong Huygens principle", "[linwave]") {
  auto shell = [](double t, double r) {
    const double q = t - r;
    if (q <= 1.0 || q >= 2.0) return 0.0;
    const double x = 2.0 * (q - 1.5);
    const double xr = (r - 6.0) / 4.0;
    if (std::abs(xr) >= 1.0) return 0.0;
    return std::exp(2.0 - 1.0 / (1.0 - x * x) - 1.0 / (1.0 - xr * xr));
  };
  HuygensSource src{shell, 1.0, 12.0};
  const double T = 14.0, X = 3.0;

  // source entirely inside D_{T,X}: identical runs, deviation exactly 0
  auto inside = [&](double t, double r) {
    return in_dependence_region(T, X, t, r) ? shell(t, r) : 0.0;
  };
  auto h_in = huygens_check(0, HuygensSource{inside, 1.0, 12.0}, T, X, 0.02,
                            30.0);
  CHECK(h_in.deviation == 0.0);

  // mixed support: deviation bounded by the scheme-error estimate and
  // shrinking at roughly second order under refinement
  auto dev_at = [&](double dr) {
    return huygens_check(0, src, T, X, dr, 30.0).deviation;
  };
  auto probe_at = [&](double dr, auto&& F) {
    LinearModeParams lp;
    lp.ell = 0;
    lp.t_max = T + 0.1;
    lp.r_max = 30.0;
    lp.dr = dr;
    lp.source = F;
    return evolve_linear_mode(lp).field.sample_w(T, X) / X;
  };
  auto masked_src = [&](double t, double r) {
    const double d = outside_d_gauge(T, X, t, r);
    const double m = 1.0 - chi_gt(0.5, d);
    return m == 0.0 ? 0.0 : m * shell(t, r);
  };
  const double scheme_err =
      std::max(std::abs(probe_at(0.04, src.F) - probe_at(0.02, src.F)),
               std::abs(probe_at(0.04, masked_src) - probe_at(0.02, masked_src)));
  const double d1 = dev_at(0.04), d2 = dev_at(0.02);
  CHECK(d2 <= 10.0 * scheme_err);
  const double factor = d1 / d2;
  CHECK(factor > 2.0);
  CHECK(factor < 16.0);

  // source entirely outside D_{T,X} (smoothly masked so the grid sees a
  // smooth function): probe value itself is scheme-small
  auto outside = [&](double t, double r) {
    const double d = outside_d_gauge(T, X, t, r);
    const double m = chi_gt(0.5, d);
    return m == 0.0 ? 0.0 : m * shell(t, r);
  };
  LinearModeParams lp;
  lp.ell = 0;
  lp.t_max = T + 0.1;
  lp.r_max = 30.0;
  lp.dr = 0.02;
  lp.source = outside;
  auto res = evolve_linear_mode(lp);
  CHECK(std::abs(res.field.sample_w(T, X) / X) < 10.0 * scheme_err);
}
