#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "wavetail/cutoff.hpp"
#include "wavetail/grid.hpp"
#include "wavetail/reduced.hpp"

using namespace wavetail;
using namespace wavetail::reduced;

namespace {

// Smooth bump scattering data, compactly supported in (c - w, c + w).
ProfileFn gaussian_ahat(double h = 0.4, double c = -1.0, double w = 2.5) {
  return ProfileFn::radial(
      [h, c, w](double q) {
        const double x = (q - c) / w;
        if (std::abs(x) >= 1.0) return 0.0;
        return h * std::exp(1.0 - 1.0 / (1.0 - x * x));
      },
      c + w);
}

std::vector<double> small_s_grid() { return linspace(0.0, 1.0, 6); }
std::vector<double> small_q_grid() { return linspace(-12.0, 3.0, 31); }

}  // namespace

TEST_CASE("hat solution with zero data is vacuum", "[reduced]") {
  auto zero = ProfileFn::radial([](double) { return 0.0; }, 2.0);
  auto st = exact_hat_solution(zero, GFn::constant(2.0), small_s_grid(),
                               small_q_grid());
  for (double v : st.mu) CHECK(v == -2.0);
  for (double v : st.U) CHECK(v == 0.0);
}

TEST_CASE("closed-form solutions satisfy the reduced system exactly",
          "[reduced]") {
  auto ahat = gaussian_ahat();
  auto g = GFn::constant(2.0);
  auto st = exact_hat_solution(ahat, g, small_s_grid(), small_q_grid());
  CHECK(reduced_residual(st, ahat, g) <= 1e-12);
  CHECK(st.max_residual_mu_uq_drift() <= 1e-12);

  // tilde solution with a nontrivial A1 profile in [-3, -1]
  auto a = gaussian_ahat(0.5, 0.0, 1.8);
  auto a1 = ProfileFn::radial(
      [](double q) { return -2.0 + 0.6 * std::exp(-sq(q / 2.0)); }, 2.0, -2.0);
  auto st2 = exact_tilde_solution(a, a1, g, small_s_grid(), small_q_grid());
  CHECK(reduced_residual(st2, a, g) <= 1e-12);
  CHECK(st2.max_residual_mu_uq_drift() <= 1e-12);
}

TEST_CASE("tilde with A1 = -2 coincides with hat", "[reduced]") {
  auto a = gaussian_ahat();
  auto a1 = ProfileFn::radial([](double) { return -2.0; }, 2.0, -2.0);
  auto g = GFn::constant(1.5);
  auto sh = exact_hat_solution(a, g, small_s_grid(), small_q_grid());
  auto st = exact_tilde_solution(a, a1, g, small_s_grid(), small_q_grid());
  for (std::size_t k = 0; k < sh.mu.size(); ++k) {
    CHECK(std::abs(sh.mu[k] - st.mu[k]) < 1e-13);
    CHECK(std::abs(sh.U[k] - st.U[k]) < 1e-12);
  }
}

TEST_CASE("tilde with A = 0 freezes mu at A1", "[reduced]") {
  auto zero = ProfileFn::radial([](double) { return 0.0; }, 2.0);
  auto a1 = ProfileFn::radial(
      [](double q) { return -1.5 - 0.4 * std::exp(-q * q); }, 2.0, -2.0);
  auto st = exact_tilde_solution(zero, a1, GFn::constant(2.0), small_s_grid(),
                                 small_q_grid());
  for (std::size_t is = 0; is < st.s_grid.size(); ++is)
    for (std::size_t iq = 0; iq < st.q_grid.size(); ++iq) {
      CHECK(std::abs(st.mu[st.idx(is, iq, 0)] - a1(st.q_grid[iq])) < 1e-14);
      CHECK(std::abs(st.U[st.idx(is, iq, 0)]) < 1e-14);
    }
}

TEST_CASE("hat U against brute-force fine-grid quadrature", "[reduced]") {
  auto ahat = gaussian_ahat();
  const double gv = 2.0, s = 0.7;
  auto st = exact_hat_solution(ahat, GFn::constant(gv), {s}, {-5.0, -1.0, 0.5});
  for (std::size_t iq = 0; iq < st.q_grid.size(); ++iq) {
    // brute force: composite Simpson on 2^18 cells
    const double q = st.q_grid[iq];
    const std::size_t n = 1 << 18;
    const double hi = ahat.support_hi;
    const double h = (hi - q) / double(n);
    auto f = [&](double p) {
      const double a = ahat(p);
      return a * std::exp(0.5 * gv * a * s);
    };
    double acc = f(q) + f(hi);
    for (std::size_t k = 1; k < n; ++k)
      acc += f(q + h * double(k)) * ((k % 2) ? 4.0 : 2.0);
    acc *= -h / 3.0;
    CHECK(std::abs(st.U[st.idx(0, iq, 0)] - acc) < 1e-10);
  }
}

TEST_CASE("ODE integrator matches the closed form and conserves mu Uq",
          "[reduced]") {
  auto ahat = gaussian_ahat();
  auto g = GFn::constant(2.0);
  const auto qg = small_q_grid();
  auto s_grid = linspace(0.0, 1.0, 11);
  auto st0 = exact_hat_solution(ahat, g, {0.0}, qg);
  std::vector<double> mu0(qg.size()), uq0(qg.size());
  for (std::size_t iq = 0; iq < qg.size(); ++iq) {
    mu0[iq] = st0.mu[st0.idx(0, iq, 0)];
    uq0[iq] = st0.Uq[st0.idx(0, iq, 0)];
  }
  auto ode = integrate_reduced_ode(mu0, uq0, g, qg, s_grid);
  REQUIRE(!ode.blew_up);
  auto ref = exact_hat_solution(ahat, g, s_grid, qg);
  double err = 0.0;
  for (std::size_t is = 0; is < s_grid.size(); ++is)
    for (std::size_t iq = 0; iq < qg.size(); ++iq)
      err = std::max(err, std::abs(ode.state.mu[ode.state.idx(is, iq, 0)] -
                                   ref.mu[ref.idx(is, iq, 0)]));
  CHECK(err < 1e-9);
  CHECK(ode.state.max_residual_mu_uq_drift() < 1e-10);

  // G = 0: both fields frozen.
  auto ode0 = integrate_reduced_ode(mu0, uq0, GFn::constant(0.0), qg, s_grid);
  for (std::size_t iq = 0; iq < qg.size(); ++iq) {
    CHECK(ode0.state.mu[ode0.state.idx(s_grid.size() - 1, iq, 0)] == mu0[iq]);
    CHECK(ode0.state.Uq[ode0.state.idx(s_grid.size() - 1, iq, 0)] == uq0[iq]);
  }
}

TEST_CASE("Jacobian factor closed forms", "[reduced]") {
  auto qg = small_q_grid();
  std::vector<double> zero(qg.size(), 0.0), mtwo(qg.size(), -2.0);
  auto A = RadiationProfile::from_samples(ProfileKind::A, qg, zero, 2.0);
  auto A1 = RadiationProfile::from_samples(ProfileKind::A1, qg, mtwo, 2.0);
  auto j = jacobian_j(A, A1, GFn::constant(2.0), 0.4);
  for (std::size_t iq = 0; iq < qg.size(); ++iq)
    CHECK(std::abs(j.value(iq) - 1.0) < 1e-14);

  // general A with A1 = -2: J = exp(-G A delta / 2)
  std::vector<double> av(qg.size());
  for (std::size_t i = 0; i < qg.size(); ++i)
    av[i] = 0.5 * std::exp(-sq(qg[i]));
  auto A2p = RadiationProfile::from_samples(ProfileKind::A, qg, av, 2.0);
  auto j2 = jacobian_j(A2p, A1, GFn::constant(2.0), 0.4);
  for (std::size_t iq = 0; iq < qg.size(); ++iq)
    CHECK(std::abs(j2.value(iq) - std::exp(-0.5 * 2.0 * av[iq] * 0.4)) < 1e-14);
}

TEST_CASE("frkL: zero G, exponent-free point, and fine reference", "[reduced]") {
  auto ahat = gaussian_ahat();
  FrkLParams par;
  par.epsilon = 0.1;
  par.delta = 0.3;
  par.q_lo = -30.0;
  auto g0 = frkl_from_ahat(ahat, GFn::constant(0.0), {10.0, 100.0}, par);
  CHECK(g0.max_abs() == 0.0);

  // At t = e^{delta/eps} the exponent vanishes: L = -(eps^2/2) G int Ahat^2.
  const double t_star = std::exp(par.delta / par.epsilon);
  auto L = frkl_from_ahat(ahat, GFn::constant(2.0), {t_star}, par);
  const double ref =
      integrate([&](double p) { return sq(ahat(p)); }, -30.0, 2.0, 1e-13)
          .value;
  CHECK(std::abs(L.value(0) - (-0.5 * sq(par.epsilon) * 2.0 * ref)) < 1e-12);

  // Single bump at t = 10 e^{delta/eps} against a 10x-refined trapezoid.
  const double t10 = 10.0 * t_star;
  auto L10 = frkl_from_ahat(ahat, GFn::constant(2.0), {t10}, par);
  const double s = par.epsilon * std::log(t10) - par.delta;
  const std::size_t n = 1 << 20;
  const double lo = -30.0, hi = 2.0, h = (hi - lo) / double(n);
  double acc = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double p = lo + h * double(k);
    const double a = ahat(p);
    const double f = 2.0 * a * a * std::exp(0.5 * 2.0 * a * s);
    acc += (k == 0 || k == n) ? 0.5 * f : f;
  }
  acc *= h;
  const double ref10 = -0.5 * sq(par.epsilon) * acc;
  CHECK(std::abs(L10.value(0) - ref10) / std::abs(ref10) < 1e-8);
}

TEST_CASE("frkL A-A1-J form equals Ahat form when A1 = -2", "[reduced]") {
  auto a = gaussian_ahat(0.6, -0.5, 1.0);
  auto a1 = ProfileFn::radial([](double) { return -2.0; }, 2.0, -2.0);
  FrkLParams par;
  par.epsilon = 0.15;
  par.delta = 0.45;
  par.q_lo = -30.0;
  std::vector<double> ts = {5.0, 50.0, 500.0};
  auto La = frkl_from_ahat(a, GFn::constant(2.0), ts, par);
  auto Lj = frkl_from_a_a1(a, a1, GFn::constant(2.0), ts, par);
  for (std::size_t i = 0; i < ts.size(); ++i)
    CHECK(std::abs(La.value(i) - Lj.value(i)) / std::abs(La.value(i)) < 1e-10);
}

TEST_CASE("recursion: partial step kills the family", "[reduced]") {
  auto ahat = gaussian_ahat();
  auto qg = linspace(-20.0, 2.5, 2048);
  auto F = base_u_family(ahat, GFn::constant(2.0), 0.5, 0.1, 3, qg);
  auto Fp = recursion_step_u(F, VectorField::Partial);
  for (const auto& t : Fp.tensors)
    for (double v : t) CHECK(v == 0.0);
  auto A0 = base_a_profile(ahat, GFn::constant(2.0), qg);
  auto Ap = recursion_step_a(A0, VectorField::Partial);
  for (double v : Ap.values) CHECK(v == 0.0);
}

TEST_CASE("recursion: rotations kill sphere-constant profiles", "[reduced]") {
  auto ahat = gaussian_ahat();
  auto qg = linspace(-20.0, 2.5, 512);
  auto F = base_u_family(ahat, GFn::constant(2.0), 0.5, 0.1, 3, qg);
  auto Fr = recursion_step_u(F, VectorField::Omega12);
  for (const auto& t : Fr.tensors)
    for (double v : t) CHECK(v == 0.0);
}

TEST_CASE("recursion: scaling-step limit transform", "[reduced]") {
  // lim d_s U_S = eps lim d_s^2 U - lim d_s U, limits computed by full-line
  // quadrature as the oracle.
  auto ahat = gaussian_ahat();
  const double eps = 0.1, gv = 2.0, s = 0.5;
  auto qg = linspace(-25.0, 2.5, 4096);
  auto F = base_u_family(ahat, GFn::constant(gv), s, eps, 3, qg);
  auto FS = recursion_step_u(F, VectorField::S);

  auto moment = [&](int m) {
    return -integrate(
                [&](double p) {
                  const double a = ahat(p);
                  return a * std::pow(0.5 * gv * a, double(m)) *
                         std::exp(0.5 * gv * a * s);
                },
                -25.0, 2.0, 1e-13)
                .value;
  };
  const double expected = eps * moment(2) - moment(1);
  const double got = u_family_limit(FS, 1);
  CHECK(std::abs(got - expected) < 1e-8);
}

TEST_CASE("2 d_q U_I + A_I decays one order faster than A_I", "[reduced]") {
  auto ahat = ProfileFn::radial(
      [](double q) {
        const double taper = 1.0 - chi(q - 1.0);  // smooth vanish at q = 2
        return taper * 0.5 / std::pow(1.0 + sq(q / 3.0), 0.75);  // |q|^{-1.5}
      },
      2.0);
  const double gv = 2.0;
  auto qg = linspace(-400.0, 2.5, 8192);
  auto F = base_u_family(ahat, GFn::constant(gv), 0.4, 0.1, 1, qg, nullptr,
                         1e-13);
  auto A0 = base_a_profile(ahat, GFn::constant(gv), qg);
  // residual on the deep-tail half of the grid
  std::vector<double> absq, res, aval;
  auto dq = reduced::detail::q_deriv_rows(F.tensors[0], qg, 1);
  for (std::size_t i = 8; i < qg.size(); ++i) {
    if (qg[i] > -20.0 || qg[i] < -380.0) continue;
    absq.push_back(-qg[i]);
    res.push_back(2.0 * dq[i] + A0.values[i]);
    aval.push_back(A0.values[i]);
  }
  const double p_res = fit_power_law(absq, res).slope;
  const double p_a = fit_power_law(absq, aval).slope;
  CHECK(p_res < p_a - 0.5);  // at least one extra decay order
}
