#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "wavetail/eikonal.hpp"

using namespace wavetail;
using namespace wavetail::eikonal;

namespace {

reduced::ProfileFn bump_ahat(double h = 0.4, double c = -1.0, double w = 2.5) {
  return reduced::ProfileFn::radial(
      [h, c, w](double q) {
        const double x = (q - c) / w;
        if (std::abs(x) >= 1.0) return 0.0;
        return h * std::exp(1.0 - 1.0 / (1.0 - x * x));
      },
      c + w);
}

// Zero field large enough for the fan tests.
SpacetimeField1D vacuum_field(double t_max, double r_max) {
  const double dt = 0.5, dr = 0.5;
  SpacetimeField1D f(0.0, dt, std::size_t(t_max / dt) + 1, dr,
                     std::size_t(r_max / dr) + 1);
  return f;
}

}  // namespace

TEST_CASE("vacuum eikonal gives q = r - t and mu = -2", "[eikonal]") {
  auto field = vacuum_field(400.0, 500.0);
  EikonalParams par;
  par.t_start = 20.0;
  par.r0 = 2.0;
  par.epsilon = 0.1;
  par.q_label = linspace(-40.0, 4.0, 45);
  auto opt = solve_eikonal(field, MetricSpec::minkowski(), par);
  // labels ride on straight lines r = t + q
  for (std::size_t row = 0; row < opt.rows(); ++row)
    for (std::size_t k = 0; k < opt.nq(); ++k) {
      const double r = opt.r[opt.idx(row, k)];
      if (std::isnan(r)) continue;
      CHECK(std::abs(r - (opt.t_row[row] + opt.q_label[k])) < 1e-9);
    }
  auto m = compute_mu_u(opt, MetricSpec::minkowski());
  for (std::size_t row = 0; row < m.s_grid.size(); ++row)
    for (std::size_t k = 0; k < m.nq(); ++k) {
      if (std::isnan(m.mu[m.idx(row, k)])) continue;
      CHECK(std::abs(m.mu[m.idx(row, k)] + 2.0) < 1e-9);
      CHECK(std::abs(m.U[m.idx(row, k)]) < 1e-12);
      CHECK(std::abs(m.Uq[m.idx(row, k)]) < 1e-12);
    }
  // extraction gives (A, A1, A2) = (0, -2, 0)
  auto lim = extract_limits(m, reduced::GFn::constant(2.0));
  for (std::size_t i = 0; i < lim.A.q.size(); ++i) {
    CHECK(std::abs(lim.A.value(i)) < 1e-10);
    CHECK(std::abs(lim.A1.value(i) + 2.0) < 1e-9);
    CHECK(std::abs(lim.A2.value(i)) < 1e-10);
  }
}

TEST_CASE("frozen metric gives straight characteristics of shifted slope",
          "[eikonal]") {
  // a^2 = (1 + kappa)^2 constant in u: speeds are 1 + kappa everywhere.
  const double kappa = 0.25;
  MetricSpec m;
  m.a2 = Poly({sq(1.0 + kappa)});
  auto field = vacuum_field(200.0, 400.0);
  EikonalParams par;
  par.t_start = 20.0;
  par.r0 = 2.0;
  par.epsilon = 0.1;
  par.q_label = linspace(-20.0, 4.0, 25);
  auto opt = solve_eikonal(field, m, par);
  for (std::size_t row = 0; row < opt.rows(); ++row)
    for (std::size_t k = 0; k < opt.nq(); ++k) {
      const double r = opt.r[opt.idx(row, k)];
      if (std::isnan(r)) continue;
      const double te = opt.region.entry_time(opt.q_label[k]);
      const double re = te + opt.q_label[k];
      const double expect = re + (1.0 + kappa) * (opt.t_row[row] - te);
      CHECK(std::abs(r - expect) < 1e-8);
    }
  // mu = -(2 + kappa) q_r with q_r = 1/(1 + 2 kappa) for cone-entry labels
  auto mu = compute_mu_u(opt, m);
  const double q_r = 1.0 / (1.0 + 2.0 * kappa);
  for (std::size_t k = 0; k < mu.nq(); ++k) {
    if (mu.q_grid[k] >= 2.0 * par.r0 - 1e-9) continue;  // cone-entry branch
    for (std::size_t row = 0; row < mu.s_grid.size(); ++row) {
      const double v = mu.mu[mu.idx(row, k)];
      if (std::isnan(v)) continue;
      CHECK(std::abs(v + (2.0 + kappa) * q_r) < 1e-8);
    }
  }
}

TEST_CASE("synthetic round trip recovers the generating limits", "[eikonal]") {
  auto ahat = bump_ahat();
  auto g = reduced::GFn::constant(2.0);
  const double eps = 0.1;
  SyntheticGauge sg;
  sg.delta_data = 0.4;
  sg.delta_gauge = 0.4;
  auto ts = fan_sample_times(std::exp(sg.delta_gauge / eps), 3.0e4, eps, 40);
  auto qg = linspace(-12.0, 2.5, 59);
  auto m = synthetic_mu_u(ahat, g, eps, ts, qg, sg);
  auto lim = extract_limits(m, g);
  CHECK(!lim.unreliable);
  for (std::size_t i = 0; i < lim.A.q.size(); ++i) {
    const double q = lim.A.q[i];
    CHECK(std::abs(lim.A.value(i) - ahat(q)) < 1e-8);
    CHECK(std::abs(lim.A1.value(i) + 2.0) < 1e-8);
    CHECK(std::abs(lim.A2.value(i) - ahat(q)) < 1e-8);
  }
  // A1 A2 + 2A = 0 within extraction tolerance
  for (std::size_t i = 0; i < lim.A.q.size(); ++i)
    CHECK(std::abs(lim.A1.value(i) * lim.A2.value(i) + 2.0 * lim.A.value(i)) <
          1e-7);
}

TEST_CASE("reparametrize closed forms", "[eikonal]") {
  const double r0 = 2.0;
  auto qg = linspace(-10.0, 2.0, 121);
  // A1 = -2 everywhere: F is the identity.
  {
    std::vector<double> a(qg.size()), a1(qg.size(), -2.0);
    for (std::size_t i = 0; i < qg.size(); ++i) a[i] = bump_ahat()(qg[i]);
    LimitProfiles lim;
    lim.A = reduced::RadiationProfile::from_samples(reduced::ProfileKind::A,
                                                    qg, a, r0);
    lim.A1 = reduced::RadiationProfile::from_samples(reduced::ProfileKind::A1,
                                                     qg, a1, r0);
    auto rep = reparametrize(lim, r0);
    for (std::size_t i = 0; i < qg.size(); ++i) {
      CHECK(std::abs(rep.F[i] - qg[i]) < 1e-12);
      CHECK(std::abs(rep.ahat.value(i) - a[i]) < 1e-14);
    }
  }
  // A1 = -1 up to 2 R0: F(q) = 2 R0 + 2 (q - 2 R0).
  {
    auto qg2 = linspace(-10.0, 2.0 * r0, 141);
    std::vector<double> a(qg2.size()), a1(qg2.size(), -1.0);
    for (std::size_t i = 0; i < qg2.size(); ++i) a[i] = bump_ahat()(qg2[i]);
    LimitProfiles lim;
    lim.A = reduced::RadiationProfile::from_samples(reduced::ProfileKind::A,
                                                    qg2, a, 2.0 * r0);
    lim.A1 = reduced::RadiationProfile::from_samples(reduced::ProfileKind::A1,
                                                     qg2, a1, 2.0 * r0);
    auto rep = reparametrize(lim, 2.0 * r0 / 2.0);
    for (std::size_t i = 0; i < qg2.size(); ++i)
      CHECK(std::abs(rep.F[i] - (2.0 * r0 + 2.0 * (qg2[i] - 2.0 * r0))) <
            1e-10);
  }
}

TEST_CASE("reparametrize round trip through a varying A1", "[eikonal]") {
  const double r0 = 2.0;
  auto qg = linspace(-15.0, 2.0, 241);
  std::vector<double> a(qg.size()), a1(qg.size());
  for (std::size_t i = 0; i < qg.size(); ++i) {
    a[i] = bump_ahat()(qg[i]);
    a1[i] = -2.0 + 0.7 * std::exp(-sq(qg[i] / 3.0));
  }
  LimitProfiles lim;
  lim.A = reduced::RadiationProfile::from_samples(reduced::ProfileKind::A, qg,
                                                  a, r0);
  lim.A1 = reduced::RadiationProfile::from_samples(reduced::ProfileKind::A1,
                                                   qg, a1, r0);
  auto rep = reparametrize(lim, r0);
  // Fhat(F(q)) = q through the monotone interpolant and its exact inverse
  double worst = 0.0;
  for (double q = -14.0; q < 2.0; q += 0.37)
    worst = std::max(worst, std::abs(rep.Fhat_at(rep.F_at(q)) - q));
  CHECK(worst < 1e-10);
  CHECK(rep.f_over_q_max < 3.0);
}

TEST_CASE("gauge independence on synthetic two-gauge datasets", "[eikonal]") {
  auto ahat = bump_ahat();
  auto g = reduced::GFn::constant(2.0);
  const double eps = 0.1;
  const double d1 = 0.3, d2 = 0.5;
  auto qg = linspace(-12.0, 2.5, 181);

  SyntheticGauge sg1{d1, d1, nullptr, nullptr};
  auto ts1 = fan_sample_times(std::exp(d1 / eps), 3.0e4, eps, 40);
  auto m1 = synthetic_mu_u(ahat, g, eps, ts1, qg, sg1);
  auto l1 = extract_limits(m1, g);

  // gauge 2: different delta and a genuine relabeling
  SyntheticGauge sg2;
  sg2.delta_data = d1;
  sg2.delta_gauge = d2;
  sg2.phi = [](double q) { return q + 0.3 * std::atan(q / 4.0); };
  sg2.phi_prime = [](double q) {
    return 1.0 + 0.3 / 4.0 / (1.0 + sq(q / 4.0));
  };
  auto ts2 = fan_sample_times(std::exp(d2 / eps), 3.0e4, eps, 40);
  auto m2 = synthetic_mu_u(ahat, g, eps, ts2, qg, sg2);
  auto l2 = extract_limits(m2, g);
  CHECK(!l2.unreliable);

  auto tgrid = logspace(200.0, 2.0e4, 9);
  const double disc = frkl_gauge_discrepancy(l1, l2, g, tgrid);
  CHECK(disc < 1e-6);
}

TEST_CASE("trivial gauge comparison is exact", "[eikonal]") {
  // u == 0: both gauges give L == 0 identically.
  auto g = reduced::GFn::constant(2.0);
  auto zero = reduced::ProfileFn::radial([](double) { return 0.0; }, 2.0);
  const double eps = 0.1;
  auto qg = linspace(-10.0, 2.0, 31);
  SyntheticGauge sg1{0.3, 0.3, nullptr, nullptr};
  SyntheticGauge sg2{0.3, 0.5, nullptr, nullptr};
  auto m1 = synthetic_mu_u(zero, g, eps, fan_sample_times(20.0, 1e4, eps, 30),
                           qg, sg1);
  auto m2 = synthetic_mu_u(zero, g, eps, fan_sample_times(150.0, 1e4, eps, 30),
                           qg, sg2);
  auto l1 = extract_limits(m1, g);
  auto l2 = extract_limits(m2, g);
  auto tg = logspace(200.0, 5000.0, 5);
  reduced::FrkLParams p1;
  p1.epsilon = eps;
  p1.delta = l1.delta;
  auto L1 = reduced::frkl_from_a_a1(l1.A.fn(), l1.A1.fn(), g, tg, p1);
  CHECK(L1.max_abs() < 1e-12);
  CHECK(frkl_gauge_discrepancy(l1, l2, g, tg) < 1e-12);
}

TEST_CASE("caustic detection aborts", "[eikonal]") {
  OpticalFunction opt;
  opt.q_label = {0.0, 1.0};
  opt.t_row = {1.0};
  opt.r = {2.0, 1.5};  // crossing: second curve behind the first
  opt.u = {0.0, 0.0};
  opt.w = {0.0, 0.0};
  opt.first_row = {0, 0};
  CHECK_THROWS_AS(opt.check_ordering(), numerical_error);
}
