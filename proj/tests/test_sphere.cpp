#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "wavetail/metric.hpp"
#include "wavetail/sphere.hpp"

using namespace wavetail;
using namespace wavetail::sphere;

namespace {
SphereField random_bandlimited(const SphereGrid& g, std::size_t deg_max,
                               unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> un(-1.0, 1.0);
  std::vector<double> c(g.n_coeffs(), 0.0);
  for (std::size_t k = 0; k < (deg_max + 1) * (deg_max + 1); ++k) c[k] = un(rng);
  return SphereField::from_coeffs(g, c);
}
}  // namespace

TEST_CASE("quadrature weights sum to 4 pi", "[sphere]") {
  SphereGrid g(8);
  REQUIRE(std::abs(g.quad_weight_sum() - kFourPi) / kFourPi < 1e-13);
}

TEST_CASE("sphere_quad on simple integrands", "[sphere]") {
  SphereGrid g(8);
  auto one = SphereField::constant(g, 1.0);
  CHECK(std::abs(sphere_quad(one) - kFourPi) < 1e-12);
  auto w3 = SphereField::from_function(g, [](double, double, double z) {
    return z;
  });
  CHECK(std::abs(sphere_quad(w3)) < 1e-13);
  auto w3sq = SphereField::from_function(g, [](double, double, double z) {
    return z * z;
  });
  CHECK(std::abs(sphere_quad(w3sq) - kFourPi / 3.0) < 1e-12);
}

TEST_CASE("analysis/synthesis round trip", "[sphere]") {
  SphereGrid g(8);
  auto f = random_bandlimited(g, 8, 7);
  auto f2 = SphereField::from_coeffs(g, f.coeffs());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < f.values().size(); ++i) {
    num = std::max(num, std::abs(f.values()[i] - f2.values()[i]));
    den = std::max(den, std::abs(f.values()[i]));
  }
  CHECK(num / den < 1e-12);
}

TEST_CASE("Parseval identity", "[sphere]") {
  SphereGrid g(8);
  auto f = random_bandlimited(g, 8, 11);
  auto fsq = f;
  for (auto& v : fsq.values()) v *= v;
  double sum2 = 0;
  for (double c : f.coeffs()) sum2 += c * c;
  CHECK(std::abs(sphere_quad(fsq) - sum2) / sum2 < 1e-12);
}

TEST_CASE("project_mode eigenfunctions and orthogonality", "[sphere]") {
  SphereGrid g(8);
  auto y11 = SphereField::from_function(g, [](double x, double, double) {
    return std::sqrt(3.0 / kFourPi) * x;
  });
  auto p1 = project_mode(y11, 1);
  auto p0 = project_mode(y11, 0);
  double d1 = 0;
  for (std::size_t i = 0; i < y11.values().size(); ++i)
    d1 = std::max(d1, std::abs(p1.values()[i] - y11.values()[i]));
  CHECK(d1 < 1e-12);
  CHECK(p0.max_abs() < 1e-13);

  // omega_1^2 has mean 1/3.
  auto w1sq = SphereField::from_function(g, [](double x, double, double) {
    return x * x;
  });
  auto m0 = project_mode(w1sq, 0);
  CHECK(std::abs(m0.values()[0] - 1.0 / 3.0) < 1e-12);

  // Projections to distinct degrees annihilate each other; idempotence.
  auto f = random_bandlimited(g, 4, 3);
  auto p2 = project_mode(f, 2);
  CHECK(project_mode(p2, 3).max_abs() < 1e-12 * (1.0 + f.max_abs()));
  auto p22 = project_mode(p2, 2);
  double dd = 0;
  for (std::size_t i = 0; i < p2.values().size(); ++i)
    dd = std::max(dd, std::abs(p2.values()[i] - p22.values()[i]));
  CHECK(dd < 1e-12);

  CHECK_THROWS_AS(project_mode(f, 9), precondition_error);
}

TEST_CASE("band-limited reconstruction from all degrees", "[sphere]") {
  SphereGrid g(8);
  auto f = random_bandlimited(g, 8, 5);
  SphereField sum(g);
  for (std::size_t l = 0; l <= 8; ++l) {
    auto pl = project_mode(f, l);
    for (std::size_t i = 0; i < sum.values().size(); ++i)
      sum.values()[i] += pl.values()[i];
  }
  double d = 0;
  for (std::size_t i = 0; i < f.values().size(); ++i)
    d = std::max(d, std::abs(sum.values()[i] - f.values()[i]));
  CHECK(d / f.max_abs() < 1e-12);
}

TEST_CASE("mode_coeffs conventions", "[sphere]") {
  SphereGrid g(8);
  auto c5 = SphereField::constant(g, 5.0);
  auto mc = mode_coeffs(c5);
  CHECK(std::abs(mc.f0 - 5.0 * std::sqrt(kFourPi)) < 1e-12);
  for (double v : mc.f1) CHECK(std::abs(v) < 1e-12);
  for (double v : mc.f2) CHECK(std::abs(v) < 1e-12);

  // Basis element Y_(2),1 = sqrt(15/4pi) w1 w2.
  auto y21 = SphereField::from_function(g, [](double a, double b, double) {
    return std::sqrt(15.0 / kFourPi) * a * b;
  });
  auto mc2 = mode_coeffs(y21);
  CHECK(std::abs(mc2.f2[0] - 1.0) < 1e-12);
  CHECK(std::abs(mc2.f0) < 1e-12);
  for (int i = 1; i < 5; ++i) CHECK(std::abs(mc2.f2[i]) < 1e-12);

  // The paper's Y_(2),4 / Y_(2),5 pair is not orthogonal; coefficients of
  // w2^2 - w3^2 are taken against the corrected basis and must reconstruct.
  auto f = SphereField::from_function(g, [](double, double b, double c) {
    return b * b - c * c;
  });
  auto mcf = mode_coeffs(f);
  auto rec = reconstruct_upto2(g, mcf);
  double d = 0;
  for (std::size_t i = 0; i < f.values().size(); ++i)
    d = std::max(d, std::abs(rec.values()[i] - f.values()[i]));
  CHECK(d < 1e-12);

  // Raw pair inner product is -1/2 (the Gram defect the correction fixes).
  auto y4y5 = SphereField::from_function(g, [](double a, double b, double c) {
    return paper_y2(4, a, b, c) * paper_y2(5, a, b, c);
  });
  CHECK(std::abs(sphere_quad(y4y5) + 0.5) < 1e-12);

  // reconstruct matches project_upto(2).
  auto h = random_bandlimited(g, 6, 23);
  auto rec2 = reconstruct_upto2(g, mode_coeffs(h));
  auto pr2 = project_upto(h, 2);
  double d2 = 0;
  for (std::size_t i = 0; i < h.values().size(); ++i)
    d2 = std::max(d2, std::abs(rec2.values()[i] - pr2.values()[i]));
  CHECK(d2 / (1.0 + h.max_abs()) < 1e-12);
}

TEST_CASE("angular derivative basics", "[sphere]") {
  SphereGrid g(8);
  auto one = SphereField::constant(g, 1.0);
  CHECK(angular_derivative(one, 1).max_abs() < 1e-12);

  // d_{w1} of w1 (degree-0 extension) is 1 - w1^2.
  auto w1 = SphereField::from_function(g, [](double a, double, double) {
    return a;
  });
  auto d = angular_derivative(w1, 1);
  double err = 0;
  for (std::size_t i = 0; i < g.n_theta(); ++i)
    for (std::size_t j = 0; j < g.n_phi(); ++j) {
      const auto w = g.omega(i, j);
      err = std::max(err, std::abs(d.value(i, j) - (1.0 - w[0] * w[0])));
    }
  CHECK(err < 1e-11);
}

TEST_CASE("angular derivative tangency and product rule", "[sphere]") {
  SphereGrid g(8);
  auto f = random_bandlimited(g, 6, 17);
  // sum_i w_i d_{w_i} f = 0
  SphereField radial(g);
  for (int ax = 1; ax <= 3; ++ax) {
    auto d = angular_derivative(f, ax);
    for (std::size_t i = 0; i < g.n_theta(); ++i)
      for (std::size_t j = 0; j < g.n_phi(); ++j) {
        const auto w = g.omega(i, j);
        radial.values()[g.node(i, j)] += w[ax - 1] * d.value(i, j);
      }
  }
  CHECK(radial.max_abs() < 1e-11 * (1.0 + f.max_abs()));

  // product rule
  auto a = random_bandlimited(g, 3, 29);
  auto b = random_bandlimited(g, 3, 31);
  SphereField ab(g);
  for (std::size_t i = 0; i < ab.values().size(); ++i)
    ab.values()[i] = a.values()[i] * b.values()[i];
  auto dab = angular_derivative(ab, 2);
  auto da = angular_derivative(a, 2);
  auto db = angular_derivative(b, 2);
  double err = 0;
  for (std::size_t i = 0; i < ab.values().size(); ++i)
    err = std::max(err, std::abs(dab.values()[i] - da.values()[i] * b.values()[i] -
                                 a.values()[i] * db.values()[i]));
  CHECK(err < 1e-10 * (1.0 + ab.max_abs()));

  CHECK_THROWS_AS(angular_derivative(random_bandlimited(g, 8, 37), 1),
                  precondition_error);
}

TEST_CASE("compute_G for the solver family and quadratic forms", "[sphere]") {
  SphereGrid g(8);
  // a(u) = 1 + u gives G = 2 a'(0) = 2.
  auto m = MetricSpec::a_linear(1.0);
  auto gp = compute_g(m, g);
  CHECK(gp.is_constant);
  CHECK(std::abs(gp.constant_value() - 2.0) < 1e-14);
  CHECK(gp.sign_class == SignClass::positive);

  // Constant-in-u metric: G = 0.
  auto gp0 = compute_g(MetricSpec::minkowski(), g);
  CHECK(gp0.sign_class == SignClass::zero);

  // dg^{0i} = c delta^{i1}: G = -2 c w1.
  const double cval = 0.7;
  auto gq = compute_g_quadratic(g, 0.0, {cval, 0.0, 0.0},
                                {{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}});
  double err = 0;
  for (std::size_t i = 0; i < g.n_theta(); ++i)
    for (std::size_t j = 0; j < g.n_phi(); ++j) {
      const auto w = g.omega(i, j);
      err = std::max(err, std::abs(gq.at(i, j) + 2.0 * cval * w[0]));
    }
  CHECK(err < 1e-13);
  CHECK(gq.sign_class == SignClass::mixed);

  // G is a degree <= 2 polynomial: no content above l = 2.
  auto gfield = gq.values;
  for (std::size_t l = 3; l <= g.l_max(); ++l)
    CHECK(project_mode(gfield, l).max_abs() < 1e-12);
}
