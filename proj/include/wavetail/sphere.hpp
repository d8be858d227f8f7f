#pragma once

// Sphere functions on a Gauss-Legendre x uniform-longitude grid: real
// spherical-harmonic analysis/synthesis, degree projection, tangential
// derivatives of the degree-0 homogeneous extension, quadrature, and the
// null-form coefficient G(omega).
//
// Basis layout: index l*l holds (l, m=0); index l*l + 2m - 1 holds the
// cos(m phi) function and l*l + 2m the sin(m phi) function, all orthonormal
// with respect to the round measure. No Condon-Shortley phase, so e.g. the
// degree-1 functions are sqrt(3/4pi) * (omega_1, omega_2, omega_3).

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wavetail/common.hpp"

namespace wavetail::sphere {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
inline void gauss_legendre(std::size_t n, std::vector<double>* x,
                           std::vector<double>* w) {
  x->assign(n, 0.0);
  w->assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double xi = std::cos(kPi * (double(i) + 0.75) / (double(n) + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = xi;
      for (std::size_t l = 2; l <= n; ++l) {
        const double p2 =
            ((2.0 * double(l) - 1.0) * xi * p1 - (double(l) - 1.0) * p0) /
            double(l);
        p0 = p1;
        p1 = p2;
      }
      const double dp = double(n) * (xi * p1 - p0) / (xi * xi - 1.0);
      const double dx = p1 / dp;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = xi;
    for (std::size_t l = 2; l <= n; ++l) {
      const double p2 =
          ((2.0 * double(l) - 1.0) * xi * p1 - (double(l) - 1.0) * p0) /
          double(l);
      p0 = p1;
      p1 = p2;
    }
    const double dp = double(n) * (xi * p1 - p0) / (xi * xi - 1.0);
    (*x)[i] = xi;
    (*w)[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
  }
}

class SphereGrid {
 public:
  explicit SphereGrid(std::size_t l_max = 8)
      : SphereGrid(l_max, l_max + 1, 2 * l_max + 1) {}

  SphereGrid(std::size_t l_max, std::size_t n_theta, std::size_t n_phi)
      : l_max_(l_max), n_theta_(n_theta), n_phi_(n_phi) {
    if (n_theta_ < l_max_ + 1 || n_phi_ < 2 * l_max_ + 1)
      throw precondition_error("SphereGrid: grid too small for L_max");
    gauss_legendre(n_theta_, &ct_, &wt_);
    // gauss_legendre returns nodes in decreasing order of the start guess;
    // sort into increasing cos(theta) for reproducibility.
    for (std::size_t i = 0; i + 1 < n_theta_; ++i)
      for (std::size_t j = 0; j + 1 < n_theta_ - i; ++j)
        if (ct_[j] > ct_[j + 1]) {
          std::swap(ct_[j], ct_[j + 1]);
          std::swap(wt_[j], wt_[j + 1]);
        }
    phi_.resize(n_phi_);
    for (std::size_t j = 0; j < n_phi_; ++j)
      phi_[j] = 2.0 * kPi * double(j) / double(n_phi_);
    build_tables();
  }

  std::size_t l_max() const { return l_max_; }
  std::size_t n_theta() const { return n_theta_; }
  std::size_t n_phi() const { return n_phi_; }
  std::size_t n_nodes() const { return n_theta_ * n_phi_; }
  std::size_t n_coeffs() const { return (l_max_ + 1) * (l_max_ + 1); }

  double cos_theta(std::size_t i) const { return ct_[i]; }
  double sin_theta(std::size_t i) const { return std::sqrt(1.0 - ct_[i] * ct_[i]); }
  double phi(std::size_t j) const { return phi_[j]; }
  // Node weight: GL weight times the uniform phi weight.
  double weight(std::size_t i, std::size_t j) const {
    (void)j;
    return wt_[i] * 2.0 * kPi / double(n_phi_);
  }
  std::size_t node(std::size_t i, std::size_t j) const { return i * n_phi_ + j; }

  // Cartesian direction of node (i, j).
  std::array<double, 3> omega(std::size_t i, std::size_t j) const {
    const double st = sin_theta(i);
    return {st * std::cos(phi_[j]), st * std::sin(phi_[j]), ct_[i]};
  }

  static std::size_t coeff_index(std::size_t l, int m_signed) {
    // m_signed > 0: cos branch; m_signed < 0: sin branch; 0: zonal.
    const std::size_t m = std::size_t(m_signed > 0 ? m_signed : -m_signed);
    if (m == 0) return l * l;
    return l * l + 2 * m - (m_signed > 0 ? 1 : 0);
  }
  static std::size_t degree_of(std::size_t idx) {
    std::size_t l = 0;
    while ((l + 1) * (l + 1) <= idx) ++l;
    return l;
  }

  // basis(node, k): value of orthonormal basis function k at the node.
  double basis(std::size_t nd, std::size_t k) const {
    return y_[nd * n_coeffs() + k];
  }
  double basis_dtheta(std::size_t nd, std::size_t k) const {
    return dyt_[nd * n_coeffs() + k];
  }
  // d/dphi of the basis divided by sin(theta) (pole-safe on GL nodes).
  double basis_dphi_over_sin(std::size_t nd, std::size_t k) const {
    return dyp_[nd * n_coeffs() + k];
  }

  double quad_weight_sum() const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_theta_; ++i)
      for (std::size_t j = 0; j < n_phi_; ++j) s += weight(i, j);
    return s;
  }

 private:
  void build_tables();

  std::size_t l_max_, n_theta_, n_phi_;
  std::vector<double> ct_, wt_, phi_;
  std::vector<double> y_, dyt_, dyp_;
};

namespace detail {

// Normalized associated Legendre Pbar_l^m(x) (so that the real harmonics
// built from them are orthonormal), plus d/dtheta, evaluated for all
// l <= l_max at fixed m. sin_t must be > 0.
inline void legendre_column(std::size_t l_max, std::size_t m, double x,
                            double sin_t, std::vector<double>* p,
                            std::vector<double>* dp) {
  p->assign(l_max + 1, 0.0);
  dp->assign(l_max + 1, 0.0);
  double pmm = std::sqrt(1.0 / kFourPi);
  for (std::size_t k = 1; k <= m; ++k)
    pmm *= sin_t * std::sqrt((2.0 * double(k) + 1.0) / (2.0 * double(k)));
  if (m <= l_max) (*p)[m] = pmm;
  if (m + 1 <= l_max) (*p)[m + 1] = x * std::sqrt(2.0 * double(m) + 3.0) * pmm;
  for (std::size_t l = m + 2; l <= l_max; ++l) {
    const double dl = double(l), dm = double(m);
    const double a = std::sqrt((4.0 * dl * dl - 1.0) / (dl * dl - dm * dm));
    const double b =
        std::sqrt((sq(dl - 1.0) - dm * dm) / (4.0 * sq(dl - 1.0) - 1.0));
    (*p)[l] = a * (x * (*p)[l - 1] - b * (*p)[l - 2]);
  }
  // d/dtheta via (x^2-1) dP/dx = l x P_l - c_lm P_{l-1}, dP/dtheta = -sin * dP/dx
  for (std::size_t l = m; l <= l_max; ++l) {
    const double dl = double(l), dm = double(m);
    const double c =
        (l == 0) ? 0.0
                 : std::sqrt((dl * dl - dm * dm) * (2.0 * dl + 1.0) /
                             (2.0 * dl - 1.0));
    const double prev = (l > 0 && l - 1 >= m) ? (*p)[l - 1] : 0.0;
    (*dp)[l] = (dl * x * (*p)[l] - c * prev) / sin_t;
  }
}

}  // namespace detail

inline void SphereGrid::build_tables() {
  const std::size_t nc = n_coeffs(), nn = n_nodes();
  y_.assign(nn * nc, 0.0);
  dyt_.assign(nn * nc, 0.0);
  dyp_.assign(nn * nc, 0.0);
  std::vector<double> p, dp;
  for (std::size_t i = 0; i < n_theta_; ++i) {
    const double st = sin_theta(i);
    for (std::size_t m = 0; m <= l_max_; ++m) {
      detail::legendre_column(l_max_, m, ct_[i], st, &p, &dp);
      for (std::size_t j = 0; j < n_phi_; ++j) {
        const std::size_t nd = node(i, j);
        const double cm = std::cos(double(m) * phi_[j]);
        const double sm = std::sin(double(m) * phi_[j]);
        for (std::size_t l = m; l <= l_max_; ++l) {
          if (m == 0) {
            const std::size_t k = coeff_index(l, 0);
            y_[nd * nc + k] = p[l];
            dyt_[nd * nc + k] = dp[l];
          } else {
            const double r2 = std::sqrt(2.0);
            const std::size_t kc = coeff_index(l, int(m));
            const std::size_t ks = coeff_index(l, -int(m));
            y_[nd * nc + kc] = r2 * p[l] * cm;
            y_[nd * nc + ks] = r2 * p[l] * sm;
            dyt_[nd * nc + kc] = r2 * dp[l] * cm;
            dyt_[nd * nc + ks] = r2 * dp[l] * sm;
            dyp_[nd * nc + kc] = -r2 * p[l] * double(m) * sm / st;
            dyp_[nd * nc + ks] = r2 * p[l] * double(m) * cm / st;
          }
        }
      }
    }
  }
}

class SphereField {
 public:
  SphereField() = default;
  explicit SphereField(const SphereGrid& g)
      : grid_(&g), values_(g.n_nodes(), 0.0) {}
  SphereField(const SphereGrid& g, std::vector<double> values)
      : grid_(&g), values_(std::move(values)) {
    if (values_.size() != g.n_nodes())
      throw precondition_error("SphereField: value count mismatch");
  }

  template <class F>
  static SphereField from_function(const SphereGrid& g, F&& f) {
    SphereField out(g);
    for (std::size_t i = 0; i < g.n_theta(); ++i)
      for (std::size_t j = 0; j < g.n_phi(); ++j) {
        const auto w = g.omega(i, j);
        out.values_[g.node(i, j)] = f(w[0], w[1], w[2]);
      }
    return out;
  }

  static SphereField constant(const SphereGrid& g, double c) {
    SphereField out(g);
    for (auto& v : out.values_) v = c;
    return out;
  }

  const SphereGrid& grid() const {
    if (!grid_) throw precondition_error("SphereField: empty");
    return *grid_;
  }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { coeffs_.reset(); return values_; }
  double value(std::size_t i, std::size_t j) const {
    return values_[grid().node(i, j)];
  }

  // Analysis: orthonormal-basis coefficients by quadrature (cached).
  const std::vector<double>& coeffs() const {
    if (!coeffs_) {
      const auto& g = grid();
      std::vector<double> c(g.n_coeffs(), 0.0);
      for (std::size_t i = 0; i < g.n_theta(); ++i)
        for (std::size_t j = 0; j < g.n_phi(); ++j) {
          const std::size_t nd = g.node(i, j);
          const double fw = values_[nd] * g.weight(i, j);
          for (std::size_t k = 0; k < g.n_coeffs(); ++k)
            c[k] += fw * g.basis(nd, k);
        }
      coeffs_ = std::move(c);
    }
    return *coeffs_;
  }

  static SphereField from_coeffs(const SphereGrid& g,
                                 const std::vector<double>& c) {
    SphereField out(g);
    for (std::size_t nd = 0; nd < g.n_nodes(); ++nd) {
      double s = 0.0;
      for (std::size_t k = 0; k < c.size() && k < g.n_coeffs(); ++k)
        s += c[k] * g.basis(nd, k);
      out.values_[nd] = s;
    }
    return out;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  // Largest coefficient magnitude at degree l.
  double degree_amplitude(std::size_t l) const {
    const auto& c = coeffs();
    double m = 0.0;
    for (std::size_t k = l * l; k < (l + 1) * (l + 1); ++k)
      m = std::max(m, std::abs(c[k]));
    return m;
  }

 private:
  const SphereGrid* grid_ = nullptr;
  std::vector<double> values_;
  mutable std::optional<std::vector<double>> coeffs_;
};

inline double sphere_quad(const SphereField& f) {
  const auto& g = f.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < g.n_theta(); ++i)
    for (std::size_t j = 0; j < g.n_phi(); ++j)
      s += f.value(i, j) * g.weight(i, j);
  return s;
}

// Projection S_(l): keep only the degree-l coefficients.
inline SphereField project_mode(const SphereField& f, std::size_t l) {
  const auto& g = f.grid();
  if (l > g.l_max())
    throw precondition_error("project_mode: degree exceeds L_max");
  const auto& c = f.coeffs();
  std::vector<double> cl(g.n_coeffs(), 0.0);
  for (std::size_t k = l * l; k < (l + 1) * (l + 1); ++k) cl[k] = c[k];
  return SphereField::from_coeffs(g, cl);
}

inline SphereField project_upto(const SphereField& f, std::size_t l) {
  const auto& g = f.grid();
  if (l > g.l_max())
    throw precondition_error("project_upto: degree exceeds L_max");
  const auto& c = f.coeffs();
  std::vector<double> cl(g.n_coeffs(), 0.0);
  for (std::size_t k = 0; k < (l + 1) * (l + 1); ++k) cl[k] = c[k];
  return SphereField::from_coeffs(g, cl);
}

// Tangential derivative along Cartesian axis i (1-based) of the degree-0
// homogeneous extension. Requires band-limit margin of one degree.
inline SphereField angular_derivative(const SphereField& f, int axis,
                                      double margin_tol = 1e-10) {
  const auto& g = f.grid();
  if (axis < 1 || axis > 3)
    throw precondition_error("angular_derivative: axis must be 1..3");
  const double scale = std::max(f.max_abs(), 1e-300);
  if (f.degree_amplitude(g.l_max()) > margin_tol * scale)
    throw precondition_error(
        "angular_derivative: field not band-limited with margin");
  const auto& c = f.coeffs();
  SphereField out(g);
  for (std::size_t i = 0; i < g.n_theta(); ++i) {
    const double ct = g.cos_theta(i), st = g.sin_theta(i);
    for (std::size_t j = 0; j < g.n_phi(); ++j) {
      const double cph = std::cos(g.phi(j)), sph = std::sin(g.phi(j));
      // Cartesian components of the unit tangent vectors.
      const double that[3] = {ct * cph, ct * sph, -st};
      const double phat[3] = {-sph, cph, 0.0};
      const std::size_t nd = g.node(i, j);
      double dth = 0.0, dph = 0.0;
      for (std::size_t k = 0; k < g.n_coeffs(); ++k) {
        dth += c[k] * g.basis_dtheta(nd, k);
        dph += c[k] * g.basis_dphi_over_sin(nd, k);
      }
      out.values()[nd] = dth * that[axis - 1] + dph * phat[axis - 1];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Degree <= 2 conventions. The raw degree-2 set has a non-orthogonal pair;
// coefficients are stored against the orthonormalized version (last element
// replaced), while paper_y2 exposes the raw functions.

inline double paper_y1(int i, double w1, double w2, double w3) {
  const double n = std::sqrt(3.0 / kFourPi);
  switch (i) {
    case 1: return n * w1;
    case 2: return n * w2;
    case 3: return n * w3;
  }
  throw precondition_error("paper_y1: index must be 1..3");
}

inline double paper_y2(int i, double w1, double w2, double w3) {
  const double na = std::sqrt(15.0 / kFourPi);
  const double nb = std::sqrt(15.0 / (4.0 * kFourPi));
  switch (i) {
    case 1: return na * w1 * w2;
    case 2: return na * w2 * w3;
    case 3: return na * w3 * w1;
    case 4: return nb * (w1 * w1 - w2 * w2);
    case 5: return nb * (w2 * w2 - w3 * w3);
  }
  throw precondition_error("paper_y2: index must be 1..5");
}

// Orthonormalized degree-2 basis: elements 1..4 equal the raw set, element 5
// is the Gram-Schmidt correction (2/sqrt(3)) * (Y_(2),5 + Y_(2),4 / 2).
inline double ortho_y2(int i, double w1, double w2, double w3) {
  if (i >= 1 && i <= 4) return paper_y2(i, w1, w2, w3);
  if (i == 5)
    return (2.0 / std::sqrt(3.0)) *
           (paper_y2(5, w1, w2, w3) + 0.5 * paper_y2(4, w1, w2, w3));
  throw precondition_error("ortho_y2: index must be 1..5");
}

struct ModeCoeffs {
  double f0 = 0.0;                     // against Y_00 = (4 pi)^{-1/2}
  std::array<double, 3> f1 = {0, 0, 0};
  std::array<double, 5> f2 = {0, 0, 0, 0, 0};  // against the ortho set
};

inline ModeCoeffs mode_coeffs(const SphereField& f) {
  const auto& g = f.grid();
  ModeCoeffs mc;
  auto pair_with = [&](auto&& basis_fn) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.n_theta(); ++i)
      for (std::size_t j = 0; j < g.n_phi(); ++j) {
        const auto w = g.omega(i, j);
        s += f.value(i, j) * basis_fn(w[0], w[1], w[2]) * g.weight(i, j);
      }
    return s;
  };
  mc.f0 = pair_with([](double, double, double) {
    return 1.0 / std::sqrt(kFourPi);
  });
  for (int i = 1; i <= 3; ++i)
    mc.f1[i - 1] = pair_with([i](double a, double b, double c) {
      return paper_y1(i, a, b, c);
    });
  for (int i = 1; i <= 5; ++i)
    mc.f2[i - 1] = pair_with([i](double a, double b, double c) {
      return ortho_y2(i, a, b, c);
    });
  return mc;
}

inline SphereField reconstruct_upto2(const SphereGrid& g,
                                     const ModeCoeffs& mc) {
  return SphereField::from_function(g, [&](double a, double b, double c) {
    double s = mc.f0 / std::sqrt(kFourPi);
    for (int i = 1; i <= 3; ++i) s += mc.f1[i - 1] * paper_y1(i, a, b, c);
    for (int i = 1; i <= 5; ++i) s += mc.f2[i - 1] * ortho_y2(i, a, b, c);
    return s;
  });
}

// ---------------------------------------------------------------------------
// G(omega)

enum class SignClass { positive, negative, mixed, zero };

struct GProfile {
  SphereField values;
  bool is_constant = false;
  SignClass sign_class = SignClass::zero;

  double at(std::size_t i, std::size_t j) const { return values.value(i, j); }
  double constant_value() const {
    if (!is_constant) throw precondition_error("GProfile: not constant");
    return values.values()[0];
  }
  double min() const {
    double m = values.values()[0];
    for (double v : values.values()) m = std::min(m, v);
    return m;
  }
  double max() const {
    double m = values.values()[0];
    for (double v : values.values()) m = std::max(m, v);
    return m;
  }
};

inline SignClass classify_sign(double mn, double mx, double tol = 1e-14) {
  if (std::abs(mn) <= tol && std::abs(mx) <= tol) return SignClass::zero;
  if (mn > tol) return SignClass::positive;
  if (mx < -tol) return SignClass::negative;
  return SignClass::mixed;
}

inline GProfile make_g_profile(SphereField f) {
  GProfile g;
  g.values = std::move(f);
  double mn = g.min(), mx = g.max();
  g.is_constant = (mx - mn) <= 1e-12 * (1.0 + std::max(std::abs(mn), std::abs(mx)));
  g.sign_class = classify_sign(mn, mx);
  return g;
}

inline GProfile constant_g(const SphereGrid& grid, double value) {
  return make_g_profile(SphereField::constant(grid, value));
}

// G(omega) = dg00 - 2 dg0i w_i + dgij w_i w_j with what = (-1, omega).
inline GProfile compute_g_quadratic(const SphereGrid& grid, double dg00,
                                    const std::array<double, 3>& dg0i,
                                    const std::array<std::array<double, 3>, 3>& dgij) {
  SphereField f = SphereField::from_function(grid, [&](double a, double b,
                                                       double c) {
    const double w[3] = {a, b, c};
    double s = dg00;
    for (int i = 0; i < 3; ++i) s -= 2.0 * dg0i[i] * w[i];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s += dgij[i][j] * w[i] * w[j];
    return s;
  });
  return make_g_profile(std::move(f));
}

}  // namespace wavetail::sphere
