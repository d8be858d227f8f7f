#pragma once

// Experiment harness: configuration, the end-to-end pipeline
// (solve -> eikonal -> limits -> Ahat -> L -> v -> B), the headline
// comparisons (late-time tail, Ahat vs B, u vs v), the rigidity
// functionals, and artifact persistence.

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavetail/common.hpp"
#include "wavetail/cutoff.hpp"
#include "wavetail/eikonal.hpp"
#include "wavetail/field1d.hpp"
#include "wavetail/fit.hpp"
#include "wavetail/grid.hpp"
#include "wavetail/io.hpp"
#include "wavetail/linwave.hpp"
#include "wavetail/metric.hpp"
#include "wavetail/qnlw.hpp"
#include "wavetail/quad.hpp"
#include "wavetail/reduced.hpp"
#include "wavetail/sphere.hpp"
#include "wavetail/svg.hpp"
#include "wavetail/version.hpp"

namespace wavetail::lab {

using nlohmann::json;

struct ExperimentConfig {
  int schema = 1;

  // metric family a(u) = 1 + a_slope u unless explicit polynomials are given
  double a_slope = 1.0;
  std::vector<double> a2_poly, b_poly, c_poly;

  // data
  double epsilon = 0.1;
  double r0 = 2.0;
  double data_amp = 1.0;

  // solver grid
  double dr = 0.02;
  double t_max = 2000.0;
  double cfl = 0.5;
  double ko_sigma = 0.3;

  // eikonal gauge and fan
  double t_start = 50.0;  // delta = epsilon ln t_start
  double fan_dq_inner = 0.05;
  double fan_growth = 1.05;
  double q_max = 80.0;
  std::size_t n_s_samples = 70;

  // sphere
  std::size_t l_max = 8;

  // v build
  double goursat_h = 0.25;
  double v_pbar_max = 80.0;
  double v_sbar_max = 420.0;

  // frkl t-grid
  std::size_t n_t_frkl = 140;

  // synthetic entry: skip the solver and inject scattering data
  bool synthetic = false;
  double synth_amp = 0.4;
  double synth_center = -1.0;
  double synth_width = 2.5;
  double synth_y11 = 0.0;  // angular admixture coefficients
  double synth_y21 = 0.0;
  double g_synthetic = 2.0;

  // diagnostics / misc
  double sup_radius = 5.0;   // sup_{|x| <= R} |u| monitor
  double eta = 0.5;          // stand-in for the paper's eta in reports
  unsigned seed = 12345;     // synthetic-profile generators
  std::string out_dir;

  double delta() const { return epsilon * std::log(t_start); }

  MetricSpec metric() const {
    if (!a2_poly.empty() || !b_poly.empty() || !c_poly.empty()) {
      MetricSpec m;
      if (!a2_poly.empty()) m.a2 = Poly(a2_poly);
      if (!b_poly.empty()) m.b = Poly(b_poly);
      if (!c_poly.empty()) m.c = Poly(c_poly);
      m.validate();
      return m;
    }
    return MetricSpec::a_linear(a_slope);
  }

  json to_json() const {
    return json{{"schema", schema},
                {"a_slope", a_slope},
                {"a2_poly", a2_poly},
                {"b_poly", b_poly},
                {"c_poly", c_poly},
                {"epsilon", epsilon},
                {"r0", r0},
                {"data_amp", data_amp},
                {"dr", dr},
                {"t_max", t_max},
                {"cfl", cfl},
                {"ko_sigma", ko_sigma},
                {"t_start", t_start},
                {"fan_dq_inner", fan_dq_inner},
                {"fan_growth", fan_growth},
                {"q_max", q_max},
                {"n_s_samples", n_s_samples},
                {"l_max", l_max},
                {"goursat_h", goursat_h},
                {"v_pbar_max", v_pbar_max},
                {"v_sbar_max", v_sbar_max},
                {"n_t_frkl", n_t_frkl},
                {"synthetic", synthetic},
                {"synth_amp", synth_amp},
                {"synth_center", synth_center},
                {"synth_width", synth_width},
                {"synth_y11", synth_y11},
                {"synth_y21", synth_y21},
                {"g_synthetic", g_synthetic},
                {"sup_radius", sup_radius},
                {"eta", eta},
                {"seed", seed},
                {"out_dir", out_dir}};
  }

  static ExperimentConfig from_json(const json& j) {
    ExperimentConfig c;
    if (j.value("schema", 1) != 1)
      throw precondition_error("ExperimentConfig: unsupported schema version");
    auto get = [&](const char* k, auto& v) {
      if (j.contains(k)) v = j.at(k).get<std::decay_t<decltype(v)>>();
    };
    get("a_slope", c.a_slope);
    get("a2_poly", c.a2_poly);
    get("b_poly", c.b_poly);
    get("c_poly", c.c_poly);
    get("epsilon", c.epsilon);
    get("r0", c.r0);
    get("data_amp", c.data_amp);
    get("dr", c.dr);
    get("t_max", c.t_max);
    get("cfl", c.cfl);
    get("ko_sigma", c.ko_sigma);
    get("t_start", c.t_start);
    get("fan_dq_inner", c.fan_dq_inner);
    get("fan_growth", c.fan_growth);
    get("q_max", c.q_max);
    get("n_s_samples", c.n_s_samples);
    get("l_max", c.l_max);
    get("goursat_h", c.goursat_h);
    get("v_pbar_max", c.v_pbar_max);
    get("v_sbar_max", c.v_sbar_max);
    get("n_t_frkl", c.n_t_frkl);
    get("synthetic", c.synthetic);
    get("synth_amp", c.synth_amp);
    get("synth_center", c.synth_center);
    get("synth_width", c.synth_width);
    get("synth_y11", c.synth_y11);
    get("synth_y21", c.synth_y21);
    get("g_synthetic", c.g_synthetic);
    get("sup_radius", c.sup_radius);
    get("eta", c.eta);
    get("seed", c.seed);
    get("out_dir", c.out_dir);
    return c;
  }

  std::string hash() const { return io::hash_hex(to_json().dump()); }
};

// ---------------------------------------------------------------------------

struct RunArtifact {
  ExperimentConfig config;
  std::string config_hash;
  std::shared_ptr<sphere::SphereGrid> grid;

  // stage products
  eikonal::OpticalFunction optical;
  eikonal::LimitProfiles limits;
  reduced::RadiationProfile ahat;
  reduced::CharDataL frkl;
  linwave::ConeData cone;
  linwave::ModeSet v;
  reduced::RadiationProfile B;

  // solver-side series
  std::vector<double> axis_t, axis_u, sup_u;
  std::vector<double> probe_t, probe_r, probe_u;  // along r = t/2
  QnlwDiagnostics solver_diag;

  double g_const = 0.0;
  bool has_solver_data = false;
  std::string error_stage;  // empty on success
  std::string error_message;
  json manifest;
  std::vector<std::string> files;

  // L0(rho): the sphere average of L, interpolated on its t-grid.
  double l0_at(double rho) const {
    if (frkl.t_grid.empty()) return 0.0;
    if (rho <= frkl.t_grid.front() || rho >= frkl.t_grid.back()) return 0.0;
    if (!l0_interp_) {
      std::vector<double> l0(frkl.t_grid.size());
      for (std::size_t i = 0; i < frkl.t_grid.size(); ++i) {
        if (frkl.n_omega == 1) {
          l0[i] = frkl.value(i, 0);
        } else {
          double acc = 0.0, wsum = 0.0;
          for (std::size_t it2 = 0; it2 < grid->n_theta(); ++it2)
            for (std::size_t jp = 0; jp < grid->n_phi(); ++jp) {
              acc += frkl.value(i, grid->node(it2, jp)) * grid->weight(it2, jp);
              wsum += grid->weight(it2, jp);
            }
          l0[i] = acc / wsum;
        }
      }
      l0_interp_ = std::make_shared<CubicSpline>(frkl.t_grid, l0);
    }
    return (*l0_interp_)(rho);
  }

  // v at the axis through the l = 0 closed form (exact in the mode).
  double v_axis(double t) const {
    return linwave::v0_closed_form([this](double p) { return l0_at(p); }, t,
                                   0.0);
  }
  double v0_at(double t, double r) const {
    return linwave::v0_closed_form([this](double p) { return l0_at(p); }, t,
                                   r);
  }

 private:
  mutable std::shared_ptr<CubicSpline> l0_interp_;
};

// ---------------------------------------------------------------------------
// Synthetic scattering data from the config.

inline reduced::ProfileFn synthetic_ahat(const ExperimentConfig& c) {
  const double h = c.synth_amp, ctr = c.synth_center, w = c.synth_width;
  reduced::ProfileFn p;
  p.support_hi = ctr + w;
  p.sphere_const = (c.synth_y11 == 0.0 && c.synth_y21 == 0.0);
  const double y11 = c.synth_y11, y21 = c.synth_y21;
  p.f = [h, ctr, w, y11, y21](double q, std::size_t) {
    const double x = (q - ctr) / w;
    if (std::abs(x) >= 1.0) return 0.0;
    return h * std::exp(1.0 - 1.0 / (1.0 - x * x));
  };
  return p;
}

// Angular modulation used by synthetic runs: 1 + y11 Y_(1),1 + y21 Y_(2),1.
inline double synthetic_modulation(const ExperimentConfig& c, double w1,
                                   double w2, double w3) {
  return 1.0 + c.synth_y11 * sphere::paper_y1(1, w1, w2, w3) +
         c.synth_y21 * sphere::paper_y2(1, w1, w2, w3);
}

// ---------------------------------------------------------------------------
// Pipeline.

inline std::vector<double> frkl_t_grid(const ExperimentConfig& c) {
  return logspace(4.0, std::max(0.9 * c.t_max, 100.0), c.n_t_frkl);
}

inline RunArtifact run_pipeline(const ExperimentConfig& c) {
  RunArtifact art;
  art.config = c;
  art.config_hash = c.hash();
  art.grid = std::make_shared<sphere::SphereGrid>(c.l_max);
  const double delta = c.delta();

  std::string stage = "setup";
  try {
    const MetricSpec metric = c.metric();
    reduced::GFn g = c.synthetic
                         ? reduced::GFn::constant(c.g_synthetic)
                         : reduced::GFn::constant(metric.g_constant());
    art.g_const = c.synthetic ? c.g_synthetic : metric.g_constant();

    if (!c.synthetic) {
      stage = "solve+eikonal";
      QnlwParams qp;
      qp.metric = metric;
      qp.data = InitialData::gaussian_bump(c.r0, c.epsilon, c.data_amp);
      qp.t_max = c.t_max;
      qp.dr = c.dr;
      qp.cfl = c.cfl;
      qp.ko_sigma = c.ko_sigma;
      qp.store_every_t = 0;

      QGridSpec qs;
      qs.q_max = c.q_max;
      qs.r0 = c.r0;
      qs.dq_inner = c.fan_dq_inner;
      qs.growth = c.fan_growth;
      auto qlab = make_q_grid(qs);
      eikonal::RegionSpec region{c.t_start, 0.5, c.r0};
      auto fan = std::make_shared<eikonal::FanObserver>(
          metric, region, c.epsilon, qlab,
          eikonal::fan_sample_times(c.t_start, c.t_max * 0.995, c.epsilon,
                                    c.n_s_samples));

      const std::size_t sup_j =
          std::size_t(std::min(c.sup_radius / c.dr, 1e7));
      std::vector<StepObserver> obs;
      obs.push_back([fan](const StepView& v) { (*fan)(v); });
      obs.push_back([&art, sup_j](const StepView& v) {
        if (v.n % 64 != 0) return;
        art.axis_t.push_back(v.t);
        art.axis_u.push_back(v.u_axis());
        double m = 0.0;
        const std::size_t hi = std::min(sup_j, v.w->size() - 1);
        for (std::size_t j = 1; j <= hi; ++j)
          m = std::max(m, std::abs((*v.w)[j]) / (v.dr * double(j)));
        art.sup_u.push_back(m);
      });
      // u along r = t/2 at the frkl t-grid times
      auto probes = frkl_t_grid(c);
      auto next_probe = std::make_shared<std::size_t>(0);
      obs.push_back([&art, probes, next_probe](const StepView& v) {
        while (*next_probe < probes.size() && probes[*next_probe] <= v.t) {
          const double t = probes[*next_probe];
          const double r = 0.5 * t;
          if (r < v.dr * double(v.w->size() - 1)) {
            art.probe_t.push_back(v.t);
            art.probe_r.push_back(r);
            art.probe_u.push_back(v.u_at(r));
          }
          ++*next_probe;
        }
      });

      auto res = evolve_qnlw(qp, obs);
      art.solver_diag = res.diag;
      art.has_solver_data = true;
      art.optical = fan->finalize();

      stage = "extract";
      auto m = eikonal::compute_mu_u(art.optical, metric);
      eikonal::ExtractParams ep;
      ep.r0 = c.r0;
      art.limits = eikonal::extract_limits(m, g, ep);

      stage = "reparametrize";
      auto rep = eikonal::reparametrize(art.limits, c.r0);
      art.ahat = rep.ahat;
    } else {
      stage = "synthetic-inject";
      auto pf = synthetic_ahat(c);
      // sample the synthetic profile onto a q-grid
      QGridSpec qs;
      qs.q_max = c.q_max;
      qs.r0 = c.r0;
      qs.dq_inner = c.fan_dq_inner;
      auto qg = make_q_grid(qs);
      reduced::RadiationProfile prof;
      prof.kind = reduced::ProfileKind::Ahat;
      prof.q = qg;
      prof.n_omega = pf.sphere_const ? 1 : art.grid->n_nodes();
      prof.grid = pf.sphere_const ? nullptr : art.grid.get();
      prof.support_hi = pf.support_hi;
      prof.values.assign(qg.size() * prof.n_omega, 0.0);
      for (std::size_t i = 0; i < qg.size(); ++i)
        for (std::size_t n = 0; n < prof.n_omega; ++n) {
          double mod = 1.0;
          if (!pf.sphere_const) {
            const std::size_t it = n / art.grid->n_phi();
            const std::size_t jp = n % art.grid->n_phi();
            const auto w = art.grid->omega(it, jp);
            mod = synthetic_modulation(c, w[0], w[1], w[2]);
          }
          prof.value(i, n) = pf(qg[i]) * mod;
        }
      prof.fit_decay();
      art.ahat = prof;
      // limits consistent with the hat normalization (A = Ahat, A1 = -2,
      // A2 = Ahat), carrying any angular structure of the injected data
      art.limits.A = prof;
      art.limits.A.kind = reduced::ProfileKind::A;
      art.limits.A2 = prof;
      art.limits.A2.kind = reduced::ProfileKind::A2;
      art.limits.A1 = prof;
      art.limits.A1.kind = reduced::ProfileKind::A1;
      for (auto& v : art.limits.A1.values) v = -2.0;
      art.limits.epsilon = c.epsilon;
      art.limits.delta = delta;
    }

    stage = "frkl";
    reduced::FrkLParams fp;
    fp.epsilon = c.epsilon;
    fp.delta = delta;
    art.frkl = reduced::frkl_from_ahat(art.ahat.fn(), g, frkl_t_grid(c), fp,
                                       art.grid.get());

    stage = "cone-data";
    art.cone = linwave::cone_data_from_frkl(art.frkl);

    stage = "goursat";
    linwave::GoursatParams gp;
    gp.h = c.goursat_h;
    gp.pbar_max = c.v_pbar_max;
    gp.sbar_max = c.v_sbar_max;
    art.v = linwave::assemble_v(art.cone, gp, c.epsilon, 1e-300);

    stage = "extract-B";
    const double p_lo = -(c.v_pbar_max - 4.0 * c.goursat_h);
    auto p_grid = linspace(p_lo, -1.0, std::size_t((-p_lo - 1.0) / 0.25) + 1);
    art.B = linwave::extract_b(art.v, p_grid, art.grid.get());
  } catch (const std::exception& e) {
    art.error_stage = stage;
    art.error_message = e.what();
  }

  // manifest
  art.manifest = json{{"config", c.to_json()},
                      {"config_hash", art.config_hash},
                      {"version", kVersion},
                      {"modules", json{{"sphere", 1},
                                       {"qnlw_solver", 1},
                                       {"eikonal", 1},
                                       {"reduced", 1},
                                       {"linwave", 1},
                                       {"lab", 1}}},
                      {"g_constant", art.g_const},
                      {"error_stage", art.error_stage},
                      {"error_message", art.error_message}};
  if (art.has_solver_data) {
    art.manifest["solver"] = json{
        {"max_abs_u", art.solver_diag.max_abs_u},
        {"min_discriminant", art.solver_diag.min_discriminant},
        {"cfl_margin", art.solver_diag.cfl_margin},
        {"exterior_max_w", art.solver_diag.exterior_max_w},
        {"hyperbolicity_warning", art.solver_diag.hyperbolicity_warning},
        {"steps", art.solver_diag.steps}};
    // pointwise-smallness monitor: fitted exponent of sup_r |u|(t)
    if (art.sup_u.size() > 8) {
      std::vector<double> ts(art.axis_t.begin() + art.axis_t.size() / 2,
                             art.axis_t.end());
      std::vector<double> us(art.sup_u.begin() + art.sup_u.size() / 2,
                             art.sup_u.end());
      try {
        art.manifest["sup_u_late_exponent"] = fit_power_law(ts, us).slope;
      } catch (const precondition_error&) {
      }
    }
  }
  if (!art.error_stage.empty()) return art;
  art.manifest["extraction"] =
      json{{"median_rms_residual", art.limits.median_rms_residual},
           {"max_rms_residual", art.limits.max_rms_residual},
           {"unreliable", art.limits.unreliable},
           {"ahat_decay_exponent", art.ahat.decay_exponent}};
  return art;
}

// ---------------------------------------------------------------------------
// Reports.

struct TailReport {
  std::vector<double> t, u_axis, prediction, rel_err, sup_u;
  double fitted_slope_u = 0.0;        // log-log slope of |u(t,0)|
  double fitted_slope_pred = 0.0;     // same for the prediction
  double rel_err_first_half = 0.0;    // window means
  double rel_err_second_half = 0.0;
  bool decreasing = false;
  bool null_condition_like = false;   // both tails below the noise floor
};

inline TailReport tail_check(const RunArtifact& art, double t_lo,
                             double t_hi) {
  if (!art.has_solver_data)
    throw precondition_error("tail_check: artifact lacks solver data");
  if (t_hi > art.config.t_max || t_lo <= 20.0)
    throw precondition_error("tail_check: window outside the run");
  TailReport rep;
  for (std::size_t i = 0; i < art.axis_t.size(); ++i) {
    const double t = art.axis_t[i];
    if (t < t_lo || t > t_hi) continue;
    const double pred = 2.0 * chi_gt(10.0, 0.5 * t) * art.l0_at(0.5 * t) / t;
    rep.t.push_back(t);
    rep.u_axis.push_back(art.axis_u[i]);
    rep.prediction.push_back(pred);
    rep.sup_u.push_back(art.sup_u[i]);
    rep.rel_err.push_back(pred != 0.0
                              ? std::abs(art.axis_u[i] - pred) / std::abs(pred)
                              : std::abs(art.axis_u[i]));
  }
  if (rep.t.size() < 8) throw precondition_error("tail_check: window too thin");
  // Scheme-noise stand-in for the axis reading: the damped dispersive wake
  // scales like eps dr^2 times an O(0.1) constant at these resolutions.
  const double noise_floor =
      std::max(1e-13, 0.05 * art.config.epsilon * sq(art.config.dr));
  double umax = 0.0, pmax = 0.0;
  for (std::size_t i = 0; i < rep.t.size(); ++i) {
    umax = std::max(umax, std::abs(rep.u_axis[i]));
    pmax = std::max(pmax, std::abs(rep.prediction[i]));
  }
  if (umax < noise_floor && pmax < 1e-13) {
    rep.null_condition_like = true;
    return rep;
  }
  rep.fitted_slope_u = fit_power_law(rep.t, rep.u_axis).slope;
  if (pmax > 1e-13)
    rep.fitted_slope_pred = fit_power_law(rep.t, rep.prediction).slope;
  // trend across the window (log-medial split)
  const double t_mid = std::sqrt(t_lo * t_hi);
  double s1 = 0, s2 = 0;
  std::size_t n1 = 0, n2 = 0;
  for (std::size_t i = 0; i < rep.t.size(); ++i) {
    if (rep.t[i] < t_mid) {
      s1 += rep.rel_err[i];
      ++n1;
    } else {
      s2 += rep.rel_err[i];
      ++n2;
    }
  }
  rep.rel_err_first_half = n1 ? s1 / double(n1) : 0.0;
  rep.rel_err_second_half = n2 ? s2 / double(n2) : 0.0;
  rep.decreasing = rep.rel_err_second_half < rep.rel_err_first_half;
  return rep;
}

struct RadFieldReport {
  std::vector<double> p, ahat, b, diff;
  double exponent_ahat = 0.0;
  double exponent_diff = 0.0;
  bool difference_decays_faster = false;
};

inline RadFieldReport radfield_check(const RunArtifact& art, double p_lo,
                                     double p_hi) {
  if (art.B.q.empty() || art.ahat.q.empty())
    throw precondition_error("radfield_check: profiles missing");
  if (p_lo < art.B.q.front() || p_hi > art.B.q.back() || p_hi > -1.0)
    throw precondition_error("radfield_check: window outside extraction");
  RadFieldReport rep;
  auto af = art.ahat.fn();
  auto bf = art.B.fn();
  for (double p = p_lo; p <= p_hi + 1e-12; p += (p_hi - p_lo) / 48.0) {
    rep.p.push_back(p);
    const double a = af(p, 0), b = bf(p, 0);
    rep.ahat.push_back(a);
    rep.b.push_back(b);
    rep.diff.push_back(std::abs(a - b));
  }
  std::vector<double> absp(rep.p.size());
  double dmax = 0.0;
  for (std::size_t i = 0; i < rep.p.size(); ++i) {
    absp[i] = -rep.p[i];
    dmax = std::max(dmax, rep.diff[i]);
  }
  rep.exponent_ahat = fit_power_law(absp, rep.ahat).slope;
  if (dmax < 1e-300) {
    rep.exponent_diff = 0.0;  // identically zero difference
    rep.difference_decays_faster = true;
  } else {
    rep.exponent_diff = fit_power_law(absp, rep.diff).slope;
    rep.difference_decays_faster = rep.exponent_diff < rep.exponent_ahat;
  }
  return rep;
}

struct UvReport {
  std::vector<double> t, r, u, v, diff, ratio_a, ratio_b;
  double ratio_a_spread = 0.0;  // max/min over the probe set
  double ratio_b_spread = 0.0;
};

inline UvReport uv_difference(const RunArtifact& art) {
  if (!art.has_solver_data)
    throw precondition_error("uv_difference: artifact lacks solver data");
  UvReport rep;
  const double eps = art.config.epsilon, eta = art.config.eta;
  for (std::size_t i = 0; i < art.probe_t.size(); ++i) {
    const double t = art.probe_t[i], r = art.probe_r[i];
    if (t < 40.0) continue;
    const double u = art.probe_u[i];
    const double v = art.v0_at(t, r);
    const double d = std::abs(u - v);
    const double n1 = eps * std::pow(jbrk(t - r), -1.5 + 0.5 * eta);
    const double n2 = std::pow(eps, 0.5 - 0.5 * eta) / jbrk(t) *
                      std::pow(jbrk(t - r), -0.5 + 0.5 * eta);
    rep.t.push_back(t);
    rep.r.push_back(r);
    rep.u.push_back(u);
    rep.v.push_back(v);
    rep.diff.push_back(d);
    rep.ratio_a.push_back(d / n1);
    rep.ratio_b.push_back(d / n2);
  }
  auto spread = [](const std::vector<double>& v) {
    double lo = 1e300, hi = 0.0;
    for (double x : v)
      if (x > 0) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    return (lo < hi && lo > 0.0) ? hi / lo : 1.0;
  };
  rep.ratio_a_spread = spread(rep.ratio_a);
  rep.ratio_b_spread = spread(rep.ratio_b);
  return rep;
}

// ---------------------------------------------------------------------------
// Rigidity functionals.

struct RigidityReport {
  // identity residuals |LHS - RHS| and scales, per mode checked
  double residual_l0 = 0.0, scale_l0 = 0.0;
  double residual_l1 = 0.0, scale_l1 = 0.0;
  double residual_l2 = 0.0, scale_l2 = 0.0;
  bool checked_l1 = false, checked_l2 = false;
  // witness integral over {|frkA| >= b, |G| >= d} across the t-grid
  std::vector<double> witness_t, witness;
  double witness_floor = 0.0;
  bool witness_positive_persistent = false;
  double c0_standin = 0.0;
};

struct RigidityParams {
  std::vector<double> t_grid = {60.0, 120.0, 240.0, 480.0};
  double ratio = 0.5;          // probes at r = ratio * t
  double witness_b_frac = 0.5; // |frkA| >= b = frac * max|frkA|
  double witness_d_frac = 0.5; // |G| >= d = frac * max|G|
};

// frkA^2 = A^2 (1 + eps G A / 2)(2 + eps G A / 2) J; the precondition
// 1 + eps G A / 2 > 0 and 2 + eps G A / 2 > 0 is checked.
inline double frk_a_squared(double A, double A1, double gv, double eps,
                            double delta) {
  const double f1 = 1.0 + 0.5 * eps * gv * A;
  const double f2 = 2.0 + 0.5 * eps * gv * A;
  if (f1 <= 0.0 || f2 <= 0.0)
    throw precondition_error("rigidity: epsilon too large for positivity");
  const double J = -2.0 / (A1 * std::exp(0.5 * gv * A * delta));
  return A * A * f1 * f2 * J;
}

inline RigidityReport rigidity_scan(const RunArtifact& art,
                                    const RigidityParams& par = {}) {
  RigidityReport rep;
  const double eps = art.config.epsilon;
  const double delta = art.config.delta();
  const auto& A = art.limits.A;
  const auto& A1 = art.limits.A1;
  auto afn = A.fn();
  auto a1fn = A1.fn();
  const auto& g = *art.grid;
  const bool angular = (A.n_omega > 1);

  // epsilon-scaling of the identity: LHS at (t, r) with tau = (t + r) / 2
  auto lhs = [&](double tau, auto&& sphere_weight) {
    double acc = 0.0;
    for (std::size_t it = 0; it < g.n_theta(); ++it)
      for (std::size_t jp = 0; jp < g.n_phi(); ++jp) {
        const std::size_t node = g.node(it, jp);
        const auto w = g.omega(it, jp);
        const double gv = art.g_const;  // constant G for this artifact class
        auto integrand = [&](double p) {
          const double a = afn(p, angular ? node : 0);
          const double a1 = a1fn(p, angular ? node : 0);
          const double fa2 = frk_a_squared(a, a1, gv, eps, delta);
          return gv * fa2 *
                 std::pow(tau, -1.0 + 0.5 * eps * gv * a);
        };
        const double qint = reduced::integrate_q(
            integrand, A.q.front(), A.support_hi, A.q, 1e-11);
        acc += sphere_weight(w[0], w[1], w[2]) * qint * g.weight(it, jp);
      }
    return acc;
  };

  // RHS by nested differencing of the marched modes along fixed t - r.
  const double hh = art.config.goursat_h;
  auto D = [&](auto&& f, double t, double r) {  // (d_t + d_r)
    return (f(t + hh, r + hh) - f(t - hh, r - hh)) / (2.0 * hh);
  };

  // representative probes
  double worst0 = 0, scale0 = 0, worst1 = 0, scale1 = 0, worst2 = 0,
         scale2 = 0;
  for (double t : par.t_grid) {
    const double r = par.ratio * t;
    if (t + r + 6 * hh > art.config.v_sbar_max ||
        t - r + 6 * hh > art.config.v_pbar_max)
      continue;
    const double tau = 0.5 * (t + r);
    if (art.v.has_l0) {
      auto w0 = [&](double tt, double rr) { return art.v.l0.sample_w(tt, rr); };
      auto in1 = [&](double tt, double rr) {
        return sq(0.5 * (tt + rr)) * D(w0, tt, rr);
      };
      auto in2 = [&](double tt, double rr) {
        return sq(0.5 * (tt + rr)) * D(in1, tt, rr);
      };
      const double rhs =
          -8.0 * kPi / sq(eps) * std::pow(tau, -2.0) * D(in2, t, r);
      const double l = lhs(tau, [](double, double, double) { return 1.0; });
      worst0 = std::max(worst0, std::abs(l - rhs));
      scale0 = std::max({scale0, std::abs(l), std::abs(rhs)});
    }
    if (art.v.has_l1[0]) {
      rep.checked_l1 = true;
      auto w1 = [&](double tt, double rr) {
        return art.v.l1[0].sample_w(tt, rr);
      };
      auto in1 = [&](double tt, double rr) { return sq(rr) * D(w1, tt, rr); };
      auto in2 = [&](double tt, double rr) {
        return std::pow(0.5 * (tt + rr), 4.0) / sq(rr) * D(in1, tt, rr);
      };
      const double rhs = -2.0 / sq(eps) * std::pow(tau, -2.0) * D(in2, t, r);
      const double l = lhs(tau, [](double a, double b, double cc) {
        return sphere::paper_y1(1, a, b, cc);
      });
      worst1 = std::max(worst1, std::abs(l - rhs));
      scale1 = std::max({scale1, std::abs(l), std::abs(rhs)});
    }
    if (art.v.has_l2[0]) {
      rep.checked_l2 = true;
      auto w2 = [&](double tt, double rr) {
        return art.v.l2[0].sample_w(tt, rr);
      };
      auto in1 = [&](double tt, double rr) { return sq(rr) * D(w2, tt, rr); };
      auto in2 = [&](double tt, double rr) { return sq(rr) * D(in1, tt, rr); };
      const double rhs = -2.0 / sq(eps) * std::pow(tau, 2.0) *
                         std::pow(r, -4.0) * D(in2, t, r);
      const double l = lhs(tau, [](double a, double b, double cc) {
        return sphere::ortho_y2(1, a, b, cc);
      });
      worst2 = std::max(worst2, std::abs(l - rhs));
      scale2 = std::max({scale2, std::abs(l), std::abs(rhs)});
    }
  }
  rep.residual_l0 = worst0;
  rep.scale_l0 = scale0;
  rep.residual_l1 = worst1;
  rep.scale_l1 = scale1;
  rep.residual_l2 = worst2;
  rep.scale_l2 = scale2;

  // witness integral
  double amax = 0.0, gmax = std::abs(art.g_const), gmin_a = 0.0;
  std::vector<double> fa(A.q.size() * A.n_omega, 0.0);
  for (std::size_t i = 0; i < A.q.size(); ++i)
    for (std::size_t n = 0; n < A.n_omega; ++n) {
      const double v = frk_a_squared(A.value(i, n), A1.value(i, n),
                                     art.g_const, eps, delta);
      fa[i * A.n_omega + n] = std::sqrt(std::max(v, 0.0));
      amax = std::max(amax, fa[i * A.n_omega + n]);
      gmin_a = std::min(gmin_a, art.g_const * A.value(i, n));
    }
  rep.c0_standin = 8.0 * (std::max(0.0, -gmin_a) + 1.0);
  const double b = par.witness_b_frac * amax;
  const double d = par.witness_d_frac * gmax;
  for (double t : par.t_grid) {
    const double tau = 0.5 * (1.0 + par.ratio) * t;  // (t + r) / 2
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < A.q.size(); ++i) {
      const double dq = A.q[i + 1] - A.q[i];
      for (std::size_t n = 0; n < A.n_omega; ++n) {
        const double fav =
            0.5 * (fa[i * A.n_omega + n] + fa[(i + 1) * A.n_omega + n]);
        if (fav < b || gmax < d) continue;
        const double a =
            0.5 * (A.value(i, n) + A.value(i + 1, n));
        const double expo =
            0.5 * eps * (rep.c0_standin / 8.0 + art.g_const * a);
        double wgt = kFourPi;
        if (A.n_omega > 1) {
          const std::size_t it = n / g.n_phi(), jp = n % g.n_phi();
          wgt = g.weight(it, jp);
        }
        acc += sq(art.g_const) * sq(fav) * std::pow(std::max(tau, 1.0), expo) *
               dq * wgt;
      }
    }
    rep.witness_t.push_back(t);
    rep.witness.push_back(acc);
  }
  if (!rep.witness.empty()) {
    double lo = 1e300;
    for (double v : rep.witness) lo = std::min(lo, v);
    rep.witness_floor = lo;
    rep.witness_positive_persistent =
        rep.witness.front() == 0.0
            ? false
            : lo > 0.25 * rep.witness.front();
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Emission.

inline std::vector<std::string> emit(RunArtifact& art,
                                     const std::vector<std::string>& kinds = {
                                         "csv", "json", "svg"}) {
  if (art.config.out_dir.empty())
    throw precondition_error("emit: config.out_dir not set");
  const io::fs::path root(art.config.out_dir);
  std::vector<std::string> files;
  auto want = [&](const std::string& k) {
    for (const auto& x : kinds)
      if (x == k) return true;
    return false;
  };

  if (want("json")) {
    io::write_json(root / "manifest.json", art.manifest);
    files.push_back((root / "manifest.json").string());
  }
  if (art.error_stage.empty()) {
    if (want("csv")) {
      io::write_limit_profiles(root / "limits", art.limits);
      files.push_back((root / "limits.csv").string());
      files.push_back((root / "limits.json").string());
      io::write_profile(root / "ahat", art.ahat,
                        {{"epsilon", art.config.epsilon},
                         {"delta", art.config.delta()}});
      files.push_back((root / "ahat.csv").string());
      files.push_back((root / "ahat.json").string());
      io::write_frkl(root / "frkl", art.frkl, art.config.epsilon,
                     art.config.delta());
      files.push_back((root / "frkl.csv").string());
      files.push_back((root / "frkl.json").string());
      io::write_profile(root / "bfield", art.B);
      files.push_back((root / "bfield.csv").string());
      files.push_back((root / "bfield.json").string());
      if (art.has_solver_data) {
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < art.axis_t.size(); ++i)
          rows.push_back({art.axis_t[i], art.axis_u[i], art.sup_u[i]});
        io::write_table(root / "axis_series.csv", {"t", "u_axis", "sup_u"},
                        rows);
        files.push_back((root / "axis_series.csv").string());
      }
    }
    if (want("svg") && art.has_solver_data && !art.axis_t.empty()) {
      svg::Series su{"|u(t,0)|", "#1f6fb2", art.axis_t, {}};
      svg::Series sp{"|2 L0(t/2)/t|", "#b23a1f", art.axis_t, {}};
      for (std::size_t i = 0; i < art.axis_t.size(); ++i) {
        su.y.push_back(std::abs(art.axis_u[i]));
        const double t = art.axis_t[i];
        sp.y.push_back(std::abs(2.0 * chi_gt(10.0, 0.5 * t) *
                                art.l0_at(0.5 * t) / t));
      }
      svg::PlotSpec spec;
      spec.title = "late-time tail vs prediction";
      spec.xlabel = "t";
      spec.ylabel = "|value|";
      spec.logx = spec.logy = true;
      svg::write_plot(root / "tail.svg", spec, {su, sp});
      files.push_back((root / "tail.svg").string());
    }
    if (want("svg") && !art.ahat.q.empty()) {
      svg::Series sa{"|Ahat|", "#1f6fb2", {}, {}};
      for (std::size_t i = 0; i < art.ahat.q.size(); ++i) {
        sa.x.push_back(-art.ahat.q[i]);
        sa.y.push_back(std::abs(art.ahat.value(i, 0)));
      }
      svg::PlotSpec spec;
      spec.title = "scattering data decay";
      spec.xlabel = "-q";
      spec.ylabel = "|Ahat|";
      spec.logx = spec.logy = true;
      svg::write_plot(root / "ahat_decay.svg", spec, {sa});
      files.push_back((root / "ahat_decay.svg").string());
    }
  }
  art.files = files;
  return files;
}

}  // namespace wavetail::lab
