// wavetail: numerical laboratory for late-time tails of quasilinear waves.
//
// Subcommands run the pipeline (or stages of it) from an ExperimentConfig
// assembled from defaults, an optional --config JSON file, and flags.
// Exit codes: 0 success, 2 precondition failure, 3 numerical failure.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wavetail/eikonal.hpp"
#include "wavetail/grid.hpp"
#include "wavetail/lab.hpp"

using namespace wavetail;
using nlohmann::json;

namespace {

struct CliState {
  lab::ExperimentConfig cfg;
  std::string config_file;
  std::string ahat_in;  // staged entry: load Ahat instead of running earlier
};

void add_common(CLI::App* cmd, CliState& st) {
  cmd->add_option("--config", st.config_file, "JSON config file");
  cmd->add_option("--epsilon", st.cfg.epsilon, "data amplitude");
  cmd->add_option("--r0", st.cfg.r0, "data support radius");
  cmd->add_option("--a-slope", st.cfg.a_slope, "a(u) = 1 + a_slope u");
  cmd->add_option("--dr", st.cfg.dr, "solver spacing");
  cmd->add_option("--t-max", st.cfg.t_max, "evolution time");
  cmd->add_option("--t-start", st.cfg.t_start,
                  "gauge surface (delta = eps ln t_start)");
  cmd->add_option("--q-max", st.cfg.q_max, "fan depth in q");
  cmd->add_option("--n-s-samples", st.cfg.n_s_samples, "fan sample rows");
  cmd->add_option("--goursat-h", st.cfg.goursat_h, "double-null step");
  cmd->add_option("--v-pbar-max", st.cfg.v_pbar_max, "v domain depth");
  cmd->add_option("--v-sbar-max", st.cfg.v_sbar_max, "v domain extent");
  cmd->add_option("--ko-sigma", st.cfg.ko_sigma, "dissipation strength");
  cmd->add_flag("--synthetic", st.cfg.synthetic,
                "inject synthetic scattering data (skip solver)");
  cmd->add_option("--synth-amp", st.cfg.synth_amp, "synthetic bump height");
  cmd->add_option("--synth-y11", st.cfg.synth_y11, "degree-1 admixture");
  cmd->add_option("--synth-y21", st.cfg.synth_y21, "degree-2 admixture");
  cmd->add_option("--g-synthetic", st.cfg.g_synthetic, "G for synthetic runs");
  cmd->add_option("--seed", st.cfg.seed, "synthetic-generator seed");
  cmd->add_option("--out", st.cfg.out_dir, "output directory");
}

lab::ExperimentConfig finalize_config(CliState& st, CLI::App* cmd) {
  lab::ExperimentConfig cfg;
  if (!st.config_file.empty())
    cfg = lab::ExperimentConfig::from_json(io::read_json(st.config_file));
  // flags override file values: re-apply any that the user passed
  lab::ExperimentConfig& f = st.cfg;
  auto passed = [&](const std::string& name) {
    auto* opt = cmd->get_option_no_throw(name);
    return opt && opt->count() > 0;
  };
  if (passed("--epsilon")) cfg.epsilon = f.epsilon;
  if (passed("--r0")) cfg.r0 = f.r0;
  if (passed("--a-slope")) cfg.a_slope = f.a_slope;
  if (passed("--dr")) cfg.dr = f.dr;
  if (passed("--t-max")) cfg.t_max = f.t_max;
  if (passed("--t-start")) cfg.t_start = f.t_start;
  if (passed("--q-max")) cfg.q_max = f.q_max;
  if (passed("--n-s-samples")) cfg.n_s_samples = f.n_s_samples;
  if (passed("--goursat-h")) cfg.goursat_h = f.goursat_h;
  if (passed("--v-pbar-max")) cfg.v_pbar_max = f.v_pbar_max;
  if (passed("--v-sbar-max")) cfg.v_sbar_max = f.v_sbar_max;
  if (passed("--ko-sigma")) cfg.ko_sigma = f.ko_sigma;
  if (passed("--synthetic")) cfg.synthetic = f.synthetic;
  if (passed("--synth-amp")) cfg.synth_amp = f.synth_amp;
  if (passed("--synth-y11")) cfg.synth_y11 = f.synth_y11;
  if (passed("--synth-y21")) cfg.synth_y21 = f.synth_y21;
  if (passed("--g-synthetic")) cfg.g_synthetic = f.g_synthetic;
  if (passed("--seed")) cfg.seed = f.seed;
  if (passed("--out")) cfg.out_dir = f.out_dir;
  if (cfg.out_dir.empty()) {
    const char* root = std::getenv("WAVETAIL_OUT");
    cfg.out_dir = (root ? std::string(root) : std::string("wavetail_out")) +
                  "/run_" + cfg.hash().substr(0, 12);
  }
  return cfg;
}

lab::RunArtifact run_checked(const lab::ExperimentConfig& cfg) {
  auto art = lab::run_pipeline(cfg);
  if (!art.error_stage.empty()) {
    std::cerr << "stage '" << art.error_stage
              << "' failed: " << art.error_message << "\n";
    lab::emit(art, {"json"});
    throw numerical_error("pipeline halted at stage " + art.error_stage);
  }
  return art;
}

void print_kv(const std::string& k, const std::string& v) {
  std::cout << "  " << k << ": " << v << "\n";
}

int cmd_solve(const lab::ExperimentConfig& cfg) {
  QnlwParams p;
  p.metric = cfg.metric();
  p.data = InitialData::gaussian_bump(cfg.r0, cfg.epsilon, cfg.data_amp);
  p.t_max = cfg.t_max;
  p.dr = cfg.dr;
  p.cfl = cfg.cfl;
  p.ko_sigma = cfg.ko_sigma;
  // Store a decimated field for inspection; exact-at-node decimation.
  const double target = 0.1;
  p.store_every_t = std::max<std::size_t>(
      1, std::size_t(target / (p.cfl * p.dr / (1.0 + p.speed_margin))));
  p.store_every_r = std::max<std::size_t>(1, std::size_t(target / p.dr));
  auto res = evolve_qnlw(p);
  io::fs::path root(cfg.out_dir);
  res.field.meta.run_id = cfg.hash().substr(0, 12);
  io::write_field(root / "field", res.field, cfg.to_json());
  io::write_field_csv_decimated(root / "field_preview.csv", res.field,
                                std::max<std::size_t>(1, res.field.nt() / 200),
                                std::max<std::size_t>(1, res.field.nr() / 400));
  std::cout << "solve: done\n";
  print_kv("steps", std::to_string(res.diag.steps));
  print_kv("max|u|", io::fmt(res.diag.max_abs_u));
  print_kv("exterior max |w|", io::fmt(res.diag.exterior_max_w));
  print_kv("field", (root / "field.bin").string());
  return 0;
}

int cmd_extract(const lab::ExperimentConfig& cfg) {
  auto art = run_checked(cfg);
  lab::emit(art, {"csv", "json"});
  std::cout << "extract: done\n";
  print_kv("median fit residual", io::fmt(art.limits.median_rms_residual));
  print_kv("max fit residual", io::fmt(art.limits.max_rms_residual));
  print_kv("Ahat decay exponent", io::fmt(art.ahat.decay_exponent));
  print_kv("out", cfg.out_dir);
  return 0;
}

int cmd_frkl(const lab::ExperimentConfig& cfg, const std::string& ahat_in) {
  if (!ahat_in.empty()) {
    auto prof = io::read_profile(ahat_in, reduced::ProfileKind::Ahat);
    reduced::FrkLParams fp;
    fp.epsilon = cfg.epsilon;
    fp.delta = cfg.delta();
    sphere::SphereGrid grid(cfg.l_max);
    auto L = reduced::frkl_from_ahat(prof.fn(),
                                     reduced::GFn::constant(cfg.synthetic
                                                                ? cfg.g_synthetic
                                                                : cfg.metric().g_constant()),
                                     lab::frkl_t_grid(cfg), fp, &grid);
    io::fs::path root(cfg.out_dir);
    io::write_frkl(root / "frkl", L, cfg.epsilon, cfg.delta());
    std::cout << "frkl: done (staged entry)\n";
    print_kv("max |L|", io::fmt(L.max_abs()));
    return 0;
  }
  auto art = run_checked(cfg);
  lab::emit(art, {"csv", "json"});
  std::cout << "frkl: done\n";
  print_kv("max |L|", io::fmt(art.frkl.max_abs()));
  return 0;
}

int cmd_build_v(const lab::ExperimentConfig& cfg) {
  auto art = run_checked(cfg);
  lab::emit(art);
  std::cout << "build-v: done\n";
  print_kv("modes marched", std::to_string(art.cone.n_modes_nonzero(1e-300)));
  print_kv("v(t_probe, 0)", io::fmt(art.v_axis(std::min(100.0, cfg.t_max / 2))));
  return 0;
}

int cmd_tail_check(const lab::ExperimentConfig& cfg) {
  auto art = run_checked(cfg);
  auto rep = lab::tail_check(art, cfg.t_max / 10.0, cfg.t_max * 0.98);
  io::fs::path root(cfg.out_dir);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < rep.t.size(); ++i)
    rows.push_back({rep.t[i], rep.u_axis[i], rep.prediction[i],
                    rep.rel_err[i], rep.sup_u[i]});
  io::write_table(root / "tail_check.csv",
                  {"t", "u_axis", "prediction", "rel_err", "sup_u"}, rows);
  lab::emit(art);
  std::cout << "tail-check: done\n";
  if (rep.null_condition_like) {
    print_kv("verdict", "null-condition-like (both tails below noise floor)");
    return 0;
  }
  print_kv("fitted |u(t,0)| slope", io::fmt(rep.fitted_slope_u));
  print_kv("predicted slope", io::fmt(rep.fitted_slope_pred));
  print_kv("rel err (early window)", io::fmt(rep.rel_err_first_half));
  print_kv("rel err (late window)", io::fmt(rep.rel_err_second_half));
  print_kv("decreasing", rep.decreasing ? "yes" : "no");
  return 0;
}

int cmd_radfield(const lab::ExperimentConfig& cfg) {
  auto art = run_checked(cfg);
  const double p_hi = -2.0;
  const double p_lo = std::max(art.B.q.front() + 1.0, -0.6 * cfg.v_pbar_max);
  auto rep = lab::radfield_check(art, p_lo, p_hi);
  io::fs::path root(cfg.out_dir);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < rep.p.size(); ++i)
    rows.push_back({rep.p[i], rep.ahat[i], rep.b[i], rep.diff[i]});
  io::write_table(root / "radfield_check.csv", {"p", "ahat", "b", "absdiff"},
                  rows);
  lab::emit(art);
  std::cout << "radfield-check: done\n";
  print_kv("exponent |Ahat|", io::fmt(rep.exponent_ahat));
  print_kv("exponent |Ahat-B|", io::fmt(rep.exponent_diff));
  print_kv("difference decays faster",
           rep.difference_decays_faster ? "yes" : "no");
  return 0;
}

int cmd_uv_diff(const lab::ExperimentConfig& cfg) {
  auto art = run_checked(cfg);
  auto rep = lab::uv_difference(art);
  io::fs::path root(cfg.out_dir);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < rep.t.size(); ++i)
    rows.push_back({rep.t[i], rep.r[i], rep.u[i], rep.v[i], rep.diff[i],
                    rep.ratio_a[i], rep.ratio_b[i]});
  io::write_table(root / "uv_diff.csv",
                  {"t", "r", "u", "v", "absdiff", "ratio_a", "ratio_b"}, rows);
  lab::emit(art);
  std::cout << "uv-diff: done\n";
  print_kv("probes", std::to_string(rep.t.size()));
  print_kv("ratio_a spread", io::fmt(rep.ratio_a_spread));
  print_kv("ratio_b spread", io::fmt(rep.ratio_b_spread));
  return 0;
}

int cmd_rigidity(const lab::ExperimentConfig& cfg) {
  auto art = run_checked(cfg);
  auto rep = lab::rigidity_scan(art);
  io::fs::path root(cfg.out_dir);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < rep.witness_t.size(); ++i)
    rows.push_back({rep.witness_t[i], rep.witness[i]});
  io::write_table(root / "rigidity_witness.csv", {"t", "witness"}, rows);
  lab::emit(art);
  std::cout << "rigidity: done\n";
  print_kv("l0 identity residual (rel)",
           io::fmt(rep.scale_l0 > 0 ? rep.residual_l0 / rep.scale_l0 : 0.0));
  if (rep.checked_l1)
    print_kv("l1 identity residual (rel)",
             io::fmt(rep.scale_l1 > 0 ? rep.residual_l1 / rep.scale_l1 : 0.0));
  if (rep.checked_l2)
    print_kv("l2 identity residual (rel)",
             io::fmt(rep.scale_l2 > 0 ? rep.residual_l2 / rep.scale_l2 : 0.0));
  print_kv("witness floor", io::fmt(rep.witness_floor));
  print_kv("witness persistent",
           rep.witness_positive_persistent ? "yes" : "no");
  return 0;
}

int cmd_gauge_check(const lab::ExperimentConfig& cfg, double delta1,
                    double delta2) {
  const double ts1 = std::exp(delta1 / cfg.epsilon);
  const double ts2 = std::exp(delta2 / cfg.epsilon);
  QnlwParams p;
  p.metric = cfg.metric();
  p.data = InitialData::gaussian_bump(cfg.r0, cfg.epsilon, cfg.data_amp);
  p.t_max = cfg.t_max;
  p.dr = cfg.dr;
  p.ko_sigma = cfg.ko_sigma;
  p.store_every_t = 0;
  QGridSpec qs;
  qs.q_max = cfg.q_max;
  qs.r0 = cfg.r0;
  qs.dq_inner = cfg.fan_dq_inner;
  qs.growth = cfg.fan_growth;
  auto qlab = make_q_grid(qs);
  auto f1 = std::make_shared<eikonal::FanObserver>(
      p.metric, eikonal::RegionSpec{ts1, 0.5, cfg.r0}, cfg.epsilon, qlab,
      eikonal::fan_sample_times(ts1, cfg.t_max * 0.995, cfg.epsilon,
                                cfg.n_s_samples));
  auto f2 = std::make_shared<eikonal::FanObserver>(
      p.metric, eikonal::RegionSpec{ts2, 0.5, cfg.r0}, cfg.epsilon, qlab,
      eikonal::fan_sample_times(ts2, cfg.t_max * 0.995, cfg.epsilon,
                                cfg.n_s_samples));
  std::vector<StepObserver> obs{[f1](const StepView& v) { (*f1)(v); },
                                [f2](const StepView& v) { (*f2)(v); }};
  evolve_qnlw(p, obs);
  auto o1 = f1->finalize(), o2 = f2->finalize();
  auto g = reduced::GFn::constant(p.metric.g_constant());
  auto l1 = eikonal::extract_limits(eikonal::compute_mu_u(o1, p.metric), g);
  auto l2 = eikonal::extract_limits(eikonal::compute_mu_u(o2, p.metric), g);
  auto tg = logspace(cfg.t_max / 4.0, cfg.t_max * 0.9, 7);
  auto rep = eikonal::gauge_compare(o1, l1, o2, l2, g, tg);
  std::cout << "gauge-check: done\n";
  print_kv("delta1 / delta2", io::fmt(delta1) + " / " + io::fmt(delta2));
  print_kv("L rel discrepancy", io::fmt(rep.frkl_rel_discrepancy));
  print_kv("Q-map composition error", io::fmt(rep.composition_max_error));
  print_kv("extraction unreliable", rep.unreliable ? "yes" : "no");
  return 0;
}

int cmd_demo(lab::ExperimentConfig cfg) {
  std::cout << "demo: a(u) = 1 + u, eps = " << cfg.epsilon
            << ", t_max = " << cfg.t_max << "\n";
  auto art = run_checked(cfg);
  lab::emit(art);
  auto tail = lab::tail_check(art, cfg.t_max / 10.0, cfg.t_max * 0.98);
  io::fs::path root(cfg.out_dir);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < tail.t.size(); ++i)
    rows.push_back({tail.t[i], tail.u_axis[i], tail.prediction[i],
                    tail.rel_err[i]});
  io::write_table(root / "tail_check.csv",
                  {"t", "u_axis", "prediction", "rel_err"}, rows);
  print_kv("median fit residual", io::fmt(art.limits.median_rms_residual));
  print_kv("tail rel err (late)", io::fmt(tail.rel_err_second_half));
  print_kv("tail trend decreasing", tail.decreasing ? "yes" : "no");
  print_kv("out", cfg.out_dir);
  return 0;
}

int cmd_sweep(lab::ExperimentConfig base, const std::vector<double>& ladder) {
  std::vector<double> eps_v, amp_v;
  const io::fs::path root(base.out_dir);
  for (double e : ladder) {
    lab::ExperimentConfig cfg = base;
    cfg.epsilon = e;
    cfg.out_dir = (root / ("eps_" + io::fmt(e))).string();
    auto art = run_checked(cfg);
    lab::emit(art, {"csv", "json"});
    // tail amplitude: |u(t,0)| * t averaged over the last decade
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < art.axis_t.size(); ++i)
      if (art.axis_t[i] > cfg.t_max / 2.0) {
        acc += std::abs(art.axis_u[i]) * art.axis_t[i];
        ++n;
      }
    eps_v.push_back(e);
    amp_v.push_back(acc / double(n ? n : 1));
    std::cout << "  eps = " << e << "  tail amplitude = " << io::fmt(amp_v.back())
              << "\n";
  }
  const auto fitline = fit_power_law(eps_v, amp_v);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < eps_v.size(); ++i)
    rows.push_back({eps_v[i], amp_v[i]});
  io::write_table(root / "sweep_amplitudes.csv", {"epsilon", "amplitude"},
                  rows);
  std::cout << "sweep: done\n";
  print_kv("fitted amplitude power in eps", io::fmt(fitline.slope));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wavetail: quasilinear wave late-time-tail laboratory"};
  app.require_subcommand(1);

  CliState st;
  double delta1 = 0.3, delta2 = 0.5;
  std::vector<double> ladder = {0.05, 0.1, 0.2};

  auto* solve = app.add_subcommand("solve", "evolve the quasilinear field");
  auto* extract = app.add_subcommand("extract", "eikonal fan + limit profiles");
  auto* frkl = app.add_subcommand("frkl", "characteristic-data integral L");
  auto* buildv = app.add_subcommand("build-v", "march the comparison wave v");
  auto* tail = app.add_subcommand("tail-check", "u(t,0) against 2 L0(t/2)/t");
  auto* radf = app.add_subcommand("radfield-check", "Ahat against B");
  auto* uv = app.add_subcommand("uv-diff", "normalized |u - v| at probes");
  auto* rig = app.add_subcommand("rigidity", "identity residuals + witness");
  auto* gauge = app.add_subcommand("gauge-check", "two-delta comparison");
  auto* demo = app.add_subcommand("demo", "default end-to-end run");
  auto* sweep = app.add_subcommand("sweep", "epsilon ladder");

  for (auto* c : {solve, extract, frkl, buildv, tail, radf, uv, rig, gauge,
                  demo, sweep})
    add_common(c, st);
  frkl->add_option("--ahat-in", st.ahat_in,
                   "staged entry: read Ahat profile base path");
  gauge->add_option("--delta1", delta1, "first gauge offset");
  gauge->add_option("--delta2", delta2, "second gauge offset");
  sweep->add_option("--ladder", ladder, "epsilon values");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(finalize_config(st, solve));
    if (extract->parsed()) return cmd_extract(finalize_config(st, extract));
    if (frkl->parsed()) return cmd_frkl(finalize_config(st, frkl), st.ahat_in);
    if (buildv->parsed()) return cmd_build_v(finalize_config(st, buildv));
    if (tail->parsed()) return cmd_tail_check(finalize_config(st, tail));
    if (radf->parsed()) return cmd_radfield(finalize_config(st, radf));
    if (uv->parsed()) return cmd_uv_diff(finalize_config(st, uv));
    if (rig->parsed()) return cmd_rigidity(finalize_config(st, rig));
    if (gauge->parsed())
      return cmd_gauge_check(finalize_config(st, gauge), delta1, delta2);
    if (demo->parsed()) return cmd_demo(finalize_config(st, demo));
    if (sweep->parsed()) return cmd_sweep(finalize_config(st, sweep), ladder);
  } catch (const precondition_error& e) {
    std::cerr << "precondition failure: " << e.what() << "\n";
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
