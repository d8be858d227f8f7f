#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "wavetail/lab.hpp"

using namespace wavetail;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

lab::ExperimentConfig small_synthetic() {
  lab::ExperimentConfig c;
  c.synthetic = true;
  c.t_max = 300.0;
  c.v_pbar_max = 40.0;
  c.v_sbar_max = 200.0;
  c.goursat_h = 0.2;
  c.q_max = 40.0;
  return c;
}

lab::ExperimentConfig small_solver(double eps) {
  lab::ExperimentConfig c;
  c.epsilon = eps;
  c.dr = 0.05;
  c.t_max = 200.0;
  c.t_start = 20.0;
  c.q_max = 30.0;
  c.n_s_samples = 40;
  c.v_pbar_max = 40.0;
  c.v_sbar_max = 200.0;
  c.goursat_h = 0.2;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("config JSON round trip and stable hash", "[lab]") {
  lab::ExperimentConfig c;
  c.epsilon = 0.07;
  c.dr = 0.03;
  c.synth_y11 = 0.25;
  auto j = c.to_json();
  auto c2 = lab::ExperimentConfig::from_json(j);
  CHECK(c2.epsilon == c.epsilon);
  CHECK(c2.dr == c.dr);
  CHECK(c2.synth_y11 == c.synth_y11);
  CHECK(c.hash() == c2.hash());
  c2.epsilon = 0.08;
  CHECK(c.hash() != c2.hash());

  json bad = j;
  bad["schema"] = 99;
  CHECK_THROWS_AS(lab::ExperimentConfig::from_json(bad), precondition_error);
}

TEST_CASE("epsilon zero gives a trivial pipeline", "[lab]") {
  auto c = small_solver(0.0);
  auto art = lab::run_pipeline(c);
  REQUIRE(art.error_stage.empty());
  for (std::size_t i = 0; i < art.ahat.q.size(); ++i)
    CHECK(art.ahat.value(i) == 0.0);
  CHECK(art.frkl.max_abs() == 0.0);
  CHECK(art.v_axis(100.0) == 0.0);
  for (double u : art.axis_u) CHECK(std::abs(u) < 1e-300);
}

TEST_CASE("synthetic pipeline products and L sign", "[lab]") {
  auto c = small_synthetic();
  auto art = lab::run_pipeline(c);
  REQUIRE(art.error_stage.empty());
  CHECK(art.g_const == 2.0);
  // G >= 0 and small eps: L <= 0 pointwise
  for (double v : art.frkl.values) CHECK(v <= 1e-15);
  // Ahat vanishes beyond its support
  auto fn = art.ahat.fn();
  CHECK(fn(art.ahat.support_hi + 0.5, 0) == 0.0);
  // v is nontrivial and negative-tailed at the axis
  CHECK(art.v_axis(120.0) < 0.0);
}

TEST_CASE("pipeline determinism and staged re-entry", "[lab]") {
  auto c = small_synthetic();
  c.out_dir = "/tmp/wavetail_test_run_a";
  auto a1 = lab::run_pipeline(c);
  auto a2 = lab::run_pipeline(c);
  REQUIRE(a1.error_stage.empty());
  REQUIRE(a1.frkl.values.size() == a2.frkl.values.size());
  for (std::size_t i = 0; i < a1.frkl.values.size(); ++i)
    CHECK(a1.frkl.values[i] == a2.frkl.values[i]);
  CHECK(a1.config_hash == a2.config_hash);

  // staged entry: recompute L from the persisted Ahat, bit-exact
  lab::emit(a1);
  auto prof = io::read_profile(fs::path(c.out_dir) / "ahat",
                               reduced::ProfileKind::Ahat);
  reduced::FrkLParams fp;
  fp.epsilon = c.epsilon;
  fp.delta = c.delta();
  auto L = reduced::frkl_from_ahat(prof.fn(), reduced::GFn::constant(2.0),
                                   lab::frkl_t_grid(c), fp, a1.grid.get());
  REQUIRE(L.values.size() == a1.frkl.values.size());
  for (std::size_t i = 0; i < L.values.size(); ++i)
    CHECK(L.values[i] == a1.frkl.values[i]);
}

TEST_CASE("emit inventory and byte-for-byte idempotence", "[lab]") {
  auto c = small_synthetic();
  c.out_dir = "/tmp/wavetail_test_run_b";
  auto art = lab::run_pipeline(c);
  REQUIRE(art.error_stage.empty());
  CHECK(lab::emit(art, {}).empty());
  auto files = lab::emit(art);
  REQUIRE(!files.empty());
  std::vector<std::string> before;
  for (const auto& f : files) before.push_back(slurp(f));
  auto files2 = lab::emit(art);
  CHECK(files2 == files);
  for (std::size_t i = 0; i < files.size(); ++i)
    CHECK(slurp(files[i]) == before[i]);
}

TEST_CASE("radfield self-loop vanishes and solver-free checks throw",
          "[lab]") {
  auto c = small_synthetic();
  auto art = lab::run_pipeline(c);
  REQUIRE(art.error_stage.empty());
  // v-only loop: feed B back as the scattering data
  auto loop = art;
  loop.ahat = art.B;
  auto rep = lab::radfield_check(loop, art.B.q.front() + 1.0, -2.0);
  for (double d : rep.diff) CHECK(d == 0.0);

  CHECK_THROWS_AS(lab::tail_check(art, 50.0, 250.0), precondition_error);
  CHECK_THROWS_AS(lab::uv_difference(art), precondition_error);
}

TEST_CASE("null-condition-like run is flagged", "[lab]") {
  auto c = small_solver(0.1);
  c.a_slope = 0.0;  // trivial metric: G = 0, u stays linear
  auto art = lab::run_pipeline(c);
  REQUIRE(art.error_stage.empty());
  CHECK(art.g_const == 0.0);
  CHECK(art.frkl.max_abs() == 0.0);
  auto rep = lab::tail_check(art, 40.0, 195.0);
  // u's own late values at the axis are below the noise floor too:
  // the linear wave leaves the region (strong Huygens)
  CHECK(rep.null_condition_like);

  // uv report documents u's own tail as the difference (v == 0)
  auto uv = lab::uv_difference(art);
  for (std::size_t i = 0; i < uv.v.size(); ++i) CHECK(uv.v[i] == 0.0);
}

TEST_CASE("rigidity: zero data gives zero witness, bump stays positive",
          "[lab]") {
  auto c = small_synthetic();
  c.synth_amp = 0.0;
  auto art = lab::run_pipeline(c);
  REQUIRE(art.error_stage.empty());
  auto rep = lab::rigidity_scan(art);
  for (double w : rep.witness) CHECK(w == 0.0);
  CHECK(!rep.witness_positive_persistent);

  auto c2 = small_synthetic();
  auto art2 = lab::run_pipeline(c2);
  auto rep2 = lab::rigidity_scan(art2);
  CHECK(rep2.witness_floor > 0.0);
  CHECK(rep2.witness_positive_persistent);
  CHECK(rep2.residual_l0 < 5e-2 * rep2.scale_l0);
}

TEST_CASE("solver-driven mini pipeline sanity", "[lab]") {
  auto c = small_solver(0.1);
  auto art = lab::run_pipeline(c);
  REQUIRE(art.error_stage.empty());
  CHECK(art.has_solver_data);
  CHECK(art.solver_diag.exterior_max_w < 1e-10);
  CHECK(!art.limits.unreliable);
  // identity A1 A2 + 2A within the reported residual scale
  double worst = 0.0, amax = 0.0;
  for (std::size_t i = 0; i < art.limits.A.q.size(); ++i) {
    worst = std::max(worst, std::abs(art.limits.A1.value(i) *
                                         art.limits.A2.value(i) +
                                     2.0 * art.limits.A.value(i)));
    amax = std::max(amax, std::abs(2.0 * art.limits.A.value(i)));
  }
  CHECK(worst / amax < 0.1);
  auto rep = lab::tail_check(art, 40.0, 195.0);
  CHECK(!rep.null_condition_like);
  CHECK(std::abs(rep.fitted_slope_u + 1.0) < 0.2);
}
