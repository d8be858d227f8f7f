#pragma once

// Flat-file artifact I/O: CSV bodies with JSON sidecar headers, binary
// field dumps, and a deterministic config hash. Numbers are written with
// max_digits10 so re-emission is byte-identical.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavetail/common.hpp"
#include "wavetail/eikonal.hpp"
#include "wavetail/field1d.hpp"
#include "wavetail/reduced.hpp"
#include "wavetail/sphere.hpp"

namespace wavetail::io {

using nlohmann::json;
namespace fs = std::filesystem;

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

inline void write_text(const fs::path& path, const std::string& body) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw precondition_error("write_text: cannot open " + path.string());
  f << body;
  if (!f) throw precondition_error("write_text: failed " + path.string());
}

inline void write_json(const fs::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

inline json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw precondition_error("read_json: cannot open " + path.string());
  json j;
  f >> j;
  return j;
}

// FNV-1a over a canonical string; stable across runs and platforms.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hash_hex(const std::string& s) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(s);
  return os.str();
}

// ---------------------------------------------------------------------------
// SphereField: CSV (theta_index, phi_index, value) + JSON header.

inline void write_sphere_field(const fs::path& base,
                               const sphere::SphereField& f) {
  const auto& g = f.grid();
  std::ostringstream csv;
  csv << "theta_index,phi_index,value\n";
  for (std::size_t i = 0; i < g.n_theta(); ++i)
    for (std::size_t j = 0; j < g.n_phi(); ++j)
      csv << i << "," << j << "," << fmt(f.value(i, j)) << "\n";
  write_text(fs::path(base.string() + ".csv"), csv.str());
  json h = {{"n_theta", g.n_theta()},
            {"n_phi", g.n_phi()},
            {"l_max", g.l_max()}};
  write_json(fs::path(base.string() + ".json"), h);
}

// ---------------------------------------------------------------------------
// Field dump: binary row-major + JSON header; optional decimated CSV.

inline void write_field(const fs::path& base, const SpacetimeField1D& f,
                        const json& extra = json::object()) {
  fs::create_directories(base.parent_path());
  {
    std::ofstream bin(fs::path(base.string() + ".bin"),
                      std::ios::binary | std::ios::trunc);
    bin.write(reinterpret_cast<const char*>(f.data().data()),
              std::streamsize(f.data().size() * sizeof(double)));
  }
  json h = {{"t0", f.t0()},       {"dt", f.dt()},   {"dr", f.dr()},
            {"nt", f.nt()},       {"nr", f.nr()},   {"t_max", f.t_max()},
            {"r_max", f.r_max()}, {"cfl", f.meta.cfl},
            {"scheme_order", f.meta.scheme_order},
            {"metric", f.meta.metric_desc},
            {"data", f.meta.data_desc},
            {"run_id", f.meta.run_id}};
  h.update(extra);
  write_json(fs::path(base.string() + ".json"), h);
}

inline void write_field_csv_decimated(const fs::path& path,
                                      const SpacetimeField1D& f,
                                      std::size_t every_t,
                                      std::size_t every_r) {
  std::ostringstream csv;
  csv << "t,r,w\n";
  for (std::size_t n = 0; n < f.nt(); n += every_t)
    for (std::size_t j = 0; j < f.nr(); j += every_r)
      csv << fmt(f.t0() + f.dt() * double(n)) << ","
          << fmt(f.dr() * double(j)) << "," << fmt(f.at(n, j)) << "\n";
  write_text(path, csv.str());
}

inline SpacetimeField1D read_field(const fs::path& base) {
  const json h = read_json(fs::path(base.string() + ".json"));
  SpacetimeField1D f(h.at("t0").get<double>(), h.at("dt").get<double>(),
                     h.at("nt").get<std::size_t>(), h.at("dr").get<double>(),
                     h.at("nr").get<std::size_t>());
  std::ifstream bin(fs::path(base.string() + ".bin"), std::ios::binary);
  if (!bin) throw precondition_error("read_field: missing binary");
  bin.read(reinterpret_cast<char*>(f.data().data()),
           std::streamsize(f.data().size() * sizeof(double)));
  if (!bin) throw precondition_error("read_field: truncated binary");
  return f;
}

// ---------------------------------------------------------------------------
// Limit profiles and Ahat: CSV with JSON header.

inline void write_limit_profiles(const fs::path& base,
                                 const eikonal::LimitProfiles& lp) {
  std::ostringstream csv;
  csv << "q,A,A1,A2\n";
  for (std::size_t i = 0; i < lp.A.q.size(); ++i)
    csv << fmt(lp.A.q[i]) << "," << fmt(lp.A.value(i)) << ","
        << fmt(lp.A1.value(i)) << "," << fmt(lp.A2.value(i)) << "\n";
  write_text(fs::path(base.string() + ".csv"), csv.str());
  json h = {{"epsilon", lp.epsilon},
            {"delta", lp.delta},
            {"fit_s_lo", lp.fit_s_lo},
            {"fit_s_hi", lp.fit_s_hi},
            {"max_rms_residual", lp.max_rms_residual},
            {"median_rms_residual", lp.median_rms_residual},
            {"unreliable", lp.unreliable},
            {"decay_exponent_A", lp.A.decay_exponent},
            {"decay_exponent_A1", lp.A1.decay_exponent}};
  write_json(fs::path(base.string() + ".json"), h);
}

inline void write_profile(const fs::path& base,
                          const reduced::RadiationProfile& p,
                          const json& extra = json::object()) {
  std::ostringstream csv;
  csv << "q,node,value\n";
  for (std::size_t i = 0; i < p.q.size(); ++i)
    for (std::size_t n = 0; n < p.n_omega; ++n)
      csv << fmt(p.q[i]) << "," << n << "," << fmt(p.value(i, n)) << "\n";
  write_text(fs::path(base.string() + ".csv"), csv.str());
  json h = {{"n_q", p.q.size()},
            {"n_omega", p.n_omega},
            {"support_hi", p.support_hi},
            {"decay_exponent", p.decay_exponent},
            {"clamped_warning", p.clamped_warning}};
  h.update(extra);
  write_json(fs::path(base.string() + ".json"), h);
}

inline reduced::RadiationProfile read_profile(const fs::path& base,
                                              reduced::ProfileKind kind) {
  const json h = read_json(fs::path(base.string() + ".json"));
  std::ifstream f(fs::path(base.string() + ".csv"));
  if (!f) throw precondition_error("read_profile: missing csv");
  std::string line;
  std::getline(f, line);  // header
  std::vector<double> q, vals;
  const std::size_t n_omega = h.at("n_omega").get<std::size_t>();
  double last_q = -1e300;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string qs, ns, vs;
    std::getline(row, qs, ',');
    std::getline(row, ns, ',');
    std::getline(row, vs, ',');
    const double qv = std::stod(qs);
    if (qv != last_q) {
      q.push_back(qv);
      last_q = qv;
    }
    vals.push_back(std::stod(vs));
  }
  reduced::RadiationProfile p;
  p.kind = kind;
  p.q = std::move(q);
  p.n_omega = n_omega;
  p.values = std::move(vals);
  p.support_hi = h.at("support_hi").get<double>();
  p.decay_exponent = h.value("decay_exponent", 0.0);
  return p;
}

// ---------------------------------------------------------------------------
// CharDataL: CSV (t, omega_index, value) + JSON header.

inline void write_frkl(const fs::path& base, const reduced::CharDataL& L,
                       double epsilon, double delta) {
  std::ostringstream csv;
  csv << "t,omega_index,value\n";
  for (std::size_t it = 0; it < L.t_grid.size(); ++it)
    for (std::size_t n = 0; n < L.n_omega; ++n)
      csv << fmt(L.t_grid[it]) << "," << n << "," << fmt(L.value(it, n))
          << "\n";
  write_text(fs::path(base.string() + ".csv"), csv.str());
  json h = {{"epsilon", epsilon},
            {"delta", delta},
            {"construction", L.construction},
            {"n_t", L.t_grid.size()},
            {"n_omega", L.n_omega},
            {"quad_error", L.quad_error},
            {"tail_estimate", L.tail_estimate}};
  write_json(fs::path(base.string() + ".json"), h);
}

inline reduced::CharDataL read_frkl(const fs::path& base) {
  const json h = read_json(fs::path(base.string() + ".json"));
  std::ifstream f(fs::path(base.string() + ".csv"));
  if (!f) throw precondition_error("read_frkl: missing csv");
  std::string line;
  std::getline(f, line);
  reduced::CharDataL L;
  L.n_omega = h.at("n_omega").get<std::size_t>();
  L.construction = h.value("construction", "");
  double last_t = -1e300;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string ts, ns, vs;
    std::getline(row, ts, ',');
    std::getline(row, ns, ',');
    std::getline(row, vs, ',');
    const double tv = std::stod(ts);
    if (tv != last_t) {
      L.t_grid.push_back(tv);
      last_t = tv;
    }
    L.values.push_back(std::stod(vs));
  }
  return L;
}

// Generic small table: first row is the header.
inline void write_table(const fs::path& path,
                        const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& rows) {
  std::ostringstream csv;
  for (std::size_t i = 0; i < header.size(); ++i)
    csv << header[i] << (i + 1 < header.size() ? "," : "\n");
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i)
      csv << fmt(r[i]) << (i + 1 < r.size() ? "," : "\n");
  }
  write_text(path, csv.str());
}

}  // namespace wavetail::io
