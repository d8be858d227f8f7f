#pragma once

// Grid builders: the nonuniform q-grid (dense near the data support,
// geometric stretch into the tail) and log-spaced t-grids.

#include <algorithm>
#include <cmath>
#include <vector>

#include "wavetail/common.hpp"

namespace wavetail {

struct QGridSpec {
  double q_max = 200.0;   // grid extends to q = -q_max
  double r0 = 2.0;        // dense region is [-r0 - 2, r0 + 1]
  double dq_inner = 0.05; // spacing in the dense region
  double growth = 1.04;   // geometric stretch factor in the tail
};

// Increasing grid from -q_max to r0 + 1, uniform near the support of the
// data and geometrically stretched toward large negative q.
inline std::vector<double> make_q_grid(const QGridSpec& s) {
  const double inner_lo = -(s.r0 + 2.0), inner_hi = s.r0 + 1.0;
  if (s.q_max <= -inner_lo)
    throw precondition_error("make_q_grid: q_max inside dense region");
  std::vector<double> g;
  for (double q = inner_hi; q >= inner_lo - 1e-12; q -= s.dq_inner)
    g.push_back(q);
  double dq = s.dq_inner;
  double q = g.back();
  while (q > -s.q_max) {
    dq *= s.growth;
    q -= dq;
    g.push_back(std::max(q, -s.q_max));
  }
  std::reverse(g.begin(), g.end());
  return g;
}

}  // namespace wavetail
