// Run metrics: peak and RMS lateral error, RMS speed error, peak sideslip.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "driftnmpc/trace.hpp"
#include "driftnmpc/types.hpp"

namespace driftnmpc {

struct Kpis {
  double e_y_abs_max = 0.0;      // [m]
  double e_y_rms = 0.0;          // [m]
  double e_vx_rms_kmh = 0.0;     // [km/h], against the reference profile
  double beta_abs_max_deg = 0.0;  // [deg]
  int samples = 0;
};

inline Kpis compute_kpis(const std::vector<TraceSample>& trace) {
  Kpis k;
  if (trace.empty()) return k;
  double sum_ey2 = 0.0, sum_evx2 = 0.0;
  for (const TraceSample& a : trace) {
    k.e_y_abs_max = std::max(k.e_y_abs_max, std::abs(a.e_y));
    k.beta_abs_max_deg = std::max(k.beta_abs_max_deg, std::abs(rad2deg(a.beta)));
    sum_ey2 += a.e_y * a.e_y;
    const double evx = 3.6 * (a.vx - a.vx_ref);
    sum_evx2 += evx * evx;
  }
  k.samples = static_cast<int>(trace.size());
  k.e_y_rms = std::sqrt(sum_ey2 / k.samples);
  k.e_vx_rms_kmh = std::sqrt(sum_evx2 / k.samples);
  return k;
}

}  // namespace driftnmpc
