// Closed-loop run traces: in-memory samples, versioned CSV serialization, and
// the KPI summary written next to each run.
#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "driftnmpc/types.hpp"

namespace driftnmpc {

constexpr const char* kTraceSchema = "driftnmpc-trace/1";

struct TraceSample {
  double t = 0.0;
  // plant pose and motion
  double X = 0.0, Y = 0.0, psi = 0.0;
  double vx = 0.0, vy = 0.0, r = 0.0, beta = 0.0;
  // path frame
  double s = 0.0, e_y = 0.0, e_psi = 0.0, vx_ref = 0.0, kappa = 0.0;
  // integrated NMPC commands
  double delta_f_cmd = 0.0, delta_r_cmd = 0.0, Fx_f_cmd = 0.0, Mz_cmd = 0.0;
  double p_b = 0.0, eps_mz = 0.0;
  // rates chosen by the solver at this step
  double ddelta_f = 0.0, ddelta_r = 0.0, dFx_f = 0.0, dMz = 0.0;
  // solver and envelope diagnostics
  double Mz_min = 0.0, Mz_max = 0.0;
  int solver_status = 0, sqp_iterations = 0;
  double objective = 0.0;
  double friction_margin = 0.0;  // min slack of the friction budget, < 0 over
  // safety layer
  int abs_engaged = 0;  // bitmask fl|fr<<1|rl<<2|rr<<3
  int vsc_active = 0;
  double vsc_mz = 0.0;
  std::array<double, 4> slip{};
};

inline const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> cols = {
      "t",           "X",        "Y",          "psi",        "vx",
      "vy",          "r",        "beta",       "s",          "e_y",
      "e_psi",       "vx_ref",   "kappa",      "delta_f_cmd", "delta_r_cmd",
      "Fx_f_cmd",    "Mz_cmd",   "p_b",        "eps_mz",     "ddelta_f",
      "ddelta_r",    "dFx_f",    "dMz",        "Mz_min",     "Mz_max",
      "solver_status", "sqp_iterations", "objective", "friction_margin",
      "abs_engaged", "vsc_active", "vsc_mz",   "slip_fl",    "slip_fr",
      "slip_rl",     "slip_rr"};
  return cols;
}

inline std::vector<double> trace_row(const TraceSample& a) {
  return {a.t,
          a.X,
          a.Y,
          a.psi,
          a.vx,
          a.vy,
          a.r,
          a.beta,
          a.s,
          a.e_y,
          a.e_psi,
          a.vx_ref,
          a.kappa,
          a.delta_f_cmd,
          a.delta_r_cmd,
          a.Fx_f_cmd,
          a.Mz_cmd,
          a.p_b,
          a.eps_mz,
          a.ddelta_f,
          a.ddelta_r,
          a.dFx_f,
          a.dMz,
          a.Mz_min,
          a.Mz_max,
          static_cast<double>(a.solver_status),
          static_cast<double>(a.sqp_iterations),
          a.objective,
          a.friction_margin,
          static_cast<double>(a.abs_engaged),
          static_cast<double>(a.vsc_active),
          a.vsc_mz,
          a.slip[0],
          a.slip[1],
          a.slip[2],
          a.slip[3]};
}

inline void trace_from_row(const std::vector<double>& v, TraceSample& a) {
  std::size_t i = 0;
  auto next = [&] { return v.at(i++); };
  a.t = next();
  a.X = next();
  a.Y = next();
  a.psi = next();
  a.vx = next();
  a.vy = next();
  a.r = next();
  a.beta = next();
  a.s = next();
  a.e_y = next();
  a.e_psi = next();
  a.vx_ref = next();
  a.kappa = next();
  a.delta_f_cmd = next();
  a.delta_r_cmd = next();
  a.Fx_f_cmd = next();
  a.Mz_cmd = next();
  a.p_b = next();
  a.eps_mz = next();
  a.ddelta_f = next();
  a.ddelta_r = next();
  a.dFx_f = next();
  a.dMz = next();
  a.Mz_min = next();
  a.Mz_max = next();
  a.solver_status = static_cast<int>(next());
  a.sqp_iterations = static_cast<int>(next());
  a.objective = next();
  a.friction_margin = next();
  a.abs_engaged = static_cast<int>(next());
  a.vsc_active = static_cast<int>(next());
  a.vsc_mz = next();
  a.slip[0] = next();
  a.slip[1] = next();
  a.slip[2] = next();
  a.slip[3] = next();
}

inline void write_trace_csv(const std::string& filename, const std::vector<TraceSample>& samples) {
  std::ofstream out(filename);
  if (!out) throw ConfigError("cannot open trace file for writing: " + filename);
  out << "# schema: " << kTraceSchema << "\n";
  const auto& cols = trace_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  char buf[32];
  for (const TraceSample& a : samples) {
    const std::vector<double> row = trace_row(a);
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
      out << (i ? "," : "") << buf;
    }
    out << "\n";
  }
}

inline std::vector<TraceSample> read_trace_csv(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) throw ConfigError("cannot open trace file: " + filename);
  std::string line;
  if (!std::getline(in, line) || line.find(kTraceSchema) == std::string::npos)
    throw ConfigError("trace file missing schema marker '" + std::string(kTraceSchema) + "'");
  if (!std::getline(in, line)) throw ConfigError("trace file missing column header");
  {
    std::stringstream ss(line);
    std::string col;
    std::size_t i = 0;
    const auto& cols = trace_columns();
    while (std::getline(ss, col, ',')) {
      if (i >= cols.size() || col != cols[i])
        throw ConfigError("unexpected trace column '" + col + "'");
      ++i;
    }
    if (i != cols.size()) throw ConfigError("trace file has too few columns");
  }
  std::vector<TraceSample> samples;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    row.reserve(trace_columns().size());
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    TraceSample a;
    trace_from_row(row, a);
    samples.push_back(a);
  }
  return samples;
}

}  // namespace driftnmpc
