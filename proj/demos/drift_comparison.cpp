// Runs the U-turn with the yaw-moment controller and the yaw-moment plus
// rear-steer controller and prints a side-by-side comparison: KPIs, then a
// coarse top-down view of both trajectories against the reference path.
#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "driftnmpc/config_io.hpp"
#include "driftnmpc/simulate.hpp"

using namespace driftnmpc;

namespace {

struct Labeled {
  std::string name;
  RunResult res;
};

void print_kpis(const std::vector<Labeled>& runs) {
  std::printf("%-14s %-12s %9s %9s %11s %10s %8s\n", "controller", "outcome", "|e_y|max",
              "rms(e_y)", "rms(e_vx)", "|beta|max", "time");
  for (const auto& r : runs) {
    std::printf("%-14s %-12s %7.2f m %7.2f m %8.2f km/h %7.1f deg %5.1f s\n", r.name.c_str(),
                outcome_name(r.res.outcome), r.res.kpis.e_y_abs_max, r.res.kpis.e_y_rms,
                r.res.kpis.e_vx_rms_kmh, r.res.kpis.beta_abs_max_deg, r.res.t_end);
  }
}

// Top-down ASCII view: path centerline as '.', one glyph per run.
void print_map(const Path& path, const std::vector<Labeled>& runs) {
  const int W = 78, H = 30;
  double x_lo = 1e30, x_hi = -1e30, y_lo = 1e30, y_hi = -1e30;
  auto grow = [&](double X, double Y) {
    x_lo = std::min(x_lo, X);
    x_hi = std::max(x_hi, X);
    y_lo = std::min(y_lo, Y);
    y_hi = std::max(y_hi, Y);
  };
  for (double s = 0.0; s < path.length(); s += 0.5) {
    const PathPoint p = path.at(s);
    grow(p.X, p.Y);
  }
  for (const auto& r : runs)
    for (const TraceSample& a : r.res.trace) grow(a.X, a.Y);
  const double mx = 0.05 * (x_hi - x_lo), my = 0.05 * (y_hi - y_lo);
  x_lo -= mx;
  x_hi += mx;
  y_lo -= my;
  y_hi += my;

  std::vector<std::string> grid(H, std::string(W, ' '));
  auto put = [&](double X, double Y, char c) {
    const int col = static_cast<int>((X - x_lo) / (x_hi - x_lo) * (W - 1));
    const int row = static_cast<int>((y_hi - Y) / (y_hi - y_lo) * (H - 1));
    if (col >= 0 && col < W && row >= 0 && row < H) grid[row][col] = c;
  };
  for (double s = 0.0; s < path.length(); s += 0.25) {
    const PathPoint p = path.at(s);
    put(p.X, p.Y, '.');
  }
  const char glyphs[] = {'o', '#'};
  for (size_t i = 0; i < runs.size(); ++i)
    for (const TraceSample& a : runs[i].res.trace) put(a.X, a.Y, glyphs[i % 2]);

  std::printf("\n  '.' reference path");
  for (size_t i = 0; i < runs.size(); ++i)
    std::printf("   '%c' %s", glyphs[i % 2], runs[i].name.c_str());
  std::printf("\n\n");
  for (const auto& line : grid) std::printf("  %s\n", line.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  const std::string config_file = argc > 1 ? argv[1] : "config/default.json";
  const AppConfig cfg = load_config(config_file);

  std::printf("U-turn, entry 45 km/h: direct yaw moment alone vs with rear steering\n\n");
  std::vector<Labeled> runs;
  runs.push_back({"yaw-moment", run_closed_loop(make_run_setup(cfg, Variant::mz, "uturn"))});
  runs.push_back(
      {"+rear-steer", run_closed_loop(make_run_setup(cfg, Variant::mz_dr, "uturn", 10.0))});

  print_kpis(runs);
  print_map(make_run_setup(cfg, Variant::mz, "uturn").path, runs);
  return 0;
}
