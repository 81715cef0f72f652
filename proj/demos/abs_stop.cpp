// Straight-line full-brake stop with and without slip control: stopping
// distance, slip history extremes, and time spent at locked wheels.
#include <cstdio>
#include <string>

#include "driftnmpc/config_io.hpp"
#include "driftnmpc/plant.hpp"
#include "driftnmpc/vsc.hpp"

using namespace driftnmpc;

namespace {

struct StopStats {
  double distance = 0.0;
  double t_stop = 0.0;
  double slip_max = 0.0;
  double locked_time = 0.0;
};

StopStats brake_to_rest(const AppConfig& cfg, bool with_abs, double v0) {
  TwoTrackPlant plant(cfg.plant);
  AbsController abs(cfg.abs);
  plant.reset(0.0, 0.0, 0.0, v0);

  const double dt = 1e-3;
  PlantCommand cmd;
  cmd.brake_torque = {2500.0, 2500.0, 2500.0, 2500.0};
  const std::array<bool, 4> braking{true, true, true, true};

  StopStats st;
  for (double t = 0.0; t < 15.0; t += dt) {
    if (plant.state()[px::vx] < 0.5) {
      st.t_stop = t;
      break;
    }
    cmd.abs_scale = with_abs ? abs.update(plant.braking_slip(), braking, dt)
                             : Wheel4{1.0, 1.0, 1.0, 1.0};
    plant.step(cmd, dt);
    const Wheel4 slip = plant.braking_slip();
    bool locked = false;
    for (int w = 0; w < 4; ++w) {
      st.slip_max = std::max(st.slip_max, slip[w]);
      locked = locked || slip[w] > 0.95;
    }
    if (locked) st.locked_time += dt;
    st.distance = plant.state()[px::X];
  }
  return st;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string config_file = argc > 1 ? argv[1] : "config/default.json";
  const AppConfig cfg = load_config(config_file);
  const double v0 = 30.0;

  std::printf("full brake from %.0f km/h on mu = %.2f\n\n", v0 * 3.6, cfg.plant.mu);
  std::printf("%-14s %10s %8s %9s %12s\n", "", "distance", "time", "slip max", "locked time");
  for (bool with_abs : {false, true}) {
    const StopStats st = brake_to_rest(cfg, with_abs, v0);
    std::printf("%-14s %8.1f m %6.2f s %9.2f %10.2f s\n",
                with_abs ? "slip control" : "locked brakes", st.distance, st.t_stop, st.slip_max,
                st.locked_time);
  }
  return 0;
}
