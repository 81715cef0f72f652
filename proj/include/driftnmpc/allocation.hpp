// Control allocation: axle-level force and yaw-moment commands to per-wheel
// brake/drive torques, plus the achievable-DYM envelope fed back to the OCP.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "driftnmpc/prediction_model.hpp"
#include "driftnmpc/types.hpp"

namespace driftnmpc {

// Wheel order used throughout: front-left, front-right, rear-left, rear-right.
using Wheel4 = std::array<double, 4>;
namespace wh {
constexpr int fl = 0, fr = 1, rl = 2, rr = 3;
}

struct WheelLoads {
  Wheel4 Fz{};

  double axle_front() const { return Fz[wh::fl] + Fz[wh::fr]; }
  double axle_rear() const { return Fz[wh::rl] + Fz[wh::rr]; }
  double side_left() const { return Fz[wh::fl] + Fz[wh::rl]; }
  double total() const { return Fz[0] + Fz[1] + Fz[2] + Fz[3]; }
};

// Quasi-static per-wheel vertical loads: longitudinal transfer between axles,
// lateral transfer within each axle with a fixed front roll share xi_f.
// Positive ay points left, so a left turn unloads the left (inner) wheels.
inline WheelLoads wheel_vertical_loads(double ax, double ay, const VehicleParams& p,
                                       double xi_f) {
  const VerticalLoads axle = vertical_loads(ax, p);
  const double dF = p.m * ay * p.hg / p.tw;
  WheelLoads w;
  w.Fz[wh::fl] = 0.5 * axle.Fz_f - xi_f * dF;
  w.Fz[wh::fr] = 0.5 * axle.Fz_f + xi_f * dF;
  w.Fz[wh::rl] = 0.5 * axle.Fz_r - (1.0 - xi_f) * dF;
  w.Fz[wh::rr] = 0.5 * axle.Fz_r + (1.0 - xi_f) * dF;
  for (double& f : w.Fz) f = std::max(f, 0.0);
  return w;
}

// Axle-level command set produced by the NMPC after integrating the rates.
struct AllocationCommand {
  double delta_f = 0.0;  // [rad]
  double delta_r = 0.0;  // [rad]
  double Fx_f = 0.0;     // front axle longitudinal force [N]
  double p_b = 0.65;     // front share of braking force [-]
  double Mz = 0.0;       // direct yaw moment [N m], > 0 yaws left
};

struct ActuatorTargets {
  double delta_f = 0.0;
  double delta_r = 0.0;
  Wheel4 brake_torque{};     // >= 0 [N m]
  double drive_front = 0.0;  // front machine torque [N m], >= 0
  double drive_rear = 0.0;   // rear machine unused by the tracking controller
  Wheel4 fx_wheel{};         // realized per-wheel longitudinal force targets [N]
  bool limited = false;      // infeasible rear traction demand was clamped
  bool saturated = false;    // some wheel clipped at the friction limit
};

// Per-wheel force targets from the axle commands. Braking is split by p_b
// between the axles and evenly within an axle; the DYM adds extra braking on
// one side (Mz > 0 brakes the left side), split within the side by vertical
// load. Traction comes from the front machine, which always torques both
// front wheels equally through the open differential; an asymmetric demand is
// realized by braking the slower wheel against it, as in torque vectoring by
// brake.
inline ActuatorTargets allocate(const AllocationCommand& c, const WheelLoads& loads, double mu,
                                const VehicleParams& p, double r_wheel) {
  ActuatorTargets out;
  out.delta_f = c.delta_f;
  out.delta_r = c.delta_r;

  const double Fx_r = PredictionModel::rear_force(c.Fx_f, c.p_b);
  Wheel4 fx{0.5 * c.Fx_f, 0.5 * c.Fx_f, 0.5 * Fx_r, 0.5 * Fx_r};

  if (c.Mz != 0.0) {
    const double dF = std::abs(c.Mz) / (0.5 * p.tw);
    const int f = c.Mz > 0.0 ? wh::fl : wh::fr;
    const int r = c.Mz > 0.0 ? wh::rl : wh::rr;
    const double side = loads.Fz[f] + loads.Fz[r];
    const double share_f = side > 0.0 ? loads.Fz[f] / side : 0.5;
    fx[f] -= dF * share_f;
    fx[r] -= dF * (1.0 - share_f);
  }

  // the rear axle has no machine in this controller, so it cannot push
  if (fx[wh::rl] > 0.0 || fx[wh::rr] > 0.0) {
    out.limited = true;
    fx[wh::rl] = std::min(fx[wh::rl], 0.0);
    fx[wh::rr] = std::min(fx[wh::rr], 0.0);
  }

  for (int w = 0; w < 4; ++w) {
    const double cap = mu * loads.Fz[w];
    if (std::abs(fx[w]) > cap) {
      fx[w] = std::copysign(cap, fx[w]);
      out.saturated = true;
    }
  }

  out.fx_wheel = fx;
  const double sym = std::max({fx[wh::fl], fx[wh::fr], 0.0});
  out.drive_front = 2.0 * sym * r_wheel;
  out.brake_torque[wh::fl] = (sym - fx[wh::fl]) * r_wheel;
  out.brake_torque[wh::fr] = (sym - fx[wh::fr]) * r_wheel;
  for (int w : {wh::rl, wh::rr})
    if (fx[w] < 0.0) out.brake_torque[w] = -fx[w] * r_wheel;
  return out;
}

// Net force and moment realized by the wheel targets (steering ignored, as in
// the allocator itself).
inline double allocated_fx_total(const ActuatorTargets& t) {
  return t.fx_wheel[0] + t.fx_wheel[1] + t.fx_wheel[2] + t.fx_wheel[3];
}

inline double allocated_mz(const ActuatorTargets& t, const VehicleParams& p) {
  const double half = 0.5 * p.tw;
  return -half * (t.fx_wheel[wh::fl] + t.fx_wheel[wh::rl]) +
         half * (t.fx_wheel[wh::fr] + t.fx_wheel[wh::rr]);
}

struct MzEnvelope {
  double Mz_min = 0.0;
  double Mz_max = 0.0;
};

// Achievable DYM range from the residual braking capacity of each side, given
// the axle forces the controller predicted for the next step. Nominal braking
// is split evenly within an axle, so each wheel carries half the axle demand.
inline MzEnvelope mz_envelope(double Fx_f_pred, double p_b_pred, const WheelLoads& loads,
                              double mu, const VehicleParams& p) {
  const double Fx_r = PredictionModel::rear_force(Fx_f_pred, p_b_pred);
  const Wheel4 nominal{0.5 * Fx_f_pred, 0.5 * Fx_f_pred, 0.5 * Fx_r, 0.5 * Fx_r};
  Wheel4 cap;
  for (int w = 0; w < 4; ++w)
    cap[w] = std::max(0.0, mu * loads.Fz[w] - std::abs(nominal[w]));
  MzEnvelope e;
  e.Mz_max = 0.5 * p.tw * (cap[wh::fl] + cap[wh::rl]);
  e.Mz_min = -0.5 * p.tw * (cap[wh::fr] + cap[wh::rr]);
  return e;
}

}  // namespace driftnmpc
