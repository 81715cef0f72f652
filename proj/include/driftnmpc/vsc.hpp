// Low-level safety layer: per-wheel ABS slip control and a yaw/sideslip
// supervisor that injects corrective single-wheel braking. Both run at the
// plant substep rate, downstream of the NMPC.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "driftnmpc/allocation.hpp"
#include "driftnmpc/types.hpp"

namespace driftnmpc {

struct AbsConfig {
  double slip_target = 0.12;  // braking slip setpoint [-]
  double slip_band = 0.04;    // engage above target + band
  double kp = 8.0;
  double ki = 80.0;
  double integrator_max = 1.0;

  void validate() const {
    if (!(slip_target > 0.0 && slip_target < 1.0)) throw ConfigError("abs: slip_target in (0,1)");
    if (!(slip_band >= 0.0)) throw ConfigError("abs: slip_band >= 0");
    if (!(kp >= 0.0 && ki >= 0.0)) throw ConfigError("abs: gains >= 0");
  }
};

// Modulates the applied brake torque with a scale factor in [0, 1] per wheel.
// Engages once braking slip exceeds target + band and releases on a small
// hysteresis; inside the controlled phase a PI law tracks the slip target.
class AbsController {
 public:
  explicit AbsController(const AbsConfig& cfg = {}) : cfg_(cfg) { cfg_.validate(); }

  void reset() {
    integ_.fill(0.0);
    engaged_.fill(false);
  }

  // slip: braking slip per wheel, positive when the wheel lags the body.
  // braking: whether a brake torque is currently commanded on that wheel.
  Wheel4 update(const Wheel4& slip, const std::array<bool, 4>& braking, double dt) {
    Wheel4 scale{1.0, 1.0, 1.0, 1.0};
    for (int w = 0; w < 4; ++w) {
      if (!braking[w]) {
        integ_[w] = 0.0;
        engaged_[w] = false;
        continue;
      }
      if (!engaged_[w] && slip[w] > cfg_.slip_target + cfg_.slip_band) engaged_[w] = true;
      if (engaged_[w] && slip[w] < 0.1 * cfg_.slip_target) engaged_[w] = false;
      if (!engaged_[w]) {
        integ_[w] = std::max(0.0, integ_[w] - 4.0 * cfg_.ki * dt * cfg_.slip_target);
        continue;
      }
      const double err = slip[w] - cfg_.slip_target;
      integ_[w] = clamp(integ_[w] + cfg_.ki * err * dt, 0.0, cfg_.integrator_max);
      scale[w] = clamp(1.0 - cfg_.kp * err - integ_[w], 0.0, 1.0);
    }
    return scale;
  }

  bool engaged(int wheel) const { return engaged_[wheel]; }
  bool any_engaged() const {
    return engaged_[0] || engaged_[1] || engaged_[2] || engaged_[3];
  }

 private:
  AbsConfig cfg_;
  Wheel4 integ_{};
  std::array<bool, 4> engaged_{};
};

struct VscConfig {
  double beta_max = deg2rad(8.0);   // sideslip threshold [rad]
  double yaw_err_max = 0.15;        // yaw-rate error threshold [rad/s]
  double hysteresis = 0.10;         // release fraction below threshold
  double kp_yaw = 4000.0;           // corrective moment per rad/s of excess
  double kp_beta = 12000.0;         // corrective moment per rad of excess
  double mu = 0.85;

  void validate() const {
    if (!(beta_max > 0.0 && yaw_err_max > 0.0)) throw ConfigError("vsc: thresholds > 0");
    if (!(hysteresis >= 0.0 && hysteresis < 1.0)) throw ConfigError("vsc: hysteresis in [0,1)");
  }

  // Drift control deliberately operates far beyond ESC comfort limits, so the
  // DYM variants run with widened thresholds.
  static VscConfig nominal() { return VscConfig{}; }
  static VscConfig relaxed() {
    VscConfig c;
    c.beta_max = deg2rad(70.0);
    c.yaw_err_max = 1.5;
    return c;
  }
};

// Watches yaw-rate error against the path yaw rate and total sideslip. On
// intervention it brakes one front wheel to generate a restoring moment,
// capped by that wheel's friction capacity.
class VscSupervisor {
 public:
  explicit VscSupervisor(const VscConfig& cfg = VscConfig::nominal()) : cfg_(cfg) {
    cfg_.validate();
  }

  struct Correction {
    bool active = false;
    double Mz = 0.0;          // restoring moment [N m]
    Wheel4 brake_torque{};    // additional brake torque per wheel [N m]
  };

  Correction update(double r, double r_ref, double beta, const WheelLoads& loads,
                    double r_wheel, const VehicleParams& p) {
    const double yaw_err = r - r_ref;
    const double release = 1.0 - cfg_.hysteresis;
    const bool yaw_trip = std::abs(yaw_err) > (yaw_on_ ? release : 1.0) * cfg_.yaw_err_max;
    const bool beta_trip = std::abs(beta) > (beta_on_ ? release : 1.0) * cfg_.beta_max;
    yaw_on_ = yaw_trip;
    beta_on_ = beta_trip;

    Correction c;
    if (!yaw_trip && !beta_trip) return c;
    c.active = true;

    double Mz = 0.0;
    if (yaw_trip) {
      const double excess = std::abs(yaw_err) - release * cfg_.yaw_err_max;
      Mz -= std::copysign(cfg_.kp_yaw * excess, yaw_err);
    }
    if (beta_trip) {
      // damp the rotation that builds sideslip
      const double excess = std::abs(beta) - release * cfg_.beta_max;
      Mz -= std::copysign(cfg_.kp_beta * excess, r);
    }

    // Mz > 0 brakes front-left, Mz < 0 brakes front-right
    const int w = Mz > 0.0 ? wh::fl : wh::fr;
    const double cap = cfg_.mu * loads.Fz[w];
    const double force = std::min(std::abs(Mz) / (0.5 * p.tw), cap);
    c.Mz = std::copysign(force * 0.5 * p.tw, Mz);
    c.brake_torque[w] = force * r_wheel;
    return c;
  }

  bool intervening() const { return yaw_on_ || beta_on_; }

 private:
  VscConfig cfg_;
  bool yaw_on_ = false;
  bool beta_on_ = false;
};

}  // namespace driftnmpc
