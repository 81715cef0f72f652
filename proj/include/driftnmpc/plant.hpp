// Two-track simulation plant. Higher fidelity than the controller's internal
// model: per-wheel vertical loads with lateral transfer, wheel spin dynamics
// with brake/drive torques, combined-slip tyre forces, and first-order
// actuator lags. Reduction switches let tests collapse it onto the simpler
// model one effect at a time.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

#include "driftnmpc/allocation.hpp"
#include "driftnmpc/tyre.hpp"
#include "driftnmpc/types.hpp"

namespace driftnmpc {

// Plant state layout.
namespace px {
constexpr int X = 0, Y = 1, psi = 2;
constexpr int vx = 3, vy = 4, r = 5;
constexpr int om_fl = 6, om_fr = 7, om_rl = 8, om_rr = 9;
constexpr int df = 10, dr = 11;
constexpr int tb_fl = 12, tb_fr = 13, tb_rl = 14, tb_rr = 15;
constexpr int td = 16;
constexpr int ax_f = 17, ay_f = 18;
constexpr int n = 19;
}  // namespace px

struct PlantParams {
  VehicleParams veh;
  AxleTyre tyre_front{};
  AxleTyre tyre_rear{};
  AxleTyre tyre_long{12.0, 1.65, 1.0, 0.0};  // slip-ratio curve
  double mu = 0.85;
  double r_wheel = 0.30;   // [m]
  double Iw = 1.2;         // wheel spin inertia [kg m^2]
  double tau_steer_f = 0.05;
  double tau_steer_r = 0.05;
  double tau_brake = 0.03;
  double tau_drive = 0.02;
  double xi_f = 0.55;            // front share of lateral load transfer
  double tau_accel_filter = 0.08;
  double v_eps = 0.3;      // slip kinematics floor [m/s]
  double omega_eps = 0.5;  // brake torque sign smoothing [rad/s]

  void validate() const {
    veh.validate();
    tyre_front.validate();
    tyre_rear.validate();
    tyre_long.validate();
    if (!(mu > 0.0)) throw ConfigError("plant: mu > 0");
    if (!(r_wheel > 0.0 && Iw > 0.0)) throw ConfigError("plant: wheel params > 0");
    if (!(tau_steer_f > 0.0 && tau_steer_r > 0.0 && tau_brake > 0.0 && tau_drive > 0.0))
      throw ConfigError("plant: actuator time constants > 0");
    if (!(xi_f >= 0.0 && xi_f <= 1.0)) throw ConfigError("plant: xi_f in [0,1]");
    if (!(tau_accel_filter > 0.0)) throw ConfigError("plant: tau_accel_filter > 0");
    if (!(v_eps > 0.0 && omega_eps > 0.0)) throw ConfigError("plant: floors > 0");
  }
};

// Fidelity switches; all on for closed-loop runs.
struct PlantOptions {
  bool lateral_load_transfer = true;
  bool wheel_dynamics = true;  // off: per-wheel forces follow fx_direct
  bool combined_slip = true;
  bool actuator_lags = true;
  bool axle_center_slip = false;  // slip angles at axle midpoints
  std::optional<double> fixed_load_ax{};
};

struct PlantCommand {
  double delta_f = 0.0;
  double delta_r = 0.0;
  Wheel4 brake_torque{};
  double drive_front = 0.0;
  double drive_rear = 0.0;
  Wheel4 fx_direct{};  // used only when wheel_dynamics is off
  Wheel4 abs_scale{1.0, 1.0, 1.0, 1.0};

  static PlantCommand from_targets(const ActuatorTargets& t) {
    PlantCommand c;
    c.delta_f = t.delta_f;
    c.delta_r = t.delta_r;
    c.brake_torque = t.brake_torque;
    c.drive_front = t.drive_front;
    c.drive_rear = t.drive_rear;
    c.fx_direct = t.fx_wheel;
    return c;
  }
};

class TwoTrackPlant {
 public:
  using StateVec = Eigen::Matrix<double, px::n, 1>;

  TwoTrackPlant(const PlantParams& params, const PlantOptions& opts = {})
      : p_(params), opts_(opts) {
    p_.validate();
    x_.setZero();
  }

  void reset(double X0, double Y0, double psi0, double vx0) {
    x_.setZero();
    x_[px::X] = X0;
    x_[px::Y] = Y0;
    x_[px::psi] = psi0;
    x_[px::vx] = vx0;
    const double om0 = vx0 / p_.r_wheel;
    x_[px::om_fl] = x_[px::om_fr] = x_[px::om_rl] = x_[px::om_rr] = om0;
  }

  // One RK4 step of length dt. Commands and ABS modulation are held constant.
  void step(const PlantCommand& cmd, double dt) {
    if (!opts_.actuator_lags) {
      x_[px::df] = cmd.delta_f;
      x_[px::dr] = cmd.delta_r;
      for (int w = 0; w < 4; ++w) x_[px::tb_fl + w] = cmd.brake_torque[w];
      x_[px::td] = cmd.drive_front;
    }
    const StateVec k1 = derivatives(x_, cmd);
    const StateVec k2 = derivatives(x_ + 0.5 * dt * k1, cmd);
    const StateVec k3 = derivatives(x_ + 0.5 * dt * k2, cmd);
    const StateVec k4 = derivatives(x_ + dt * k3, cmd);
    x_ += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    for (int w = 0; w < 4; ++w) x_[px::om_fl + w] = std::max(x_[px::om_fl + w], 0.0);
  }

  const StateVec& state() const { return x_; }
  StateVec& mutable_state() { return x_; }

  double beta() const { return std::atan2(x_[px::vy], std::max(x_[px::vx], 1e-6)); }
  double ax_filtered() const { return x_[px::ax_f]; }
  double ay_filtered() const { return x_[px::ay_f]; }

  WheelLoads loads() const { return loads_for(x_); }

  // Braking slip per wheel, positive when the wheel turns slower than the
  // contact point moves.
  Wheel4 braking_slip() const {
    Wheel4 s{};
    for (int w = 0; w < 4; ++w) {
      const WheelKinematics k = wheel_kinematics(x_, w);
      s[w] = (k.v_long - x_[px::om_fl + w] * p_.r_wheel) / std::max(k.v_long, p_.v_eps);
    }
    return s;
  }

  const PlantParams& params() const { return p_; }
  const PlantOptions& options() const { return opts_; }

 private:
  struct WheelKinematics {
    double v_long = 0.0;
    double v_lat = 0.0;
    double steer = 0.0;
    double xw = 0.0;
    double yw = 0.0;
  };

  static constexpr std::array<double, 4> side_sign_{1.0, -1.0, 1.0, -1.0};

  WheelKinematics wheel_kinematics(const StateVec& x, int w) const {
    WheelKinematics k;
    k.xw = (w < 2) ? p_.veh.lf : -p_.veh.lr;
    k.yw = side_sign_[w] * 0.5 * p_.veh.tw;
    k.steer = (w < 2) ? x[px::df] : x[px::dr];
    const double y_slip = opts_.axle_center_slip ? 0.0 : k.yw;
    const double vcx = x[px::vx] - x[px::r] * y_slip;
    const double vcy = x[px::vy] + x[px::r] * k.xw;
    k.v_long = std::cos(k.steer) * vcx + std::sin(k.steer) * vcy;
    k.v_lat = -std::sin(k.steer) * vcx + std::cos(k.steer) * vcy;
    return k;
  }

  WheelLoads loads_for(const StateVec& x) const {
    const double ax = opts_.fixed_load_ax ? *opts_.fixed_load_ax : x[px::ax_f];
    const double ay = opts_.lateral_load_transfer ? x[px::ay_f] : 0.0;
    return wheel_vertical_loads(ax, ay, p_.veh, p_.xi_f);
  }

  StateVec derivatives(const StateVec& x, const PlantCommand& cmd) const {
    StateVec dx = StateVec::Zero();
    const WheelLoads loads = loads_for(x);

    double sum_fx = 0.0, sum_fy = 0.0, sum_mz = 0.0;
    std::array<double, 4> fx_wheel{};
    for (int w = 0; w < 4; ++w) {
      const WheelKinematics k = wheel_kinematics(x, w);
      const double Fz = loads.Fz[w];
      const AxleTyre& lat = (w < 2) ? p_.tyre_front : p_.tyre_rear;

      double alpha;
      if (opts_.axle_center_slip) {
        // matches the controller model's axle formula exactly
        const double q = x[px::vy] + x[px::r] * k.xw;
        alpha = k.steer - std::atan(q / std::max(x[px::vx], p_.v_eps));
      } else {
        alpha = -std::atan2(k.v_lat, std::max(k.v_long, p_.v_eps));
      }

      double fx;
      if (opts_.wheel_dynamics) {
        const double sigma =
            (x[px::om_fl + w] * p_.r_wheel - k.v_long) / std::max(std::abs(k.v_long), p_.v_eps);
        fx = wheel_longitudinal_force(sigma, Fz, p_.mu, p_.tyre_long);
      } else {
        fx = cmd.fx_direct[w];
      }
      double fy = axle_lateral_force(alpha, Fz, p_.mu, lat);
      if (opts_.combined_slip) {
        const double cap = p_.mu * Fz;
        if (cap > 0.0) {
          fx = clamp(fx, -cap, cap);
          fy *= std::sqrt(std::max(0.0, 1.0 - (fx / cap) * (fx / cap)));
        } else {
          fx = 0.0;
          fy = 0.0;
        }
      }
      fx_wheel[w] = fx;

      const double fxb = std::cos(k.steer) * fx - std::sin(k.steer) * fy;
      const double fyb = std::sin(k.steer) * fx + std::cos(k.steer) * fy;
      sum_fx += fxb;
      sum_fy += fyb;
      sum_mz += k.xw * fyb - k.yw * fxb;
    }

    const double vx = x[px::vx];
    sum_fx -= p_.veh.cd_a * vx * vx * std::tanh(vx / 0.2);
    sum_fx -= p_.veh.f_roll * p_.veh.m * p_.veh.g * std::tanh(vx / 0.2);

    const double ax_body = sum_fx / p_.veh.m;
    const double ay_body = sum_fy / p_.veh.m;

    dx[px::X] = vx * std::cos(x[px::psi]) - x[px::vy] * std::sin(x[px::psi]);
    dx[px::Y] = vx * std::sin(x[px::psi]) + x[px::vy] * std::cos(x[px::psi]);
    dx[px::psi] = x[px::r];
    dx[px::vx] = ax_body + x[px::vy] * x[px::r];
    dx[px::vy] = ay_body - vx * x[px::r];
    dx[px::r] = sum_mz / p_.veh.Iz;

    if (opts_.wheel_dynamics) {
      for (int w = 0; w < 4; ++w) {
        const double drive = (w < 2) ? 0.5 * x[px::td] : 0.5 * cmd.drive_rear;
        const double tb = x[px::tb_fl + w] * cmd.abs_scale[w];
        const double om = x[px::om_fl + w];
        const double brake = tb * clamp(om / p_.omega_eps, -1.0, 1.0);
        dx[px::om_fl + w] = (drive - brake - p_.r_wheel * fx_wheel[w]) / p_.Iw;
      }
    }

    if (opts_.actuator_lags) {
      dx[px::df] = (cmd.delta_f - x[px::df]) / p_.tau_steer_f;
      dx[px::dr] = (cmd.delta_r - x[px::dr]) / p_.tau_steer_r;
      for (int w = 0; w < 4; ++w)
        dx[px::tb_fl + w] = (cmd.brake_torque[w] - x[px::tb_fl + w]) / p_.tau_brake;
      dx[px::td] = (cmd.drive_front - x[px::td]) / p_.tau_drive;
    }

    dx[px::ax_f] = (ax_body - x[px::ax_f]) / p_.tau_accel_filter;
    dx[px::ay_f] = (ay_body - x[px::ay_f]) / p_.tau_accel_filter;
    return dx;
  }

  PlantParams p_;
  PlantOptions opts_;
  StateVec x_;
};

}  // namespace driftnmpc
