// Single-track prediction dynamics used inside the NMPC: force/moment
// balances, curvilinear path-error states, command integrators, analytic
// Jacobians and the RK4 discretization.
//
// State layout (mz_dr; the smaller variants are prefixes):
//   [vx, vy, yaw_rate, s, e_y, e_psi, delta_f, Fx_f, Mz, delta_r]
// Input layout:
//   [ddelta_f, dFx_f, p_b, dMz, eps_Mz, ddelta_r]
#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "driftnmpc/tyre.hpp"
#include "driftnmpc/types.hpp"

namespace driftnmpc {

// State indices.
namespace sx {
constexpr int vx = 0, vy = 1, r = 2, s = 3, ey = 4, epsi = 5, df = 6, fxf = 7, mz = 8, dr = 9;
}
// Input indices.
namespace su {
constexpr int ddf = 0, dfxf = 1, pb = 2, dmz = 3, eps = 4, ddr = 5;
}

struct SlipAngles {
  double front = 0.0;
  double rear = 0.0;
};

// Axle vertical loads from static distribution plus longitudinal transfer,
// clamped at zero with the opposite axle absorbing the remainder.
inline VerticalLoads vertical_loads(double ax_meas, const VehicleParams& p) {
  const double L = p.wheelbase();
  const double total = p.m * p.g;
  double Fz_f = total * p.lr / L - p.m * ax_meas * p.hg / L;
  double Fz_r = total - Fz_f;
  if (Fz_f < 0.0) {
    Fz_f = 0.0;
    Fz_r = total;
  } else if (Fz_r < 0.0) {
    Fz_r = 0.0;
    Fz_f = total;
  }
  return {Fz_f, Fz_r};
}

inline SlipAngles slip_angles(const PredictionState& x, const VehicleParams& p,
                              double vx_floor = 0.5) {
  if (!(x.vx > vx_floor))
    throw ModelError("slip angles singular: vx below floor");
  return {x.delta_f - std::atan((x.vy + p.lf * x.yaw_rate) / x.vx),
          x.delta_r - std::atan((x.vy - p.lr * x.yaw_rate) / x.vx)};
}

struct ModelOptions {
  double vx_floor = 0.5;    // [m/s]
  double fixed_p_b = 0.65;  // braking split used when the variant has no p_b input
};

class PredictionModel {
 public:
  using Options = ModelOptions;

  // Per-stage exogenous data (curvature varies along the horizon, loads and
  // friction are held constant).
  struct Stage {
    double rho_ref = 0.0;
    VerticalLoads loads;
    double mu = 1.0;
  };

  PredictionModel(Variant v, const VehicleParams& vp, const TyreParams& tp,
                  Options opt = Options())
      : variant_(v), dims_(dims_of(v)), vp_(vp), tp_(tp), opt_(opt) {
    vp_.validate();
    tp_.validate();
  }

  Variant variant() const { return variant_; }
  const VariantDims& dims() const { return dims_; }
  const VehicleParams& vehicle() const { return vp_; }
  const TyreParams& tyres() const { return tp_; }
  const Options& options() const { return opt_; }

  Eigen::VectorXd pack_state(const PredictionState& x) const {
    Eigen::VectorXd v(dims_.nx);
    v[sx::vx] = x.vx;
    v[sx::vy] = x.vy;
    v[sx::r] = x.yaw_rate;
    v[sx::s] = x.s;
    v[sx::ey] = x.e_y;
    v[sx::epsi] = x.e_psi;
    v[sx::df] = x.delta_f;
    v[sx::fxf] = x.Fx_f;
    if (dims_.has_mz) v[sx::mz] = x.Mz;
    if (dims_.has_dr) v[sx::dr] = x.delta_r;
    return v;
  }

  PredictionState unpack_state(const Eigen::VectorXd& v) const {
    PredictionState x;
    x.vx = v[sx::vx];
    x.vy = v[sx::vy];
    x.yaw_rate = v[sx::r];
    x.s = v[sx::s];
    x.e_y = v[sx::ey];
    x.e_psi = v[sx::epsi];
    x.delta_f = v[sx::df];
    x.Fx_f = v[sx::fxf];
    x.Mz = dims_.has_mz ? v[sx::mz] : 0.0;
    x.delta_r = dims_.has_dr ? v[sx::dr] : 0.0;
    return x;
  }

  Eigen::VectorXd pack_input(const ControlInput& u) const {
    Eigen::VectorXd v(dims_.nu);
    v[su::ddf] = u.ddelta_f;
    v[su::dfxf] = u.dFx_f;
    if (dims_.has_mz) {
      v[su::pb] = u.p_b;
      v[su::dmz] = u.dMz;
      v[su::eps] = u.eps_Mz;
    }
    if (dims_.has_dr) v[su::ddr] = u.ddelta_r;
    return v;
  }

  ControlInput unpack_input(const Eigen::VectorXd& v) const {
    ControlInput u;
    u.ddelta_f = v[su::ddf];
    u.dFx_f = v[su::dfxf];
    if (dims_.has_mz) {
      u.p_b = v[su::pb];
      u.dMz = v[su::dmz];
      u.eps_Mz = v[su::eps];
    } else {
      u.p_b = opt_.fixed_p_b;
    }
    u.ddelta_r = dims_.has_dr ? v[su::ddr] : 0.0;
    return u;
  }

  double effective_p_b(const Eigen::VectorXd& u) const {
    return dims_.has_mz ? u[su::pb] : opt_.fixed_p_b;
  }

  // Rear axle force reconstructed from the braking split; zero in traction
  // (the front machine alone serves positive demands).
  static double rear_force(double Fx_f, double p_b) {
    return Fx_f < 0.0 ? Fx_f * (1.0 - p_b) / p_b : 0.0;
  }

  AxleForces axle_forces(const Eigen::VectorXd& x, double p_b, const Stage& w) const {
    AxleForces F;
    const double vx = x[sx::vx];
    const double qf = x[sx::vy] + vp_.lf * x[sx::r];
    const double qr = x[sx::vy] - vp_.lr * x[sx::r];
    const double af = x[sx::df] - std::atan(qf / vx);
    const double dr_eff = dims_.has_dr ? x[sx::dr] : 0.0;
    const double ar = dr_eff - std::atan(qr / vx);
    F.Fy_f = axle_lateral_force(af, w.loads.Fz_f, w.mu, tp_.front);
    F.Fy_r = axle_lateral_force(ar, w.loads.Fz_r, w.mu, tp_.rear);
    F.Fx_f = x[sx::fxf];
    F.Fx_r = rear_force(F.Fx_f, p_b);
    F.Fx_Mz = dims_.has_mz ? std::abs(x[sx::mz]) * 2.0 / vp_.tw : 0.0;
    return F;
  }

  // Continuous-time state derivative.
  Eigen::VectorXd dynamics(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                           const Stage& w) const {
    check_valid(x);
    const double vx = x[sx::vx], vy = x[sx::vy], r = x[sx::r];
    const double epsi = x[sx::epsi], df = x[sx::df];
    const double dr_eff = dims_.has_dr ? x[sx::dr] : 0.0;
    const double Mz_s = dims_.has_mz ? x[sx::mz] : 0.0;

    const AxleForces F = axle_forces(x, effective_p_b(u), w);
    const double cf = std::cos(df), sf = std::sin(df);
    const double cr = std::cos(dr_eff), sr = std::sin(dr_eff);
    const double Fdrag = vp_.cd_a * vx * vx;
    const double Froll = vp_.f_roll * vp_.m * vp_.g;

    const double den = 1.0 - w.rho_ref * x[sx::ey];
    if (!(den > 1e-6))
      throw ModelError("path-frame singularity: 1 - rho*e_y <= 0");

    Eigen::VectorXd dx(dims_.nx);
    dx[sx::vx] = (F.Fx_f * cf - F.Fy_f * sf + F.Fx_r * cr - F.Fy_r * sr - F.Fx_Mz - Fdrag -
                  Froll) / vp_.m + vy * r;
    dx[sx::vy] = (F.Fx_f * sf + F.Fy_f * cf + F.Fx_r * sr + F.Fy_r * cr) / vp_.m - vx * r;
    dx[sx::r] = (vp_.lf * (F.Fx_f * sf + F.Fy_f * cf) -
                 vp_.lr * (F.Fy_r * cr + F.Fx_r * sr) + Mz_s) / vp_.Iz;
    const double ce = std::cos(epsi), se = std::sin(epsi);
    const double sdot = (vx * ce - vy * se) / den;
    dx[sx::s] = sdot;
    dx[sx::ey] = vx * se + vy * ce;
    dx[sx::epsi] = r - w.rho_ref * sdot;
    dx[sx::df] = u[su::ddf];
    dx[sx::fxf] = u[su::dfxf];
    if (dims_.has_mz) dx[sx::mz] = u[su::dmz];
    if (dims_.has_dr) dx[sx::dr] = u[su::ddr];
    return dx;
  }

  // Analytic Jacobians of the continuous dynamics, A = df/dx, B = df/du.
  void dynamics_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Stage& w,
                          Eigen::MatrixXd& A, Eigen::MatrixXd& B) const {
    check_valid(x);
    const int nx = dims_.nx, nu = dims_.nu;
    A.setZero(nx, nx);
    B.setZero(nx, nu);

    const double vx = x[sx::vx], vy = x[sx::vy], r = x[sx::r];
    const double epsi = x[sx::epsi], df = x[sx::df], Fxf = x[sx::fxf];
    const double dr_eff = dims_.has_dr ? x[sx::dr] : 0.0;
    const double Mz_s = dims_.has_mz ? x[sx::mz] : 0.0;
    const double p_b = effective_p_b(u);
    const double m = vp_.m, Iz = vp_.Iz, lf = vp_.lf, lr = vp_.lr;

    const double qf = vy + lf * r, qr = vy - lr * r;
    const double Df = vx * vx + qf * qf, Dr = vx * vx + qr * qr;
    const double af = df - std::atan(qf / vx);
    const double ar = dr_eff - std::atan(qr / vx);
    const double Fyf = axle_lateral_force(af, w.loads.Fz_f, w.mu, tp_.front);
    const double Fyr = axle_lateral_force(ar, w.loads.Fz_r, w.mu, tp_.rear);
    const double Gf = axle_lateral_force_dalpha(af, w.loads.Fz_f, w.mu, tp_.front);
    const double Gr = axle_lateral_force_dalpha(ar, w.loads.Fz_r, w.mu, tp_.rear);

    // slip angle partials
    const double af_vx = qf / Df, af_vy = -vx / Df, af_r = -lf * vx / Df;
    const double ar_vx = qr / Dr, ar_vy = -vx / Dr, ar_r = lr * vx / Dr;

    const double cf = std::cos(df), sf = std::sin(df);
    const double cr = std::cos(dr_eff), sr = std::sin(dr_eff);

    const double Fxr = rear_force(Fxf, p_b);
    const double dFxr_dFxf = Fxf < 0.0 ? (1.0 - p_b) / p_b : 0.0;
    const double dFxr_dpb = Fxf < 0.0 ? -Fxf / (p_b * p_b) : 0.0;
    const double sgn_mz = Mz_s > 0.0 ? 1.0 : (Mz_s < 0.0 ? -1.0 : 0.0);

    // vx row
    A(sx::vx, sx::vx) = (-Gf * af_vx * sf - Gr * ar_vx * sr - 2.0 * vp_.cd_a * vx) / m;
    A(sx::vx, sx::vy) = (-Gf * af_vy * sf - Gr * ar_vy * sr) / m + r;
    A(sx::vx, sx::r) = (-Gf * af_r * sf - Gr * ar_r * sr) / m + vy;
    A(sx::vx, sx::df) = (-Fxf * sf - Fyf * cf - Gf * sf) / m;
    A(sx::vx, sx::fxf) = (cf + dFxr_dFxf * cr) / m;
    if (dims_.has_mz) A(sx::vx, sx::mz) = -sgn_mz * 2.0 / (vp_.tw * m);
    if (dims_.has_dr) A(sx::vx, sx::dr) = (-Fxr * sr - Gr * sr - Fyr * cr) / m;

    // vy row
    A(sx::vy, sx::vx) = (Gf * af_vx * cf + Gr * ar_vx * cr) / m - r;
    A(sx::vy, sx::vy) = (Gf * af_vy * cf + Gr * ar_vy * cr) / m;
    A(sx::vy, sx::r) = (Gf * af_r * cf + Gr * ar_r * cr) / m - vx;
    A(sx::vy, sx::df) = (Fxf * cf + Gf * cf - Fyf * sf) / m;
    A(sx::vy, sx::fxf) = (sf + dFxr_dFxf * sr) / m;
    if (dims_.has_dr) A(sx::vy, sx::dr) = (Fxr * cr + Gr * cr - Fyr * sr) / m;

    // yaw rate row
    A(sx::r, sx::vx) = (lf * Gf * af_vx * cf - lr * Gr * ar_vx * cr) / Iz;
    A(sx::r, sx::vy) = (lf * Gf * af_vy * cf - lr * Gr * ar_vy * cr) / Iz;
    A(sx::r, sx::r) = (lf * Gf * af_r * cf - lr * Gr * ar_r * cr) / Iz;
    A(sx::r, sx::df) = lf * (Fxf * cf + Gf * cf - Fyf * sf) / Iz;
    A(sx::r, sx::fxf) = (lf * sf - lr * dFxr_dFxf * sr) / Iz;
    if (dims_.has_mz) A(sx::r, sx::mz) = 1.0 / Iz;
    if (dims_.has_dr) A(sx::r, sx::dr) = -lr * (Gr * cr - Fyr * sr + Fxr * cr) / Iz;

    // path rows
    const double rho = w.rho_ref;
    const double den = 1.0 - rho * x[sx::ey];
    if (!(den > 1e-6))
      throw ModelError("path-frame singularity: 1 - rho*e_y <= 0");
    const double ce = std::cos(epsi), se = std::sin(epsi);
    const double sdot = (vx * ce - vy * se) / den;
    const double eydot = vx * se + vy * ce;

    A(sx::s, sx::vx) = ce / den;
    A(sx::s, sx::vy) = -se / den;
    A(sx::s, sx::ey) = sdot * rho / den;
    A(sx::s, sx::epsi) = -eydot / den;

    A(sx::ey, sx::vx) = se;
    A(sx::ey, sx::vy) = ce;
    A(sx::ey, sx::epsi) = vx * ce - vy * se;

    A(sx::epsi, sx::r) = 1.0;
    A(sx::epsi, sx::vx) = -rho * ce / den;
    A(sx::epsi, sx::vy) = rho * se / den;
    A(sx::epsi, sx::ey) = -rho * sdot * rho / den;
    A(sx::epsi, sx::epsi) = rho * eydot / den;

    // command integrators
    B(sx::df, su::ddf) = 1.0;
    B(sx::fxf, su::dfxf) = 1.0;
    if (dims_.has_mz) {
      B(sx::mz, su::dmz) = 1.0;
      B(sx::vx, su::pb) = dFxr_dpb * cr / m;
      B(sx::vy, su::pb) = dFxr_dpb * sr / m;
      B(sx::r, su::pb) = -lr * dFxr_dpb * sr / Iz;
    }
    if (dims_.has_dr) B(sx::dr, su::ddr) = 1.0;
  }

  // One explicit RK4 step with inputs held constant over the stage.
  Eigen::VectorXd discretize(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                             const Stage& w, double Ts) const {
    const double h = Ts;
    const Eigen::VectorXd k1 = dynamics(x, u, w);
    const Eigen::VectorXd k2 = dynamics(x + 0.5 * h * k1, u, w);
    const Eigen::VectorXd k3 = dynamics(x + 0.5 * h * k2, u, w);
    const Eigen::VectorXd k4 = dynamics(x + h * k3, u, w);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  // RK4 step together with the discrete Jacobians Ad = dx+/dx, Bd = dx+/du
  // obtained by chaining the analytic stage Jacobians.
  Eigen::VectorXd discretize_with_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                            const Stage& w, double Ts, Eigen::MatrixXd& Ad,
                                            Eigen::MatrixXd& Bd) const {
    const int nx = dims_.nx, nu = dims_.nu;
    const double h = Ts;
    Eigen::MatrixXd A1(nx, nx), A2(nx, nx), A3(nx, nx), A4(nx, nx);
    Eigen::MatrixXd B1(nx, nu), B2(nx, nu), B3(nx, nu), B4(nx, nu);

    const Eigen::VectorXd k1 = dynamics(x, u, w);
    dynamics_jacobians(x, u, w, A1, B1);

    const Eigen::VectorXd x2 = x + 0.5 * h * k1;
    const Eigen::VectorXd k2 = dynamics(x2, u, w);
    dynamics_jacobians(x2, u, w, A2, B2);
    const Eigen::MatrixXd dk2_dx = A2 * (Eigen::MatrixXd::Identity(nx, nx) + 0.5 * h * A1);
    const Eigen::MatrixXd dk2_du = A2 * (0.5 * h * B1) + B2;

    const Eigen::VectorXd x3 = x + 0.5 * h * k2;
    const Eigen::VectorXd k3 = dynamics(x3, u, w);
    dynamics_jacobians(x3, u, w, A3, B3);
    const Eigen::MatrixXd dk3_dx = A3 * (Eigen::MatrixXd::Identity(nx, nx) + 0.5 * h * dk2_dx);
    const Eigen::MatrixXd dk3_du = A3 * (0.5 * h * dk2_du) + B3;

    const Eigen::VectorXd x4 = x + h * k3;
    const Eigen::VectorXd k4 = dynamics(x4, u, w);
    dynamics_jacobians(x4, u, w, A4, B4);
    const Eigen::MatrixXd dk4_dx = A4 * (Eigen::MatrixXd::Identity(nx, nx) + h * dk3_dx);
    const Eigen::MatrixXd dk4_du = A4 * (h * dk3_du) + B4;

    Ad = Eigen::MatrixXd::Identity(nx, nx) + (h / 6.0) * (A1 + 2.0 * dk2_dx + 2.0 * dk3_dx + dk4_dx);
    Bd = (h / 6.0) * (B1 + 2.0 * dk2_du + 2.0 * dk3_du + dk4_du);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

 private:
  void check_valid(const Eigen::VectorXd& x) const {
    if (!(x[sx::vx] > opt_.vx_floor))
      throw ModelError("prediction dynamics singular: vx below floor");
  }

  Variant variant_;
  VariantDims dims_;
  VehicleParams vp_;
  TyreParams tp_;
  Options opt_;
};

}  // namespace driftnmpc
