// Optimal control problem data: tracked outputs, weights, bounds, stage cost
// and the friction / DYM-envelope constraint residuals.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <vector>

#include "driftnmpc/prediction_model.hpp"
#include "driftnmpc/types.hpp"

namespace driftnmpc {

// One weight per tracked output. Assembled into a per-variant vector in the
// output ordering [vx, e_y, e_psi, delta_f, (delta_r), Fx_f, (Mz)].
struct OutputWeights {
  double vx = 0.0;
  double e_y = 0.0;
  double e_psi = 0.0;
  double delta_f = 0.0;
  double delta_r = 0.0;
  double Fx_f = 0.0;
  double Mz = 0.0;
};

// Quadratic regularization on the rate inputs plus a centering term that
// keeps the braking split identifiable when no braking is commanded.
struct InputWeights {
  double ddelta_f = 0.0;  // [1/(rad/s)^2]
  double ddelta_r = 0.0;
  double dFx_f = 0.0;     // [1/(N/s)^2]
  double dMz = 0.0;       // [1/(N m/s)^2]
  double p_b = 0.0;       // [-], applied to p_b - fixed_p_b
};

struct OcpBounds {
  double delta_f_max = deg2rad(30.0);   // [rad]
  double delta_r_max = deg2rad(10.0);   // [rad]
  double ddelta_f_max = deg2rad(70.0);  // [rad/s]
  double ddelta_r_max = deg2rad(70.0);  // [rad/s]
  double dFx_f_min = -30000.0;          // [N/s]
  double dFx_f_max = 30000.0;           // [N/s]
  double dMz_min = -40000.0;            // [N m/s]
  double dMz_max = 40000.0;             // [N m/s]
  double p_b_min = 0.15;                // [-]
  double p_b_max = 0.90;                // [-]
};

struct OcpConfig {
  int Hp = 25;
  double Ts = 0.04;  // [s]
  OutputWeights stage_w;
  OutputWeights term_w;
  InputWeights input_w;
  double slack_lin = 1e-2;    // L1 weight on eps_Mz [1/(N m)]
  double slack_quad = 1e-5;   // L2 weight on eps_Mz [1/(N m)^2]
  double pen_friction = 4e-5; // quadratic penalty on friction-circle violations [1/N^2]
  double pen_mz_env = 1e-4;   // quadratic penalty on the slacked Mz envelope [1/(N m)^2]
  double pen_steer = 2e3;     // quadratic penalty on steer-magnitude violations beyond stage 0
  OcpBounds bounds;
  double mu_id = 0.63;        // ideal friction factor for the controller-side friction circle
  double fixed_p_b = 0.65;    // braking split assumed when p_b is not a control input
  int max_iters = 10;
  double tol_step = 1e-4;     // scaled step infinity-norm convergence threshold
  double tol_obj = 1e-9;      // relative objective decrease threshold
  double levenberg = 1e-8;    // relative Hessian regularization
  double vx_floor = 0.5;      // [m/s]

  void validate() const {
    if (Hp < 2) throw ConfigError("Hp must be >= 2");
    if (!(Ts > 0)) throw ConfigError("Ts must be positive");
    if (!(bounds.p_b_min > 0 && bounds.p_b_min <= bounds.p_b_max && bounds.p_b_max <= 1.0))
      throw ConfigError("p_b bounds must satisfy 0 < min <= max <= 1");
    if (!(bounds.ddelta_f_max > 0 && bounds.ddelta_r_max >= 0 && bounds.delta_f_max > 0 &&
          bounds.delta_r_max >= 0))
      throw ConfigError("steering bounds must be positive");
    if (!(bounds.dFx_f_min <= bounds.dFx_f_max && bounds.dMz_min <= bounds.dMz_max))
      throw ConfigError("rate bounds inverted");
    if (!(mu_id > 0)) throw ConfigError("mu_id must be positive");
    const double w[] = {stage_w.vx, stage_w.e_y, stage_w.e_psi, stage_w.delta_f,
                        stage_w.delta_r, stage_w.Fx_f, stage_w.Mz, term_w.vx, term_w.e_y,
                        term_w.e_psi, term_w.delta_f, term_w.delta_r, term_w.Fx_f, term_w.Mz,
                        input_w.ddelta_f, input_w.ddelta_r, input_w.dFx_f, input_w.dMz,
                        input_w.p_b, slack_lin, slack_quad, pen_friction, pen_mz_env, pen_steer};
    for (double wi : w)
      if (wi < 0) throw ConfigError("weights and penalties must be non-negative");
    if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  }
};

// State indices of the tracked outputs, in output order.
inline std::vector<int> output_state_indices(Variant v) {
  switch (v) {
    case Variant::bas:   return {sx::vx, sx::ey, sx::epsi, sx::df, sx::fxf};
    case Variant::mz:    return {sx::vx, sx::ey, sx::epsi, sx::df, sx::fxf, sx::mz};
    case Variant::mz_dr: return {sx::vx, sx::ey, sx::epsi, sx::df, sx::dr, sx::fxf, sx::mz};
  }
  throw ConfigError("unknown variant");
}

inline Eigen::VectorXd output_of(const Eigen::VectorXd& x, Variant v) {
  const auto idx = output_state_indices(v);
  Eigen::VectorXd z(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) z[i] = x[idx[i]];
  return z;
}

// Reference vector: vx_ref in the first slot, zeros elsewhere.
inline Eigen::VectorXd output_reference(double vx_ref, Variant v) {
  Eigen::VectorXd zr = Eigen::VectorXd::Zero(dims_of(v).ny);
  zr[0] = vx_ref;
  return zr;
}

inline Eigen::VectorXd output_weight_vector(const OutputWeights& w, Variant v) {
  switch (v) {
    case Variant::bas: {
      Eigen::VectorXd q(5);
      q << w.vx, w.e_y, w.e_psi, w.delta_f, w.Fx_f;
      return q;
    }
    case Variant::mz: {
      Eigen::VectorXd q(6);
      q << w.vx, w.e_y, w.e_psi, w.delta_f, w.Fx_f, w.Mz;
      return q;
    }
    case Variant::mz_dr: {
      Eigen::VectorXd q(7);
      q << w.vx, w.e_y, w.e_psi, w.delta_f, w.delta_r, w.Fx_f, w.Mz;
      return q;
    }
  }
  throw ConfigError("unknown variant");
}

// Weighted squared output deviation plus the linear+quadratic slack penalty.
inline double stage_cost(const Eigen::VectorXd& z, const Eigen::VectorXd& z_ref,
                         const Eigen::VectorXd& weights, double slack_lin, double slack_quad,
                         double eps_Mz) {
  double c = slack_lin * eps_Mz + slack_quad * eps_Mz * eps_Mz;
  for (int i = 0; i < z.size(); ++i) {
    const double d = z[i] - z_ref[i];
    c += weights[i] * d * d;
  }
  return c;
}

// Friction-circle inequality residuals per axle; all four are >= 0 iff feasible.
struct FrictionResiduals {
  double front_lo = 0.0;
  double front_hi = 0.0;
  double rear_lo = 0.0;
  double rear_hi = 0.0;

  double min() const {
    return std::min(std::min(front_lo, front_hi), std::min(rear_lo, rear_hi));
  }
};

inline FrictionResiduals friction_constraints(double Fx_f, double Mz, double p_b,
                                              const VerticalLoads& loads, double mu_id,
                                              double tw, Variant v) {
  const double total = loads.Fz_f + loads.Fz_r;
  const double share_f = total > 0 ? loads.Fz_f / total : 0.5;
  const double share_r = 1.0 - share_f;
  const double Fx_Mz = dims_of(v).has_mz ? std::abs(Mz) * 2.0 / tw : 0.0;
  const double Fx_r = PredictionModel::rear_force(Fx_f, p_b);
  const double net_f = Fx_f - Fx_Mz * share_f;
  const double net_r = Fx_r - Fx_Mz * share_r;
  FrictionResiduals res;
  res.front_hi = mu_id * loads.Fz_f - net_f;
  res.front_lo = net_f + mu_id * loads.Fz_f;
  res.rear_hi = mu_id * loads.Fz_r - net_r;
  res.rear_lo = net_r + mu_id * loads.Fz_r;
  return res;
}

// Slack-widened DYM envelope; both residuals >= 0 iff feasible.
inline std::pair<double, double> mz_soft_constraint(double Mz, double eps_Mz, double Mz_min,
                                                    double Mz_max) {
  return {Mz - (Mz_min - eps_Mz), (Mz_max + eps_Mz) - Mz};
}

}  // namespace driftnmpc
