// Simplified Pacejka axle force model (pure lateral slip) and its slope,
// shared by the prediction model and the two-track plant.
#pragma once

#include <cmath>

#include "driftnmpc/types.hpp"

namespace driftnmpc {

// Lateral axle force [N] for slip angle alpha [rad] under vertical load Fz [N].
// Odd in alpha, |Fy| <= mu * Fz * D.
inline double axle_lateral_force(double alpha, double Fz, double mu, const AxleTyre& t) {
  if (Fz <= 0.0) return 0.0;
  const double ba = t.B * alpha;
  const double phi = ba - t.E * (ba - std::atan(ba));
  return mu * Fz * t.D * std::sin(t.C * std::atan(phi));
}

// d(Fy)/d(alpha), used by the analytic dynamics Jacobians.
inline double axle_lateral_force_dalpha(double alpha, double Fz, double mu, const AxleTyre& t) {
  if (Fz <= 0.0) return 0.0;
  const double ba = t.B * alpha;
  const double phi = ba - t.E * (ba - std::atan(ba));
  const double dphi = t.B * (1.0 - t.E * (1.0 - 1.0 / (1.0 + ba * ba)));
  const double at = std::atan(phi);
  return mu * Fz * t.D * std::cos(t.C * at) * t.C / (1.0 + phi * phi) * dphi;
}

// Same functional form reused for longitudinal slip in the plant model; the
// argument is then a slip ratio instead of a slip angle.
inline double wheel_longitudinal_force(double kappa, double Fz, double mu, const AxleTyre& t) {
  return axle_lateral_force(kappa, Fz, mu, t);
}

}  // namespace driftnmpc
