// Core domain types shared across the workbench: controller variants,
// vehicle/tyre parameters, prediction-model state and input vectors.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace driftnmpc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown by model evaluations on singular kinematics (speed below the floor,
// path-frame singularity). The solver catches these during rollouts.
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Controller variants. State/input vectors nest: bas is a prefix of mz,
// which is a prefix of mz_dr.
enum class Variant { bas, mz, mz_dr };

struct VariantDims {
  int nx;       // states
  int nu;       // inputs
  int ny;       // tracked outputs
  bool has_mz;  // Mz state + p_b, dMz, eps inputs
  bool has_dr;  // delta_r state + ddelta_r input
};

inline VariantDims dims_of(Variant v) {
  switch (v) {
    case Variant::bas:   return {8, 2, 5, false, false};
    case Variant::mz:    return {9, 5, 6, true, false};
    case Variant::mz_dr: return {10, 6, 7, true, true};
  }
  throw ConfigError("unknown variant");
}

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::bas:   return "bas";
    case Variant::mz:    return "mz";
    case Variant::mz_dr: return "mz_dr";
  }
  return "?";
}

inline Variant variant_from_name(const std::string& name) {
  if (name == "bas") return Variant::bas;
  if (name == "mz") return Variant::mz;
  if (name == "mz_dr" || name == "mz-dr") return Variant::mz_dr;
  throw ConfigError("unknown controller variant '" + name + "' (expected bas, mz or mz-dr)");
}

struct VehicleParams {
  double m = 900.0;       // mass [kg]
  double Iz = 1100.0;     // yaw inertia [kg m^2]
  double lf = 1.1;        // CG to front axle [m]
  double lr = 1.2;        // CG to rear axle [m]
  double tw = 1.4;        // track width [m]
  double hg = 0.45;       // CG height [m]
  double cd_a = 0.40;     // lumped aero drag, F = cd_a * vx^2 [N/(m/s)^2]
  double f_roll = 0.012;  // rolling resistance coefficient [-]
  double g = 9.81;        // gravity [m/s^2]

  double wheelbase() const { return lf + lr; }

  void validate() const {
    if (!(m > 0 && Iz > 0 && lf > 0 && lr > 0 && tw > 0 && hg > 0 && g > 0))
      throw ConfigError("vehicle params must be strictly positive");
    if (!(cd_a >= 0 && f_roll >= 0))
      throw ConfigError("resistance coefficients must be non-negative");
    if (!(hg < lf + lr))
      throw ConfigError("hg must be below the wheelbase");
  }
};

// Per-axle magic-formula coefficients, pure lateral slip:
//   Fy = mu * Fz * D * sin(C * atan(B*a - E*(B*a - atan(B*a))))
struct AxleTyre {
  double B = 9.0;   // stiffness factor
  double C = 1.35;  // shape factor
  double D = 1.0;   // peak factor
  double E = 0.0;   // curvature factor

  void validate() const {
    if (!(B > 0 && C > 0 && D > 0))
      throw ConfigError("tyre B, C, D must be positive");
    // E <= 1 with 0 < C < 2 keeps the slip argument monotone, giving a
    // single force peak in |alpha|.
    if (!(E <= 1.0 && C < 2.0))
      throw ConfigError("tyre shape outside single-peak region (need E <= 1, C < 2)");
  }
};

struct TyreParams {
  AxleTyre front;
  AxleTyre rear;

  void validate() const {
    front.validate();
    rear.validate();
  }
};

struct VerticalLoads {
  double Fz_f = 0.0;  // front axle [N]
  double Fz_r = 0.0;  // rear axle [N]
};

// Prediction-model state. The trailing fields are used only by the richer
// variants: Mz from mz upwards, delta_r only in mz_dr.
struct PredictionState {
  double vx = 0.0;        // [m/s]
  double vy = 0.0;        // [m/s]
  double yaw_rate = 0.0;  // [rad/s]
  double s = 0.0;         // path arclength [m]
  double e_y = 0.0;       // lateral error, +left [m]
  double e_psi = 0.0;     // heading error [rad]
  double delta_f = 0.0;   // front steer [rad]
  double Fx_f = 0.0;      // front axle longitudinal force [N]
  double Mz = 0.0;        // direct yaw moment [N m]
  double delta_r = 0.0;   // rear steer [rad]
};

// Rate-level control input. Trailing fields absent per variant (nested layout,
// same ordering as the state vector).
struct ControlInput {
  double ddelta_f = 0.0;  // [rad/s]
  double dFx_f = 0.0;     // [N/s]
  double p_b = 0.0;       // front-to-total braking split [-]
  double dMz = 0.0;       // [N m/s]
  double eps_Mz = 0.0;    // Mz slack [N m], >= 0
  double ddelta_r = 0.0;  // [rad/s]
};

struct AxleForces {
  double Fx_f = 0.0;
  double Fx_r = 0.0;
  double Fy_f = 0.0;
  double Fy_r = 0.0;
  double Fx_Mz = 0.0;  // longitudinal loss from DYM braking, >= 0
};

// Exogenous data held over one prediction horizon.
struct OnlineData {
  double ax_meas = 0.0;          // measured longitudinal acceleration [m/s^2]
  double mu = 1.0;               // tyre-road friction factor [-]
  std::vector<double> rho_ref;   // curvature preview, one entry per stage [1/m]
  double Mz_min = 0.0;           // DYM envelope [N m], ignored by bas
  double Mz_max = 0.0;

  void validate(int Hp, Variant v) const {
    if (static_cast<int>(rho_ref.size()) != Hp)
      throw ConfigError("rho_ref preview length must equal the horizon");
    if (dims_of(v).has_mz && !(Mz_min <= Mz_max))
      throw ConfigError("Mz envelope inverted");
    if (!(mu > 0)) throw ConfigError("mu must be positive");
  }
};

inline double clamp(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

inline double deg2rad(double d) { return d * M_PI / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / M_PI; }

// Wrap to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a <= 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

}  // namespace driftnmpc
