// JSON configuration: one file describes the vehicle, both tyre models, the
// controller, the safety layer, and the scenario catalogue. Files carry a
// mandatory schema tag so stale configs fail loudly.
#pragma once

#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "driftnmpc/kpi.hpp"
#include "driftnmpc/ocp.hpp"
#include "driftnmpc/path.hpp"
#include "driftnmpc/plant.hpp"
#include "driftnmpc/simulate.hpp"
#include "driftnmpc/vsc.hpp"

namespace driftnmpc {

constexpr const char* kConfigSchema = "driftnmpc-config/1";
constexpr const char* kSweepSchema = "driftnmpc-sweep/1";
constexpr const char* kKpiSchema = "driftnmpc-kpi/1";

struct ScenarioConfig {
  RouteGeometry route;
  double v_entry = 12.5;  // [m/s]
  double v_corner = 8.0;
  double v_exit = 12.5;
  double a_brake = 3.0;  // [m/s^2]
  double a_accel = 2.0;
  double corridor = 5.0;  // [m]
  double t_max = 40.0;    // [s]
};

struct AppConfig {
  VehicleParams veh;
  TyreParams tyres;  // controller-side
  PlantParams plant;
  double mu_preview = 0.85;
  OcpConfig ocp;
  AbsConfig abs;
  VscConfig vsc_nominal = VscConfig::nominal();
  VscConfig vsc_relaxed = VscConfig::relaxed();
  std::map<std::string, ScenarioConfig> scenarios;
};

namespace detail {

inline const nlohmann::json& need(const nlohmann::json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("config: missing key '" + key + "'");
  return *it;
}

inline double num(const nlohmann::json& j, const std::string& key) {
  const nlohmann::json& v = need(j, key);
  if (!v.is_number()) throw ConfigError("config: '" + key + "' must be a number");
  return v.get<double>();
}

inline AxleTyre tyre(const nlohmann::json& j) {
  AxleTyre t;
  t.B = num(j, "B");
  t.C = num(j, "C");
  t.D = num(j, "D");
  t.E = num(j, "E");
  return t;
}

}  // namespace detail

inline AppConfig parse_config(const nlohmann::json& j) {
  using detail::need;
  using detail::num;
  if (!j.contains("schema") || j["schema"] != kConfigSchema)
    throw ConfigError(std::string("config: expected schema '") + kConfigSchema + "'");

  AppConfig c;

  const auto& veh = need(j, "vehicle");
  c.veh.m = num(veh, "mass_kg");
  c.veh.Iz = num(veh, "yaw_inertia_kgm2");
  c.veh.lf = num(veh, "lf_m");
  c.veh.lr = num(veh, "lr_m");
  c.veh.tw = num(veh, "track_m");
  c.veh.hg = num(veh, "cg_height_m");
  c.veh.cd_a = num(veh, "drag_area_kgpm");
  c.veh.f_roll = num(veh, "rolling_coeff");
  c.veh.validate();

  const auto& ty = need(j, "tyres");
  c.tyres.front = detail::tyre(need(ty, "front"));
  c.tyres.rear = detail::tyre(need(ty, "rear"));
  c.tyres.validate();
  c.mu_preview = num(ty, "mu_controller");

  c.plant.veh = c.veh;
  c.plant.tyre_front = c.tyres.front;
  c.plant.tyre_rear = c.tyres.rear;
  c.plant.tyre_long = detail::tyre(need(ty, "longitudinal"));
  c.plant.mu = num(ty, "mu_plant");
  const auto& pl = need(j, "plant");
  c.plant.r_wheel = num(pl, "wheel_radius_m");
  c.plant.Iw = num(pl, "wheel_inertia_kgm2");
  c.plant.tau_steer_f = num(pl, "tau_steer_s");
  c.plant.tau_steer_r = num(pl, "tau_steer_rear_s");
  c.plant.tau_brake = num(pl, "tau_brake_s");
  c.plant.tau_drive = num(pl, "tau_drive_s");
  c.plant.xi_f = num(pl, "roll_share_front");
  c.plant.tau_accel_filter = num(pl, "accel_filter_s");
  c.plant.validate();

  const auto& ct = need(j, "controller");
  c.ocp.Hp = static_cast<int>(num(ct, "horizon"));
  c.ocp.Ts = num(ct, "dt_s");
  const auto& wj = need(ct, "weights");
  auto weights = [&](const nlohmann::json& q) {
    OutputWeights w;
    w.vx = num(q, "vx");
    w.e_y = num(q, "e_y");
    w.e_psi = num(q, "e_psi");
    w.delta_f = num(q, "delta_f");
    w.delta_r = num(q, "delta_r");
    w.Fx_f = num(q, "fx_f");
    w.Mz = num(q, "mz");
    return w;
  };
  c.ocp.stage_w = weights(need(wj, "stage"));
  c.ocp.term_w = weights(need(wj, "terminal"));
  const auto& iw = need(wj, "input");
  c.ocp.input_w.ddelta_f = num(iw, "ddelta_f");
  c.ocp.input_w.ddelta_r = num(iw, "ddelta_r");
  c.ocp.input_w.dFx_f = num(iw, "dfx_f");
  c.ocp.input_w.dMz = num(iw, "dmz");
  c.ocp.input_w.p_b = num(iw, "p_b");
  const auto& sl = need(ct, "slack");
  c.ocp.slack_lin = num(sl, "linear");
  c.ocp.slack_quad = num(sl, "quadratic");
  const auto& pen = need(ct, "penalties");
  c.ocp.pen_friction = num(pen, "friction");
  c.ocp.pen_mz_env = num(pen, "mz_envelope");
  c.ocp.pen_steer = num(pen, "steer");
  const auto& b = need(ct, "bounds");
  c.ocp.bounds.delta_f_max = deg2rad(num(b, "delta_f_max_deg"));
  c.ocp.bounds.delta_r_max = deg2rad(num(b, "delta_r_max_deg"));
  c.ocp.bounds.ddelta_f_max = deg2rad(num(b, "rate_delta_f_dps"));
  c.ocp.bounds.ddelta_r_max = deg2rad(num(b, "rate_delta_r_dps"));
  c.ocp.bounds.dFx_f_min = num(b, "fx_rate_min_nps");
  c.ocp.bounds.dFx_f_max = num(b, "fx_rate_max_nps");
  c.ocp.bounds.dMz_min = num(b, "mz_rate_min_nmps");
  c.ocp.bounds.dMz_max = num(b, "mz_rate_max_nmps");
  c.ocp.bounds.p_b_min = num(b, "p_b_min");
  c.ocp.bounds.p_b_max = num(b, "p_b_max");
  c.ocp.mu_id = num(ct, "mu_budget");
  c.ocp.fixed_p_b = num(ct, "fixed_brake_split");
  const auto& so = need(ct, "solver");
  c.ocp.max_iters = static_cast<int>(num(so, "max_iterations"));
  c.ocp.tol_step = num(so, "tol_step");
  c.ocp.tol_obj = num(so, "tol_objective");
  c.ocp.levenberg = num(so, "levenberg");
  c.ocp.validate();

  const auto& sf = need(j, "safety");
  const auto& ab = need(sf, "abs");
  c.abs.slip_target = num(ab, "slip_target");
  c.abs.slip_band = num(ab, "slip_band");
  c.abs.kp = num(ab, "kp");
  c.abs.ki = num(ab, "ki");
  c.abs.validate();
  auto vsc_common = [&](VscConfig& v) {
    const auto& vc = need(sf, "vsc");
    v.hysteresis = num(vc, "hysteresis");
    v.kp_yaw = num(vc, "kp_yaw");
    v.kp_beta = num(vc, "kp_beta");
    v.mu = c.plant.mu;
  };
  const auto& vn = need(sf, "vsc_nominal");
  c.vsc_nominal.beta_max = deg2rad(num(vn, "beta_max_deg"));
  c.vsc_nominal.yaw_err_max = num(vn, "yaw_err_max_radps");
  vsc_common(c.vsc_nominal);
  c.vsc_nominal.validate();
  const auto& vr = need(sf, "vsc_relaxed");
  c.vsc_relaxed.beta_max = deg2rad(num(vr, "beta_max_deg"));
  c.vsc_relaxed.yaw_err_max = num(vr, "yaw_err_max_radps");
  vsc_common(c.vsc_relaxed);
  c.vsc_relaxed.validate();

  for (const auto& [name, sj] : need(j, "scenarios").items()) {
    ScenarioConfig sc;
    const auto& rt = need(sj, "route");
    sc.route.entry_m = num(rt, "entry_m");
    sc.route.clothoid_m = num(rt, "clothoid_m");
    sc.route.radius_m = num(rt, "radius_m");
    sc.route.turn_deg = num(rt, "turn_deg");
    sc.route.exit_m = num(rt, "exit_m");
    sc.route.validate();
    const auto& sp = need(sj, "speed");
    sc.v_entry = num(sp, "entry_kmh") / 3.6;
    sc.v_corner = num(sp, "corner_kmh") / 3.6;
    sc.v_exit = num(sp, "exit_kmh") / 3.6;
    sc.a_brake = num(sp, "brake_decel_mps2");
    sc.a_accel = num(sp, "accel_mps2");
    sc.corridor = num(sj, "corridor_m");
    sc.t_max = num(sj, "t_max_s");
    c.scenarios.emplace(name, sc);
  }
  if (c.scenarios.empty()) throw ConfigError("config: no scenarios defined");
  return c;
}

inline AppConfig load_config(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) throw ConfigError("cannot open config file: " + filename);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

// Assembles everything a closed-loop run needs. The base controller keeps the
// stock stability envelope; the drift-capable variants run with the widened
// intervention thresholds.
inline RunSetup make_run_setup(const AppConfig& c, Variant variant, const std::string& scenario,
                               std::optional<double> delta_r_max_deg = {}) {
  auto it = c.scenarios.find(scenario);
  if (it == c.scenarios.end()) throw ConfigError("unknown scenario '" + scenario + "'");
  const ScenarioConfig& sc = it->second;

  Path path = sc.route.build();
  SpeedProfile profile(sc.v_entry, sc.v_corner, sc.v_exit, sc.a_brake, sc.a_accel,
                       sc.route.corner_start(), sc.route.corner_end());

  RunSetup setup(variant, std::move(path), std::move(profile));
  setup.veh = c.veh;
  setup.tyres = c.tyres;
  setup.ocp = c.ocp;
  if (delta_r_max_deg) setup.ocp.bounds.delta_r_max = deg2rad(*delta_r_max_deg);
  setup.plant = c.plant;
  setup.abs = c.abs;
  setup.vsc = variant == Variant::bas ? c.vsc_nominal : c.vsc_relaxed;
  setup.mu_preview = c.mu_preview;
  setup.v0 = sc.v_entry;
  setup.corridor = sc.corridor;
  setup.t_max = sc.t_max;
  return setup;
}

struct SweepEntry {
  std::string label;
  Variant variant = Variant::mz;
  std::string scenario;
  std::optional<double> delta_r_max_deg;
};

inline std::vector<SweepEntry> load_sweep(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) throw ConfigError("cannot open sweep file: " + filename);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("sweep parse error: ") + e.what());
  }
  if (!j.contains("schema") || j["schema"] != kSweepSchema)
    throw ConfigError(std::string("sweep: expected schema '") + kSweepSchema + "'");
  std::vector<SweepEntry> runs;
  for (const auto& rj : detail::need(j, "runs")) {
    SweepEntry e;
    e.label = detail::need(rj, "label").get<std::string>();
    e.variant = variant_from_name(detail::need(rj, "variant").get<std::string>());
    e.scenario = detail::need(rj, "scenario").get<std::string>();
    if (rj.contains("delta_r_max_deg") && !rj["delta_r_max_deg"].is_null())
      e.delta_r_max_deg = rj["delta_r_max_deg"].get<double>();
    runs.push_back(e);
  }
  if (runs.empty()) throw ConfigError("sweep: no runs defined");
  return runs;
}

inline nlohmann::json kpi_json(const RunResult& res, const std::string& scenario, Variant variant,
                               std::optional<double> delta_r_max_deg = {}) {
  nlohmann::ordered_json j;
  j["schema"] = kKpiSchema;
  j["scenario"] = scenario;
  j["variant"] = variant_name(variant);
  if (delta_r_max_deg)
    j["delta_r_max_deg"] = *delta_r_max_deg;
  else
    j["delta_r_max_deg"] = nullptr;
  j["outcome"] = outcome_name(res.outcome);
  j["t_end_s"] = res.t_end;
  j["s_end_m"] = res.s_end;
  j["kpis"]["e_y_abs_max_m"] = res.kpis.e_y_abs_max;
  j["kpis"]["e_y_rms_m"] = res.kpis.e_y_rms;
  j["kpis"]["e_vx_rms_kmh"] = res.kpis.e_vx_rms_kmh;
  j["kpis"]["beta_abs_max_deg"] = res.kpis.beta_abs_max_deg;
  j["kpis"]["samples"] = res.kpis.samples;
  return j;
}

inline void write_kpi_json(const std::string& filename, const nlohmann::json& j) {
  std::ofstream out(filename);
  if (!out) throw ConfigError("cannot open KPI file for writing: " + filename);
  out << j.dump(2) << "\n";
}

}  // namespace driftnmpc
