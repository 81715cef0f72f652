// Closed-loop execution: NMPC at the control rate, allocation, then the
// safety layer and two-track plant at the substep rate.
#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "driftnmpc/allocation.hpp"
#include "driftnmpc/kpi.hpp"
#include "driftnmpc/path.hpp"
#include "driftnmpc/plant.hpp"
#include "driftnmpc/solver.hpp"
#include "driftnmpc/trace.hpp"
#include "driftnmpc/vsc.hpp"

namespace driftnmpc {

enum class RunOutcome { completed, dnf_offpath, dnf_stalled, dnf_timeout, solver_failure };

inline const char* outcome_name(RunOutcome o) {
  switch (o) {
    case RunOutcome::completed: return "completed";
    case RunOutcome::dnf_offpath: return "dnf_offpath";
    case RunOutcome::dnf_stalled: return "dnf_stalled";
    case RunOutcome::dnf_timeout: return "dnf_timeout";
    case RunOutcome::solver_failure: return "solver_failure";
  }
  return "unknown";
}

inline bool run_completed(RunOutcome o) { return o == RunOutcome::completed; }

struct RunSetup {
  RunSetup(Variant v, Path p, SpeedProfile sp)
      : variant(v), path(std::move(p)), profile(std::move(sp)) {}

  Variant variant;
  Path path;
  SpeedProfile profile;
  VehicleParams veh{};
  TyreParams tyres{};  // controller-side tyre model
  OcpConfig ocp{};
  PlantParams plant{};
  PlantOptions plant_opts{};
  AbsConfig abs{};
  VscConfig vsc = VscConfig::nominal();
  double mu_preview = 0.85;  // friction passed to the prediction model
  double v0 = 12.5;
  double corridor = 5.0;
  double t_max = 40.0;
  double stall_speed = 1.0;
  double stall_time = 0.5;
  double finish_margin = 0.5;
  int substeps = 40;  // plant steps per control period
};

struct RunResult {
  RunOutcome outcome = RunOutcome::dnf_timeout;
  Kpis kpis;
  double t_end = 0.0;
  double s_end = 0.0;
  std::vector<TraceSample> trace;

  int exit_code() const {
    if (outcome == RunOutcome::completed) return 0;
    if (outcome == RunOutcome::solver_failure) return 3;
    return 2;
  }
};

inline RunResult run_closed_loop(const RunSetup& setup) {
  const VariantDims dims = dims_of(setup.variant);
  NmpcSolver solver(setup.variant, setup.veh, setup.tyres, setup.ocp);
  TwoTrackPlant plant(setup.plant, setup.plant_opts);
  AbsController abs(setup.abs);
  VscSupervisor vsc(setup.vsc);

  const PathPoint start = setup.path.at(0.0);
  plant.reset(start.X, start.Y, start.theta, setup.v0);

  const OcpConfig& ocp = solver.config();
  const double Ts = ocp.Ts;
  const double dt_sub = Ts / setup.substeps;

  RunResult res;
  res.outcome = RunOutcome::dnf_timeout;

  // controller-side command integrators, mirrored by the prediction state
  double delta_f_cmd = 0.0, delta_r_cmd = 0.0, Fx_f_cmd = 0.0, Mz_cmd = 0.0;
  double p_b_cmd = ocp.fixed_p_b;

  // stage-1 axle prediction feeding the next envelope
  double fx_f_pred = 0.0, p_b_pred = ocp.fixed_p_b;

  Solution warm;
  bool have_warm = false;
  double stall_clock = 0.0;
  double s_hint = 0.0;
  double t = 0.0;

  const int max_steps = static_cast<int>(std::ceil(setup.t_max / Ts));
  for (int step = 0; step < max_steps; ++step) {
    const auto& xp = plant.state();
    const auto proj = setup.path.project(xp[px::X], xp[px::Y], xp[px::psi],
                                         step == 0 ? std::optional<double>{} : s_hint,
                                         setup.corridor);
    if (!proj) {
      res.outcome = RunOutcome::dnf_offpath;
      break;
    }
    s_hint = proj->s;
    res.s_end = proj->s;
    res.t_end = t;

    if (proj->s >= setup.path.length() - setup.finish_margin) {
      res.outcome = RunOutcome::completed;
      break;
    }

    const double vx_p = xp[px::vx];
    if (vx_p < setup.stall_speed) {
      stall_clock += Ts;
      if (stall_clock >= setup.stall_time || vx_p <= ocp.vx_floor + 0.1) {
        res.outcome = RunOutcome::dnf_stalled;
        break;
      }
    } else {
      stall_clock = 0.0;
    }

    PredictionState x0;
    x0.vx = vx_p;
    x0.vy = xp[px::vy];
    x0.yaw_rate = xp[px::r];
    x0.s = proj->s;
    x0.e_y = proj->e_y;
    x0.e_psi = proj->e_psi;
    x0.delta_f = delta_f_cmd;
    x0.Fx_f = Fx_f_cmd;
    x0.Mz = Mz_cmd;
    x0.delta_r = delta_r_cmd;

    const double ax_meas = plant.ax_filtered();
    const double ay_meas = plant.ay_filtered();
    const WheelLoads loads_est = wheel_vertical_loads(ax_meas, ay_meas, setup.veh, setup.plant.xi_f);

    OnlineData w;
    w.ax_meas = ax_meas;
    w.mu = setup.mu_preview;
    w.rho_ref.resize(ocp.Hp);
    std::vector<double> vx_ref(ocp.Hp + 1);
    for (int k = 0; k <= ocp.Hp; ++k) {
      const double sk = proj->s + vx_p * Ts * k;
      if (k < ocp.Hp) w.rho_ref[k] = setup.path.curvature(sk);
      vx_ref[k] = setup.profile(sk);
    }
    if (dims.has_mz) {
      const MzEnvelope env = mz_envelope(fx_f_pred, p_b_pred, loads_est, setup.mu_preview, setup.veh);
      w.Mz_min = env.Mz_min;
      w.Mz_max = env.Mz_max;
    }

    const Solution sol = solver.solve(x0, w, vx_ref, have_warm ? &warm : nullptr);
    if (!sol.valid) {
      res.outcome = RunOutcome::solver_failure;
      break;
    }
    warm = sol;
    have_warm = true;
    if (dims.has_mz) {
      fx_f_pred = sol.X(sx::fxf, 1);
      p_b_pred = sol.U(su::pb, 0);
    } else {
      fx_f_pred = sol.X(sx::fxf, 1);
      p_b_pred = ocp.fixed_p_b;
    }

    const ControlInput& u0 = sol.first_command;
    delta_f_cmd = clamp(delta_f_cmd + Ts * u0.ddelta_f, -ocp.bounds.delta_f_max,
                        ocp.bounds.delta_f_max);
    Fx_f_cmd += Ts * u0.dFx_f;
    if (dims.has_mz) {
      Mz_cmd += Ts * u0.dMz;
      p_b_cmd = u0.p_b;
    }
    if (dims.has_dr)
      delta_r_cmd = clamp(delta_r_cmd + Ts * u0.ddelta_r, -ocp.bounds.delta_r_max,
                          ocp.bounds.delta_r_max);

    AllocationCommand ac;
    ac.delta_f = delta_f_cmd;
    ac.delta_r = delta_r_cmd;
    ac.Fx_f = Fx_f_cmd;
    ac.p_b = p_b_cmd;
    ac.Mz = Mz_cmd;
    const ActuatorTargets targets = allocate(ac, loads_est, setup.mu_preview, setup.veh,
                                             setup.plant.r_wheel);

    TraceSample a;
    a.t = t;
    a.X = xp[px::X];
    a.Y = xp[px::Y];
    a.psi = xp[px::psi];
    a.vx = vx_p;
    a.vy = xp[px::vy];
    a.r = xp[px::r];
    a.beta = plant.beta();
    a.s = proj->s;
    a.e_y = proj->e_y;
    a.e_psi = proj->e_psi;
    a.vx_ref = setup.profile(proj->s);
    a.kappa = proj->kappa;
    a.delta_f_cmd = delta_f_cmd;
    a.delta_r_cmd = delta_r_cmd;
    a.Fx_f_cmd = Fx_f_cmd;
    a.Mz_cmd = Mz_cmd;
    a.p_b = p_b_cmd;
    a.eps_mz = u0.eps_Mz;
    a.ddelta_f = u0.ddelta_f;
    a.ddelta_r = u0.ddelta_r;
    a.dFx_f = u0.dFx_f;
    a.dMz = u0.dMz;
    a.Mz_min = w.Mz_min;
    a.Mz_max = w.Mz_max;
    a.solver_status = static_cast<int>(sol.status);
    a.sqp_iterations = sol.iterations;
    a.objective = sol.objective;
    const VerticalLoads axle_loads = vertical_loads(ax_meas, setup.veh);
    a.friction_margin = friction_constraints(Fx_f_cmd, Mz_cmd, p_b_cmd, axle_loads,
                                             ocp.mu_id, setup.veh.tw, setup.variant)
                            .min();
    a.slip = plant.braking_slip();

    double vsc_mz_acc = 0.0;
    int vsc_active = 0, abs_mask = 0;
    const double r_ref_vsc = vx_p * proj->kappa;
    for (int i = 0; i < setup.substeps; ++i) {
      const auto corr = vsc.update(plant.state()[px::r], r_ref_vsc, plant.beta(), plant.loads(),
                                   setup.plant.r_wheel, setup.veh);
      ActuatorTargets sub = targets;
      if (corr.active) {
        vsc_active = 1;
        vsc_mz_acc = corr.Mz;
        for (int wi = 0; wi < 4; ++wi) sub.brake_torque[wi] += corr.brake_torque[wi];
      }
      const Wheel4 slips = plant.braking_slip();
      std::array<bool, 4> braking;
      for (int wi = 0; wi < 4; ++wi) braking[wi] = sub.brake_torque[wi] > 1e-6;
      PlantCommand pc = PlantCommand::from_targets(sub);
      pc.abs_scale = abs.update(slips, braking, dt_sub);
      plant.step(pc, dt_sub);
      for (int wi = 0; wi < 4; ++wi)
        if (abs.engaged(wi)) abs_mask |= 1 << wi;
    }
    a.abs_engaged = abs_mask;
    a.vsc_active = vsc_active;
    a.vsc_mz = vsc_mz_acc;
    res.trace.push_back(a);

    t += Ts;
    res.t_end = t;
  }

  res.kpis = compute_kpis(res.trace);
  return res;
}

}  // namespace driftnmpc
