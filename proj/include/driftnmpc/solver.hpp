// Receding-horizon solver for the path-tracking OCP: Gauss-Newton SQP over a
// condensed single-shooting transcription, hard input boxes handled by a
// projected-Newton QP, state-dependent friction and DYM-envelope constraints
// as quadratic penalties with an explicit Mz slack.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "driftnmpc/ocp.hpp"
#include "driftnmpc/prediction_model.hpp"
#include "driftnmpc/types.hpp"

namespace driftnmpc {

enum class SolverStatus { converged, max_iterations, infeasible_relaxed };

inline const char* status_name(SolverStatus s) {
  switch (s) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::max_iterations: return "max_iterations";
    case SolverStatus::infeasible_relaxed: return "infeasible_relaxed";
  }
  return "?";
}

struct Solution {
  Eigen::MatrixXd X;  // optimal state trajectory, nx x (Hp+1)
  Eigen::MatrixXd U;  // optimal input sequence, nu x Hp
  ControlInput first_command;
  double objective = std::numeric_limits<double>::infinity();
  SolverStatus status = SolverStatus::infeasible_relaxed;
  int iterations = 0;
  std::vector<double> objective_history;  // objective after each accepted iterate
  bool valid = false;                     // true if X holds a finite rollout of U
};

// Minimize 0.5 d'Hd + g'd subject to lb <= d <= ub, H symmetric positive
// definite. Projected-Newton active-set iteration; deterministic.
inline Eigen::VectorXd solve_box_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                                    const Eigen::VectorXd& lb, const Eigen::VectorXd& ub,
                                    double tol = 1e-10, int max_iter = 40) {
  const int n = static_cast<int>(g.size());
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n).cwiseMax(lb).cwiseMin(ub);
  const auto quad = [&](const Eigen::VectorXd& v) {
    return 0.5 * v.dot(H * v) + g.dot(v);
  };
  double q_cur = quad(d);
  std::vector<int> free_idx;
  free_idx.reserve(n);

  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd grad = H * d + g;
    const double bnd_eps = 1e-12;
    free_idx.clear();
    double kkt = 0.0;
    for (int i = 0; i < n; ++i) {
      const bool at_lo = d[i] <= lb[i] + bnd_eps;
      const bool at_hi = d[i] >= ub[i] - bnd_eps;
      if ((at_lo && grad[i] > 0.0) || (at_hi && grad[i] < 0.0)) continue;
      free_idx.push_back(i);
      kkt = std::max(kkt, std::abs(grad[i]));
    }
    if (free_idx.empty() || kkt <= tol * (1.0 + std::abs(q_cur))) break;

    const int nf = static_cast<int>(free_idx.size());
    Eigen::MatrixXd Hf(nf, nf);
    Eigen::VectorXd gf(nf);
    for (int a = 0; a < nf; ++a) {
      gf[a] = grad[free_idx[a]];
      for (int b = 0; b < nf; ++b) Hf(a, b) = H(free_idx[a], free_idx[b]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(Hf);
    Eigen::VectorXd pf;
    if (llt.info() == Eigen::Success) {
      pf = llt.solve(-gf);
    } else {
      Hf.diagonal().array() += 1e-10 * (Hf.diagonal().maxCoeff() + 1.0);
      pf = Hf.ldlt().solve(-gf);
    }

    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < nf; ++a) p[free_idx[a]] = pf[a];

    // projected backtracking on the quadratic
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 25; ++ls) {
      Eigen::VectorXd cand = (d + alpha * p).cwiseMax(lb).cwiseMin(ub);
      const double q_new = quad(cand);
      if (q_new < q_cur - 1e-14 * (1.0 + std::abs(q_cur))) {
        d = cand;
        q_cur = q_new;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  return d;
}

class NmpcSolver {
 public:
  NmpcSolver(Variant v, const VehicleParams& vp, const TyreParams& tp, const OcpConfig& cfg)
      : model_(v, vp, tp, {cfg.vx_floor, cfg.fixed_p_b}), cfg_(cfg) {
    cfg_.validate();
    const auto& d = model_.dims();
    N_ = d.nu * cfg_.Hp;
    q_stage_ = output_weight_vector(cfg_.stage_w, v);
    q_term_ = output_weight_vector(cfg_.term_w, v);
    out_idx_ = output_state_indices(v);
    input_scale_.resize(d.nu);
    const auto scale = [](double v) { return std::max(std::abs(v), 1e-9); };
    input_scale_[su::ddf] = scale(cfg_.bounds.ddelta_f_max);
    input_scale_[su::dfxf] =
        scale(std::max(std::abs(cfg_.bounds.dFx_f_min), std::abs(cfg_.bounds.dFx_f_max)));
    if (d.has_mz) {
      input_scale_[su::pb] = 1.0;
      input_scale_[su::dmz] =
          scale(std::max(std::abs(cfg_.bounds.dMz_min), std::abs(cfg_.bounds.dMz_max)));
      input_scale_[su::eps] = 1000.0;
    }
    if (d.has_dr) input_scale_[su::ddr] = scale(cfg_.bounds.ddelta_r_max);
    D_.resize(N_);
    for (int k = 0; k < cfg_.Hp; ++k)
      for (int j = 0; j < d.nu; ++j) D_[k * d.nu + j] = input_scale_[j];
  }

  const PredictionModel& model() const { return model_; }
  const OcpConfig& config() const { return cfg_; }

  Solution solve(const PredictionState& x0s, const OnlineData& w,
                 const std::vector<double>& vx_ref, const Solution* warm = nullptr) {
    const auto& d = model_.dims();
    const int Hp = cfg_.Hp;
    w.validate(Hp, model_.variant());
    if (static_cast<int>(vx_ref.size()) != Hp + 1)
      throw ConfigError("vx_ref must have Hp+1 entries");

    const Eigen::VectorXd x0 = model_.pack_state(x0s);
    stages_.resize(Hp);
    const VerticalLoads loads = vertical_loads(w.ax_meas, model_.vehicle());
    for (int k = 0; k < Hp; ++k) stages_[k] = {w.rho_ref[k], loads, w.mu};
    env_min_ = w.Mz_min;
    env_max_ = w.Mz_max;
    vx_ref_ = &vx_ref;

    Eigen::VectorXd lb(N_), ub(N_);
    build_bounds(x0, lb, ub);

    Solution sol;
    sol.U.resize(d.nu, Hp);
    sol.X.resize(d.nx, Hp + 1);

    // initial iterate: shifted warm start, else rates-at-zero cold start
    Eigen::VectorXd U(N_);
    if (warm && warm->valid && warm->U.rows() == d.nu && warm->U.cols() == Hp) {
      for (int k = 0; k < Hp; ++k)
        U.segment(k * d.nu, d.nu) = warm->U.col(std::min(k + 1, Hp - 1));
    } else {
      warm = nullptr;
    }
    if (!warm) U = cold_start();
    U = U.cwiseMax(lb).cwiseMin(ub);

    Eigen::MatrixXd X(d.nx, Hp + 1);
    double cost = 0.0;
    bool ok = evaluate(U, x0, X, cost, false);
    if (!ok && warm) {
      U = cold_start().cwiseMax(lb).cwiseMin(ub);
      ok = evaluate(U, x0, X, cost, false);
    }
    if (!ok) {
      // no finite rollout exists from x0; hand back the clamped cold iterate
      X.colwise() = x0;
      unpack_into(sol, U, X, false);
      sol.status = SolverStatus::infeasible_relaxed;
      sol.first_command = project_first(U, lb, ub);
      return sol;
    }

    sol.objective_history.push_back(cost);
    SolverStatus status = SolverStatus::max_iterations;
    int iters = 0;

    Eigen::MatrixXd H(N_, N_);
    Eigen::VectorXd grad(N_);
    for (int it = 0; it < cfg_.max_iters; ++it) {
      iters = it + 1;
      double lin_cost = 0.0;
      if (!evaluate(U, x0, X, lin_cost, true, &H, &grad)) break;

      // precondition by the per-channel input scales so the regularization and
      // tolerances act uniformly across rad/s, N/s and N m/s coordinates
      Eigen::MatrixXd Hs = D_.asDiagonal() * H * D_.asDiagonal();
      Hs.diagonal().array() += cfg_.levenberg * (Hs.diagonal().cwiseAbs().maxCoeff() + 1.0);
      const Eigen::VectorXd gs = D_.cwiseProduct(grad);
      const Eigen::VectorXd dhat =
          solve_box_qp(Hs, gs, (lb - U).cwiseQuotient(D_), (ub - U).cwiseQuotient(D_));
      const Eigen::VectorXd step = D_.cwiseProduct(dhat);
      const double step_scale = dhat.cwiseAbs().maxCoeff();
      if (step_scale < cfg_.tol_step) {
        status = SolverStatus::converged;
        break;
      }
      const double slope = grad.dot(step);
      if (slope >= 0.0) {
        status = SolverStatus::converged;
        break;
      }

      double alpha = 1.0;
      bool accepted = false;
      Eigen::MatrixXd X_new(d.nx, Hp + 1);
      for (int ls = 0; ls < 9; ++ls) {
        const Eigen::VectorXd U_new = U + alpha * step;
        double cost_new = 0.0;
        if (evaluate(U_new, x0, X_new, cost_new, false) &&
            cost_new <= cost + 1e-4 * alpha * slope) {
          U = U_new;
          X = X_new;
          cost = cost_new;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        status = step_scale < 10.0 * cfg_.tol_step ? SolverStatus::converged
                                                   : SolverStatus::max_iterations;
        break;
      }
      sol.objective_history.push_back(cost);
      if (sol.objective_history.size() >= 2) {
        const double prev = sol.objective_history[sol.objective_history.size() - 2];
        if (prev - cost <= cfg_.tol_obj * (1.0 + std::abs(prev)) &&
            alpha * step_scale < 10.0 * cfg_.tol_step) {
          status = SolverStatus::converged;
          break;
        }
      }
    }

    unpack_into(sol, U, X, true);
    sol.objective = cost;
    sol.status = status;
    sol.iterations = iters;
    sol.first_command = project_first(U, lb, ub);
    return sol;
  }

 private:
  Eigen::VectorXd cold_start() const {
    const auto& d = model_.dims();
    Eigen::VectorXd U = Eigen::VectorXd::Zero(N_);
    if (d.has_mz)
      for (int k = 0; k < cfg_.Hp; ++k)
        U[k * d.nu + su::pb] = clamp(cfg_.fixed_p_b, cfg_.bounds.p_b_min, cfg_.bounds.p_b_max);
    return U;
  }

  // Hard input boxes; the first stage is tightened so the integrated steering
  // magnitudes respect their bounds exactly.
  void build_bounds(const Eigen::VectorXd& x0, Eigen::VectorXd& lb, Eigen::VectorXd& ub) const {
    const auto& d = model_.dims();
    const auto& b = cfg_.bounds;
    for (int k = 0; k < cfg_.Hp; ++k) {
      const int o = k * d.nu;
      lb[o + su::ddf] = -b.ddelta_f_max;
      ub[o + su::ddf] = b.ddelta_f_max;
      lb[o + su::dfxf] = b.dFx_f_min;
      ub[o + su::dfxf] = b.dFx_f_max;
      if (d.has_mz) {
        lb[o + su::pb] = b.p_b_min;
        ub[o + su::pb] = b.p_b_max;
        lb[o + su::dmz] = b.dMz_min;
        ub[o + su::dmz] = b.dMz_max;
        lb[o + su::eps] = 0.0;
        ub[o + su::eps] = 1e7;
      }
      if (d.has_dr) {
        lb[o + su::ddr] = -b.ddelta_r_max;
        ub[o + su::ddr] = b.ddelta_r_max;
      }
    }
    ub[su::ddf] = clamp((b.delta_f_max - x0[sx::df]) / cfg_.Ts, -b.ddelta_f_max, b.ddelta_f_max);
    lb[su::ddf] = clamp((-b.delta_f_max - x0[sx::df]) / cfg_.Ts, -b.ddelta_f_max, b.ddelta_f_max);
    if (d.has_dr) {
      ub[su::ddr] = clamp((b.delta_r_max - x0[sx::dr]) / cfg_.Ts, -b.ddelta_r_max, b.ddelta_r_max);
      lb[su::ddr] = clamp((-b.delta_r_max - x0[sx::dr]) / cfg_.Ts, -b.ddelta_r_max, b.ddelta_r_max);
    }
  }

  ControlInput project_first(const Eigen::VectorXd& U, const Eigen::VectorXd& lb,
                             const Eigen::VectorXd& ub) const {
    const auto& d = model_.dims();
    Eigen::VectorXd u0 = U.head(d.nu).cwiseMax(lb.head(d.nu)).cwiseMin(ub.head(d.nu));
    return model_.unpack_input(u0);
  }

  void unpack_into(Solution& sol, const Eigen::VectorXd& U, const Eigen::MatrixXd& X,
                   bool valid) const {
    const auto& d = model_.dims();
    for (int k = 0; k < cfg_.Hp; ++k) sol.U.col(k) = U.segment(k * d.nu, d.nu);
    sol.X = X;
    sol.valid = valid;
  }

  // Rollout + objective; optionally the Gauss-Newton Hessian and gradient.
  // Returns false when the rollout leaves the model's valid region.
  bool evaluate(const Eigen::VectorXd& U, const Eigen::VectorXd& x0, Eigen::MatrixXd& X,
                double& cost, bool with_derivs, Eigen::MatrixXd* H = nullptr,
                Eigen::VectorXd* g = nullptr) {
    const auto& d = model_.dims();
    const int Hp = cfg_.Hp;
    const int nu = d.nu, nx = d.nx;
    cost = 0.0;
    if (with_derivs) {
      H->setZero(N_, N_);
      g->setZero(N_);
      S_.setZero(nx, N_);
    }

    X.col(0) = x0;
    Eigen::MatrixXd Ad(nx, nx), Bd(nx, nu);
    Eigen::RowVectorXd row(N_);

    const auto add_input_cost = [&](int col, double w_in, double val) {
      if (w_in <= 0.0) return;
      cost += w_in * val * val;
      if (!with_derivs) return;
      (*g)[col] += 2.0 * w_in * val;
      (*H)(col, col) += 2.0 * w_in;
    };

    for (int k = 0; k < Hp; ++k) {
      const Eigen::VectorXd uk = U.segment(k * nu, nu);
      const int ko = k * nu;
      add_input_cost(ko + su::ddf, cfg_.input_w.ddelta_f, uk[su::ddf]);
      add_input_cost(ko + su::dfxf, cfg_.input_w.dFx_f, uk[su::dfxf]);
      if (d.has_mz) {
        add_input_cost(ko + su::dmz, cfg_.input_w.dMz, uk[su::dmz]);
        add_input_cost(ko + su::pb, cfg_.input_w.p_b, uk[su::pb] - cfg_.fixed_p_b);
      }
      if (d.has_dr) add_input_cost(ko + su::ddr, cfg_.input_w.ddelta_r, uk[su::ddr]);
      Eigen::VectorXd xn;
      try {
        if (with_derivs) {
          xn = model_.discretize_with_jacobians(X.col(k), uk, stages_[k], cfg_.Ts, Ad, Bd);
        } else {
          xn = model_.discretize(X.col(k), uk, stages_[k], cfg_.Ts);
        }
      } catch (const ModelError&) {
        return false;
      }
      if (!xn.allFinite() || !(xn[sx::vx] > cfg_.vx_floor)) return false;
      X.col(k + 1) = xn;

      const int kc = (k + 1) * nu;  // residuals at x_{k+1} reach inputs u_0..u_k
      if (with_derivs) {
        S_ = Ad * S_;
        S_.middleCols(k * nu, nu) += Bd;
      }

      const auto add_state_residual = [&](double r_val, const Eigen::VectorXd& c_x,
                                          int u_col, double c_u) {
        cost += r_val * r_val;
        if (!with_derivs) return;
        row.head(kc).noalias() = c_x.transpose() * S_.leftCols(kc);
        if (u_col >= 0) row[u_col] += c_u;
        H->topLeftCorner(kc, kc).noalias() += 2.0 * row.head(kc).transpose() * row.head(kc);
        g->head(kc).noalias() += 2.0 * r_val * row.head(kc).transpose();
      };

      // output tracking
      const Eigen::VectorXd& q = (k + 1 == Hp) ? q_term_ : q_stage_;
      const double vref = (*vx_ref_)[k + 1];
      for (size_t i = 0; i < out_idx_.size(); ++i) {
        if (q[i] <= 0.0) continue;
        const double sw = std::sqrt(q[i]);
        const double ref = (i == 0) ? vref : 0.0;
        const double r_val = sw * (X(out_idx_[i], k + 1) - ref);
        if (with_derivs) {
          cx_.setZero(nx);
          cx_[out_idx_[i]] = sw;
        }
        add_state_residual(r_val, cx_, -1, 0.0);
      }

      // steer magnitude beyond the hard-bounded first stage
      add_bound_penalty(X(sx::df, k + 1), cfg_.bounds.delta_f_max, sx::df,
                        with_derivs, add_state_residual);
      if (d.has_dr)
        add_bound_penalty(X(sx::dr, k + 1), cfg_.bounds.delta_r_max, sx::dr,
                          with_derivs, add_state_residual);

      // friction-circle penalties per axle
      add_friction_penalties(X.col(k + 1), uk, k, with_derivs, add_state_residual);

      // slacked Mz envelope + slack cost
      if (d.has_mz) {
        const double mz = X(sx::mz, k + 1);
        const double eps = uk[su::eps];
        const int eps_col = k * nu + su::eps;
        const auto [lo, hi] = mz_soft_constraint(mz, eps, env_min_, env_max_);
        const double sp = std::sqrt(cfg_.pen_mz_env);
        if (lo < 0.0) {
          // residual sp*(-lo); d(-lo)/dMz = -1, d(-lo)/deps = -1
          cx_.setZero(nx);
          cx_[sx::mz] = -sp;
          add_state_residual(sp * (-lo), cx_, eps_col, -sp);
        }
        if (hi < 0.0) {
          cx_.setZero(nx);
          cx_[sx::mz] = sp;
          add_state_residual(sp * (-hi), cx_, eps_col, -sp);
        }
        // slack penalty: linear + quadratic
        cost += cfg_.slack_lin * eps + cfg_.slack_quad * eps * eps;
        if (with_derivs) {
          (*g)[eps_col] += cfg_.slack_lin;
          const double sq = std::sqrt(cfg_.slack_quad);
          (*g)[eps_col] += 2.0 * sq * eps * sq;
          (*H)(eps_col, eps_col) += 2.0 * sq * sq;
        }
      }
    }
    return true;
  }

  template <typename AddFn>
  void add_bound_penalty(double val, double bound, int state_idx, bool with_derivs,
                         const AddFn& add) {
    const double excess = std::abs(val) - bound;
    if (excess <= 0.0) return;
    const double sp = std::sqrt(cfg_.pen_steer);
    if (with_derivs) {
      cx_.setZero(model_.dims().nx);
      cx_[state_idx] = sp * (val > 0.0 ? 1.0 : -1.0);
    }
    add(sp * excess, cx_, -1, 0.0);
  }

  template <typename AddFn>
  void add_friction_penalties(const Eigen::VectorXd& x, const Eigen::VectorXd& uk, int k,
                              bool with_derivs, const AddFn& add) {
    const auto& d = model_.dims();
    const VerticalLoads& loads = stages_[k].loads;
    const double tw = model_.vehicle().tw;
    const double p_b = model_.effective_p_b(uk);
    const double Fxf = x[sx::fxf];
    const double mz = d.has_mz ? x[sx::mz] : 0.0;

    const double total = loads.Fz_f + loads.Fz_r;
    const double share_f = total > 0 ? loads.Fz_f / total : 0.5;
    const double share_r = 1.0 - share_f;
    const double sgn_mz = mz > 0.0 ? 1.0 : (mz < 0.0 ? -1.0 : 0.0);
    const double fxmz = d.has_mz ? std::abs(mz) * 2.0 / tw : 0.0;
    const double Fxr = PredictionModel::rear_force(Fxf, p_b);
    const double dFxr_dFxf = Fxf < 0.0 ? (1.0 - p_b) / p_b : 0.0;
    const double dFxr_dpb = Fxf < 0.0 ? -Fxf / (p_b * p_b) : 0.0;

    struct Res {
      double val, d_fxf, d_mz, d_pb;
    };
    const double net_f = Fxf - fxmz * share_f;
    const double net_r = Fxr - fxmz * share_r;
    const double dnf_dmz = -share_f * 2.0 / tw * sgn_mz;
    const double dnr_dmz = -share_r * 2.0 / tw * sgn_mz;
    const Res res[4] = {
        {cfg_.mu_id * loads.Fz_f - net_f, -1.0, -dnf_dmz, 0.0},
        {net_f + cfg_.mu_id * loads.Fz_f, 1.0, dnf_dmz, 0.0},
        {cfg_.mu_id * loads.Fz_r - net_r, -dFxr_dFxf, -dnr_dmz, -dFxr_dpb},
        {net_r + cfg_.mu_id * loads.Fz_r, dFxr_dFxf, dnr_dmz, dFxr_dpb},
    };
    const double sp = std::sqrt(cfg_.pen_friction);
    const int pb_col = d.has_mz ? k * d.nu + su::pb : -1;
    for (const Res& rr : res) {
      if (rr.val >= 0.0) continue;
      if (with_derivs) {
        cx_.setZero(d.nx);
        cx_[sx::fxf] = -sp * rr.d_fxf;
        if (d.has_mz) cx_[sx::mz] = -sp * rr.d_mz;
        add(sp * (-rr.val), cx_, pb_col, -sp * rr.d_pb);
      } else {
        add(sp * (-rr.val), cx_, -1, 0.0);
      }
    }
  }

  PredictionModel model_;
  OcpConfig cfg_;
  int N_ = 0;
  Eigen::VectorXd q_stage_, q_term_;
  std::vector<int> out_idx_;
  std::vector<double> input_scale_;
  std::vector<PredictionModel::Stage> stages_;
  double env_min_ = 0.0, env_max_ = 0.0;
  const std::vector<double>* vx_ref_ = nullptr;
  Eigen::MatrixXd S_;
  Eigen::VectorXd cx_;
  Eigen::VectorXd D_;  // per-coordinate input scale, repeated per stage
};

}  // namespace driftnmpc
