#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bearsim/bearing.hpp"
#include "bearsim/controller.hpp"
#include "bearsim/el_model.hpp"
#include "bearsim/errors.hpp"
#include "bearsim/graph.hpp"
#include "bearsim/leader.hpp"
#include "bearsim/matrix_equations.hpp"
#include "bearsim/observer.hpp"
#include "bearsim/rng.hpp"
#include "bearsim/scenario.hpp"

namespace bearsim {

/// Classical RK4 step for a generic vector field f(x, t).
template <class Rhs>
Eigen::VectorXd rk4_step(Rhs&& f, const Eigen::VectorXd& x, double t, double dt) {
  const Eigen::VectorXd k1 = f(x, t);
  const Eigen::VectorXd k2 = f(x + 0.5 * dt * k1, t + 0.5 * dt);
  const Eigen::VectorXd k3 = f(x + 0.5 * dt * k2, t + 0.5 * dt);
  const Eigen::VectorXd k4 = f(x + dt * k3, t + dt);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Stacked simulation state. Follower blocks are ordered by agent index;
/// the flat integration vector is [q_f | qdot_f | eta_hat_f | theta_hat_f]
/// (this offset map is part of the CSV contract). The leader pair
/// (eta, q_l) advances by closed form, never by the integrator.
struct ClosedLoopState {
  double t = 0.0;
  Eigen::VectorXd q_f;
  Eigen::VectorXd qdot_f;
  Eigen::VectorXd eta_hat_f;
  Eigen::VectorXd theta_hat_f;
  Eigen::VectorXd eta;
  Eigen::VectorXd q_l;
};

struct MaterializedInit {
  Eigen::VectorXd eta_tilde0, s0, theta_tilde0, q_tilde0;  // seeded draws
  Eigen::VectorXd q_f0, qdot_f0, eta_hat0, theta_hat0;     // realized state
};

/// Immutable per-scenario derived data: graph products, bearing Laplacian,
/// target formation, observer synthesis, Lyapunov certificates, resolved
/// gains and models. Safe to share across concurrent runs.
struct SimulationSetup {
  Scenario scenario;
  std::shared_ptr<const GraphTopology> graph;
  std::shared_ptr<const BearingSet> bearings;
  BearingLaplacian B;
  LocalizabilityCertificate localizability;
  LeaderModel leader;
  bool detectable = false;
  bool exosystem_bounded = false;
  ObserverConfig observer;
  Eigen::MatrixXd S_f;
  std::optional<Eigen::MatrixXd> P_f;  // Lyapunov solution for S_f, when Hurwitz
  double lambda_min_Pf = 0.0;
  std::vector<std::shared_ptr<const ElModel>> models;  // one per follower
  Eigen::MatrixXd lambda_s;                            // d x d, per follower
  Eigen::MatrixXd lambda_theta;                        // r x r, per follower
  Eigen::MatrixXd lambda_theta_inv;
  Eigen::VectorXd theta_true;  // stacked over followers
  Eigen::VectorXd q_f_star0;   // target followers at t = 0

  int n = 0, n_l = 0, n_f = 0, d = 0, w = 0, r = 0;

  int state_size() const { return n_f * (2 * d + w + r); }
};

inline SimulationSetup make_setup(const Scenario& sc) {
  SimulationSetup su;
  su.scenario = sc;

  if (sc.agents < 3) throw ValidationError(sc.name + ": need at least 3 agents");
  if (sc.dim < 2) throw ValidationError(sc.name + ": ambient dimension must be >= 2");
  su.graph = std::make_shared<GraphTopology>(sc.agents, sc.leaders, sc.edges);
  su.n = sc.agents;
  su.n_l = sc.leaders;
  su.n_f = sc.agents - sc.leaders;
  su.d = sc.dim;

  auto bearings = std::make_shared<BearingSet>(sc.dim);
  for (const BearingEntry& be : sc.bearings) {
    bool is_edge = false;
    for (const auto& [i, j] : su.graph->edges()) {
      if ((i == be.i && j == be.j) || (i == be.j && j == be.i)) {
        is_edge = true;
        break;
      }
    }
    if (!is_edge) {
      throw ValidationError(sc.name + ": bearing (" + std::to_string(be.i) + "," +
                            std::to_string(be.j) + ") does not match any edge");
    }
    bearings->insert(be.i, be.j, be.g);
  }
  su.bearings = std::move(bearings);
  su.B = bearing_laplacian(*su.graph, *su.bearings);
  su.localizability = certify_localizability(su.B, *su.graph);

  if (sc.S.rows() != sc.S.cols()) throw ValidationError(sc.name + ": S must be square");
  if (sc.F.rows() != sc.dim || sc.F.cols() != sc.S.rows()) {
    throw ValidationError(sc.name + ": F must be d x w");
  }
  if (sc.eta0.size() != sc.S.rows()) throw ValidationError(sc.name + ": eta0 size mismatch");
  if (sc.q_l0.size() != sc.leaders * sc.dim) {
    throw ValidationError(sc.name + ": leader positions size mismatch");
  }
  su.leader = LeaderModel{sc.S, sc.F, sc.eta0, sc.q_l0};
  su.w = static_cast<int>(sc.S.rows());
  su.detectable = check_detectability(sc.S, sc.F);
  su.exosystem_bounded = certify_bounded_exosystem(sc.S);

  for (int k = 0; k < su.n_f; ++k) {
    if (sc.model == "planar_2dof") {
      su.models.push_back(planar_2dof_model());
    } else {
      throw ValidationError(sc.name + ": unknown follower model '" + sc.model + "'");
    }
    if (su.models.back()->dim() != su.d) {
      throw ValidationError(sc.name + ": follower model dimension != ambient dimension");
    }
  }
  su.r = su.models.front()->param_count();
  su.theta_true.resize(su.n_f * su.r);
  for (int k = 0; k < su.n_f; ++k) {
    su.theta_true.segment(k * su.r, su.r) = su.models[k]->true_params();
  }

  su.lambda_s = sc.lambda_s_matrix
                    ? *sc.lambda_s_matrix
                    : Eigen::MatrixXd(sc.lambda_s_scalar.value_or(5.0) *
                                      Eigen::MatrixXd::Identity(su.d, su.d));
  su.lambda_theta = sc.lambda_theta_matrix
                        ? *sc.lambda_theta_matrix
                        : Eigen::MatrixXd(sc.lambda_theta_scalar.value_or(10.0) *
                                          Eigen::MatrixXd::Identity(su.r, su.r));
  if (su.lambda_s.rows() != su.d || su.lambda_s.cols() != su.d) {
    throw ValidationError(sc.name + ": lambda_s must be d x d");
  }
  if (su.lambda_theta.rows() != su.r || su.lambda_theta.cols() != su.r) {
    throw ValidationError(sc.name + ": lambda_theta must be r x r");
  }
  ControllerGains{su.lambda_s, su.lambda_theta}.validate();
  su.lambda_theta_inv = su.lambda_theta.llt().solve(
      Eigen::MatrixXd::Identity(su.r, su.r));

  if (sc.dt <= 0.0) throw ValidationError(sc.name + ": dt must be positive");
  if (sc.horizon <= 0.0) throw ValidationError(sc.name + ": horizon must be positive");
  if (sc.log_stride < 1) throw ValidationError(sc.name + ": log_stride must be >= 1");

  su.observer = synthesize_observer(*su.graph, su.leader, sc.gamma);
  su.S_f = observer_error_dynamics_matrix(su.observer, *su.graph, su.leader);
  if (su.observer.sf_hurwitz) {
    su.P_f = solve_lyapunov(su.S_f, Eigen::MatrixXd::Identity(su.S_f.rows(), su.S_f.cols()));
    su.lambda_min_Pf = lambda_min_symmetric(*su.P_f);
  }

  if (su.localizability.localizable) {
    su.q_f_star0 = target_followers(su.B, sc.q_l0);
  }

  const auto check_size = [&](const std::optional<Eigen::VectorXd>& v, int sz,
                              const char* what) {
    if (v && v->size() != sz) {
      throw ValidationError(sc.name + ": explicit " + what + " has wrong size");
    }
  };
  check_size(sc.q_f0, su.n_f * su.d, "q_f0");
  check_size(sc.qdot_f0, su.n_f * su.d, "qdot_f0");
  check_size(sc.eta_hat0, su.n_f * su.w, "eta_hat0");
  check_size(sc.theta_hat0, su.n_f * su.r, "theta_hat0");
  return su;
}

/// Stacked positions/velocities over all agents (leaders first) at the given
/// leader state; follower blocks come from the integration state.
inline void stack_agent_fields(const SimulationSetup& su, const Eigen::VectorXd& q_f,
                               const Eigen::VectorXd& qdot_f, const Eigen::VectorXd& eta,
                               const Eigen::VectorXd& q_l, Eigen::VectorXd& q_all,
                               Eigen::VectorXd& qdot_all) {
  const int d = su.d;
  const Eigen::VectorXd v_c = su.leader.F * eta;
  q_all.resize(su.n * d);
  qdot_all.resize(su.n * d);
  q_all.head(su.n_l * d) = q_l;
  q_all.tail(su.n_f * d) = q_f;
  for (int k = 0; k < su.n_l; ++k) qdot_all.segment(k * d, d) = v_c;
  qdot_all.tail(su.n_f * d) = qdot_f;
}

/// Full coupled vector field over the flat state [q_f|qdot_f|eta_hat|theta_hat]
/// at a given leader state. Optionally reports the per-follower torques and
/// sliding variables evaluated on the way.
inline Eigen::VectorXd coupled_rhs(const SimulationSetup& su, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& eta, const Eigen::VectorXd& q_l,
                                   Eigen::VectorXd* tau_out = nullptr,
                                   Eigen::VectorXd* s_out = nullptr) {
  const int d = su.d, w = su.w, r = su.r, nf = su.n_f, nl = su.n_l;
  const auto q_f = x.segment(0, nf * d);
  const auto qdot_f = x.segment(nf * d, nf * d);
  const auto eta_hat = x.segment(2 * nf * d, nf * w);
  const auto theta_hat = x.segment(2 * nf * d + nf * w, nf * r);

  const Eigen::VectorXd eta_hat_dot =
      observer_rhs(su.observer, *su.graph, su.leader, eta_hat, eta);

  Eigen::VectorXd q_all, qdot_all;
  stack_agent_fields(su, q_f, qdot_f, eta, q_l, q_all, qdot_all);

  Eigen::VectorXd out(x.size());
  out.segment(0, nf * d) = qdot_f;
  if (tau_out) tau_out->resize(nf * d);
  if (s_out) s_out->resize(nf * d);

  for (int k = 0; k < nf; ++k) {
    const int agent = nl + k + 1;
    const AuxiliarySignals aux = auxiliary_signals(
        *su.graph, *su.bearings, su.leader.F, agent, q_all, qdot_all,
        eta_hat.segment(k * w, w), eta_hat_dot.segment(k * w, w));
    const ElModel& model = *su.models[k];
    const Eigen::VectorXd q_i = q_f.segment(k * d, d);
    const Eigen::VectorXd qd_i = qdot_f.segment(k * d, d);
    const Eigen::MatrixXd Y = model.regressor(q_i, qd_i, aux.zeta, aux.zeta_dot);
    const Eigen::VectorXd tau =
        control_torque(Y, theta_hat.segment(k * r, r), su.lambda_s, aux.s);
    out.segment(nf * d + k * d, d) = forward_dynamics(model, q_i, qd_i, tau);
    out.segment(2 * nf * d + nf * w + k * r, r) =
        adaptation_rhs(Y, su.lambda_theta, aux.s);
    if (tau_out) tau_out->segment(k * d, d) = tau;
    if (s_out) s_out->segment(k * d, d) = aux.s;
  }
  out.segment(2 * nf * d, nf * w) = eta_hat_dot;
  return out;
}

inline Eigen::VectorXd flatten_state(const ClosedLoopState& st) {
  Eigen::VectorXd x(st.q_f.size() + st.qdot_f.size() + st.eta_hat_f.size() +
                    st.theta_hat_f.size());
  x << st.q_f, st.qdot_f, st.eta_hat_f, st.theta_hat_f;
  return x;
}

inline void check_finite(const Eigen::VectorXd& x, double t) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || std::abs(x[i]) > 1e12) {
      throw NumericalBlowup("state component " + std::to_string(i) + " = " +
                            std::to_string(x[i]) + " at t = " + std::to_string(t));
    }
  }
}

namespace engine_detail {

inline ClosedLoopState step_with_transitions(const ClosedLoopState& st, double dt,
                                             const SimulationSetup& su,
                                             const LeaderTransition& half,
                                             const LeaderTransition& full) {
  const Eigen::VectorXd x = flatten_state(st);
  const int d = su.d, nl = su.n_l;

  auto shift_leaders = [&](const Eigen::VectorXd& q_l, const Eigen::VectorXd& delta) {
    Eigen::VectorXd out = q_l;
    for (int k = 0; k < nl; ++k) out.segment(k * d, d) += delta;
    return out;
  };
  const Eigen::VectorXd eta_h = half.state * st.eta;
  const Eigen::VectorXd ql_h = shift_leaders(st.q_l, half.displacement * st.eta);
  const Eigen::VectorXd eta_n = full.state * st.eta;
  const Eigen::VectorXd ql_n = shift_leaders(st.q_l, full.displacement * st.eta);

  const Eigen::VectorXd k1 = coupled_rhs(su, x, st.eta, st.q_l);
  const Eigen::VectorXd k2 = coupled_rhs(su, x + 0.5 * dt * k1, eta_h, ql_h);
  const Eigen::VectorXd k3 = coupled_rhs(su, x + 0.5 * dt * k2, eta_h, ql_h);
  const Eigen::VectorXd k4 = coupled_rhs(su, x + dt * k3, eta_n, ql_n);
  Eigen::VectorXd xn = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  check_finite(xn, st.t + dt);

  ClosedLoopState out;
  out.t = st.t + dt;
  const int nf = su.n_f, w = su.w, r = su.r;
  out.q_f = xn.segment(0, nf * d);
  out.qdot_f = xn.segment(nf * d, nf * d);
  out.eta_hat_f = xn.segment(2 * nf * d, nf * w);
  out.theta_hat_f = xn.segment(2 * nf * d + nf * w, nf * r);
  out.eta = eta_n;
  out.q_l = ql_n;
  return out;
}

}  // namespace engine_detail

/// One deterministic RK4 step of the coupled system; the leader pair is
/// advanced by its exact flow and supplies the stage values.
inline ClosedLoopState step(const ClosedLoopState& st, double dt, const SimulationSetup& su) {
  if (dt <= 0.0) throw ValidationError("step: dt must be positive");
  return engine_detail::step_with_transitions(st, dt, su, leader_transition(su.leader, dt / 2),
                                              leader_transition(su.leader, dt));
}

/// Seeded initial conditions. All randomness flows from one SplitMix64
/// stream in the fixed draw order eta_tilde, s, theta_tilde, q_tilde;
/// explicit vectors in the scenario replace the corresponding realized
/// quantity without disturbing the stream.
inline MaterializedInit materialize_init(const SimulationSetup& su) {
  const Scenario& sc = su.scenario;
  SplitMix64 rng(sc.seed);
  MaterializedInit init;
  init.eta_tilde0 = rng.centered_uniform(su.n_f * su.w, sc.eta_tilde_scale);
  init.s0 = rng.centered_uniform(su.n_f * su.d, sc.s_scale);
  init.theta_tilde0 = rng.centered_uniform(su.n_f * su.r, sc.theta_tilde_scale);
  init.q_tilde0 = rng.centered_uniform(su.n_f * su.d, sc.q_tilde_scale);

  if (!su.localizability.localizable && !sc.q_f0) {
    throw NotLocalizable(sc.name +
                         ": cannot place followers near targets (not localizable); "
                         "provide explicit q_f0");
  }
  init.q_f0 = sc.q_f0 ? *sc.q_f0 : Eigen::VectorXd(su.q_f_star0 + init.q_tilde0);
  Eigen::VectorXd eta_rep(su.n_f * su.w);
  for (int k = 0; k < su.n_f; ++k) eta_rep.segment(k * su.w, su.w) = su.leader.eta0;
  init.eta_hat0 = sc.eta_hat0 ? *sc.eta_hat0 : Eigen::VectorXd(eta_rep + init.eta_tilde0);
  init.theta_hat0 =
      sc.theta_hat0 ? *sc.theta_hat0 : Eigen::VectorXd(su.theta_true + init.theta_tilde0);

  // qdot is derived from the drawn sliding variable: qdot = zeta(0) + s(0)
  Eigen::VectorXd q_all, qdot_all;
  stack_agent_fields(su, init.q_f0, Eigen::VectorXd::Zero(su.n_f * su.d), su.leader.eta0,
                     sc.q_l0, q_all, qdot_all);
  Eigen::VectorXd zeta0(su.n_f * su.d);
  for (int k = 0; k < su.n_f; ++k) {
    // zeta does not depend on follower velocities, so the zero placeholder
    // in qdot_all is immaterial here
    const AuxiliarySignals aux = auxiliary_signals(
        *su.graph, *su.bearings, su.leader.F, su.n_l + k + 1, q_all, qdot_all,
        init.eta_hat0.segment(k * su.w, su.w), Eigen::VectorXd::Zero(su.w));
    zeta0.segment(k * su.d, su.d) = aux.zeta;
  }
  init.qdot_f0 = sc.qdot_f0 ? *sc.qdot_f0 : Eigen::VectorXd(zeta0 + init.s0);
  return init;
}

inline ClosedLoopState initial_state(const SimulationSetup& su) {
  const MaterializedInit init = materialize_init(su);
  ClosedLoopState st;
  st.t = 0.0;
  st.q_f = init.q_f0;
  st.qdot_f = init.qdot_f0;
  st.eta_hat_f = init.eta_hat0;
  st.theta_hat_f = init.theta_hat0;
  st.eta = su.leader.eta0;
  st.q_l = su.scenario.q_l0;
  return st;
}

struct ErrorViews {
  Eigen::VectorXd q_tilde_f;
  Eigen::VectorXd s_f;
  Eigen::VectorXd eta_tilde_f;
  Eigen::VectorXd theta_tilde_f;
  Eigen::VectorXd v_tilde_f;  // (I kron F) eta_tilde
  Eigen::VectorXd d_f;        // s_f + v_tilde_f
  double V1 = 0.0;
  double V2 = 0.0;
};

/// Ground-truth error quantities (need theta_true and the exact leader
/// state; available to the simulator, never to controllers). The target
/// formation translates rigidly, so targets at time t are the t=0 targets
/// shifted by the closed-form common displacement.
inline ErrorViews error_views(const ClosedLoopState& st, const SimulationSetup& su) {
  ErrorViews ev;
  const int d = su.d, w = su.w, nf = su.n_f;
  const Eigen::VectorXd delta = leader_displacement(su.leader, st.t);
  ev.q_tilde_f.resize(nf * d);
  for (int k = 0; k < nf; ++k) {
    ev.q_tilde_f.segment(k * d, d) =
        st.q_f.segment(k * d, d) - su.q_f_star0.segment(k * d, d) - delta;
  }
  Eigen::VectorXd eta_rep(nf * w);
  for (int k = 0; k < nf; ++k) eta_rep.segment(k * w, w) = st.eta;
  ev.eta_tilde_f = st.eta_hat_f - eta_rep;
  ev.theta_tilde_f = st.theta_hat_f - su.theta_true;
  ev.v_tilde_f.resize(nf * d);
  for (int k = 0; k < nf; ++k) {
    ev.v_tilde_f.segment(k * d, d) = su.leader.F * ev.eta_tilde_f.segment(k * w, w);
  }

  const Eigen::VectorXd x = flatten_state(st);
  Eigen::VectorXd tau;
  coupled_rhs(su, x, st.eta, st.q_l, &tau, &ev.s_f);
  ev.d_f = ev.s_f + ev.v_tilde_f;

  double v1 = 0.0;
  for (int k = 0; k < nf; ++k) {
    const Eigen::VectorXd s_i = ev.s_f.segment(k * d, d);
    const Eigen::VectorXd th_i = ev.theta_tilde_f.segment(k * su.r, su.r);
    v1 += s_i.dot(su.models[k]->inertia(st.q_f.segment(k * d, d)) * s_i);
    v1 += th_i.dot(su.lambda_theta_inv * th_i);
  }
  ev.V1 = v1;
  ev.V2 = su.P_f ? ev.eta_tilde_f.dot(*su.P_f * ev.eta_tilde_f)
                 : std::numeric_limits<double>::quiet_NaN();
  return ev;
}

inline double min_pairwise_distance(const SimulationSetup& su, const Eigen::VectorXd& q_l,
                                    const Eigen::VectorXd& q_f) {
  const int d = su.d;
  Eigen::VectorXd q(su.n * d);
  q.head(su.n_l * d) = q_l;
  q.tail(su.n_f * d) = q_f;
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < su.n; ++a) {
    for (int b = a + 1; b < su.n; ++b) {
      best = std::min(best, (q.segment(a * d, d) - q.segment(b * d, d)).norm());
    }
  }
  return best;
}

struct LogSample {
  double t = 0.0;
  Eigen::VectorXd q_all;      // leaders then followers
  Eigen::VectorXd qdot_all;   // leader velocity = v_c
  Eigen::VectorXd s_f;
  Eigen::VectorXd tau_f;      // applied torques
  Eigen::VectorXd v_hat_f;    // exchanged velocity estimates
  double q_tilde_norm = 0.0;
  double eta_tilde_norm = 0.0;
  double theta_tilde_norm = 0.0;
  double V1 = 0.0;
  double V2 = 0.0;
  double min_dist = 0.0;
};

struct TrajectoryLog {
  double dt = 0.0;
  int stride = 1;
  std::vector<LogSample> samples;
};

struct SummaryReport {
  double horizon = 0.0;
  double dt = 0.0;
  long steps = 0;
  double terminal_q_tilde_norm = 0.0;
  double terminal_s_norm = 0.0;
  double terminal_eta_tilde_norm = 0.0;
  double terminal_theta_tilde_norm = 0.0;
  double min_distance = 0.0;
  double max_s_norm = 0.0;
  double max_v_tilde_norm = 0.0;
  int v1_violations = 0;  // beyond 1e-7 * interval slack
  int v2_violations = 0;
  double V1_initial = 0.0;
  double V2_initial = 0.0;
};

struct RunResult {
  TrajectoryLog log;
  SummaryReport summary;
  MaterializedInit init;
};

/// Names the first failed prerequisite, if any: localizability,
/// detectability, exosystem boundedness, reachability, observer gain
/// condition. The initial-condition safety certificate is reported
/// separately and never gates a run.
inline std::string failed_certificate(const SimulationSetup& su) {
  if (!su.localizability.localizable) return "localizability (lambda_min(B_ff) too small)";
  if (!su.detectable) return "detectability of (S, F)";
  if (!su.exosystem_bounded) return "bounded leader exosystem";
  if (!su.localizability.followers_reachable) return "follower reachability from leaders";
  if (!su.observer.condition_ok) return "observer gain condition 2 lambda_min(L_ff) gamma > 1";
  if (!su.observer.sf_hurwitz) return "Hurwitz certificate for S_f";
  return "";
}

inline LogSample make_sample(const ClosedLoopState& st, const SimulationSetup& su) {
  LogSample smp;
  smp.t = st.t;
  stack_agent_fields(su, st.q_f, st.qdot_f, st.eta, st.q_l, smp.q_all, smp.qdot_all);
  const ErrorViews ev = error_views(st, su);
  const Eigen::VectorXd x = flatten_state(st);
  Eigen::VectorXd s;
  coupled_rhs(su, x, st.eta, st.q_l, &smp.tau_f, &s);
  smp.s_f = s;
  smp.v_hat_f.resize(su.n_f * su.d);
  for (int k = 0; k < su.n_f; ++k) {
    smp.v_hat_f.segment(k * su.d, su.d) =
        su.leader.F * st.eta_hat_f.segment(k * su.w, su.w);
  }
  smp.q_tilde_norm = ev.q_tilde_f.norm();
  smp.eta_tilde_norm = ev.eta_tilde_f.norm();
  smp.theta_tilde_norm = ev.theta_tilde_f.norm();
  smp.V1 = ev.V1;
  smp.V2 = ev.V2;
  smp.min_dist = min_pairwise_distance(su, st.q_l, st.q_f);
  return smp;
}

/// Integrates the closed loop over [0, horizon] with fixed step dt, logging
/// every log_stride-th step (plus the final state). Deterministic for a
/// given scenario: same seed, same bytes.
inline RunResult run(const SimulationSetup& su, bool force = false) {
  const std::string failed = failed_certificate(su);
  if (!failed.empty() && !force) {
    throw CertificateFailure("run: failed certificate: " + failed);
  }

  RunResult rr;
  rr.init = materialize_init(su);
  ClosedLoopState st;
  st.t = 0.0;
  st.q_f = rr.init.q_f0;
  st.qdot_f = rr.init.qdot_f0;
  st.eta_hat_f = rr.init.eta_hat0;
  st.theta_hat_f = rr.init.theta_hat0;
  st.eta = su.leader.eta0;
  st.q_l = su.scenario.q_l0;

  const double dt = su.scenario.dt;
  const long steps = std::lround(su.scenario.horizon / dt);
  const int stride = su.scenario.log_stride;
  const LeaderTransition half = leader_transition(su.leader, dt / 2);
  const LeaderTransition full = leader_transition(su.leader, dt);

  rr.log.dt = dt;
  rr.log.stride = stride;
  rr.log.samples.push_back(make_sample(st, su));

  SummaryReport& sum = rr.summary;
  sum.horizon = su.scenario.horizon;
  sum.dt = dt;
  sum.steps = steps;
  sum.V1_initial = rr.log.samples.front().V1;
  sum.V2_initial = rr.log.samples.front().V2;
  sum.min_distance = rr.log.samples.front().min_dist;
  sum.max_s_norm = rr.log.samples.front().s_f.norm();
  {
    const ErrorViews ev0 = error_views(st, su);
    sum.max_v_tilde_norm = ev0.v_tilde_f.norm();
  }

  double prev_v1 = sum.V1_initial;
  double prev_v2 = sum.V2_initial;
  double prev_t = 0.0;

  for (long k = 1; k <= steps; ++k) {
    st = engine_detail::step_with_transitions(st, dt, su, half, full);
    if (k % stride == 0 || k == steps) {
      rr.log.samples.push_back(make_sample(st, su));
      const LogSample& smp = rr.log.samples.back();
      sum.min_distance = std::min(sum.min_distance, smp.min_dist);
      sum.max_s_norm = std::max(sum.max_s_norm, smp.s_f.norm());
      const ErrorViews ev = error_views(st, su);
      sum.max_v_tilde_norm = std::max(sum.max_v_tilde_norm, ev.v_tilde_f.norm());
      const double slack = 1e-7 * (smp.t - prev_t);
      if (smp.V1 > prev_v1 + slack) ++sum.v1_violations;
      if (!std::isnan(smp.V2) && smp.V2 > prev_v2 + slack) ++sum.v2_violations;
      prev_v1 = smp.V1;
      prev_v2 = smp.V2;
      prev_t = smp.t;
    }
  }

  const ErrorViews ev = error_views(st, su);
  sum.terminal_q_tilde_norm = ev.q_tilde_f.norm();
  sum.terminal_s_norm = ev.s_f.norm();
  sum.terminal_eta_tilde_norm = ev.eta_tilde_f.norm();
  sum.terminal_theta_tilde_norm = ev.theta_tilde_f.norm();
  return rr;
}

}  // namespace bearsim
