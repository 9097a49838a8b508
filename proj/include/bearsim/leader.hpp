#pragma once

#include <Eigen/Dense>

#include "bearsim/errors.hpp"
#include "bearsim/matrix_equations.hpp"

namespace bearsim {

/// Linear exosystem eta' = S eta, v_c = F eta generating the leaders' common
/// velocity. Leaders are kinematic: they ride the reference trajectory
/// exactly, preserving their initial relative offsets.
struct LeaderModel {
  Eigen::MatrixXd S;    // w x w
  Eigen::MatrixXd F;    // d x w
  Eigen::VectorXd eta0;              // R^w
  Eigen::VectorXd q_l0;              // stacked leader positions, R^{d n_l}

  int state_dim() const { return static_cast<int>(S.rows()); }
  int dim() const { return static_cast<int>(F.rows()); }
  int leader_count() const { return static_cast<int>(q_l0.size()) / dim(); }
};

inline Eigen::VectorXd leader_velocity(const LeaderModel& m, const Eigen::VectorXd& eta) {
  if (eta.size() != m.state_dim()) throw ValidationError("leader_velocity: eta size mismatch");
  return m.F * eta;
}

/// The augmented matrix exponential exp([[S,0],[F,0]] t) has blocks
/// [[exp(St), 0], [G(t), I]] with G(t) = integral of F exp(S tau) over [0,t],
/// so one exponential yields both the state transition and the exact
/// displacement kernel.
struct LeaderTransition {
  Eigen::MatrixXd state;         // exp(S t)
  Eigen::MatrixXd displacement;  // G(t), d x w
};

inline LeaderTransition leader_transition(const LeaderModel& m, double t) {
  const int w = m.state_dim();
  const int d = m.dim();
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(w + d, w + d);
  aug.topLeftCorner(w, w) = m.S;
  aug.bottomLeftCorner(d, w) = m.F;
  const Eigen::MatrixXd e = matrix_exponential(aug, t);
  return LeaderTransition{e.topLeftCorner(w, w), e.bottomLeftCorner(d, w)};
}

/// Common displacement of all leaders over [0, t].
inline Eigen::VectorXd leader_displacement(const LeaderModel& m, double t) {
  return leader_transition(m, t).displacement * m.eta0;
}

struct LeaderFlow {
  Eigen::VectorXd eta;  // eta(t)
  Eigen::VectorXd q_l;  // stacked leader positions at t
};

/// Closed-form flow: eta(t) = exp(S t) eta0 and every leader advances by the
/// common displacement, so pairwise leader distances are constant in time.
inline LeaderFlow leader_flow(const LeaderModel& m, double t) {
  const LeaderTransition tr = leader_transition(m, t);
  const Eigen::VectorXd delta = tr.displacement * m.eta0;
  const int d = m.dim();
  Eigen::VectorXd q_l = m.q_l0;
  for (int k = 0; k < m.leader_count(); ++k) q_l.segment(k * d, d) += delta;
  return LeaderFlow{tr.state * m.eta0, q_l};
}

/// Numerical certificate that S generates bounded trajectories: no
/// eigenvalue may have a real part beyond epsilon (checked through the
/// Lyapunov route on S - eps I), and the transition norm must stay below the
/// given bound over the sampled horizon, which also rejects defective
/// imaginary-axis eigenvalues (polynomial growth).
inline bool certify_bounded_exosystem(const Eigen::MatrixXd& s, double eps = 1e-4,
                                      double horizon = 50.0, int samples = 100,
                                      double bound = 1e3) {
  const Eigen::Index w = s.rows();
  if (!is_hurwitz(s - eps * Eigen::MatrixXd::Identity(w, w))) return false;
  for (int k = 1; k <= samples; ++k) {
    const double t = horizon * k / samples;
    if (spectral_norm(matrix_exponential(s, t)) > bound) return false;
  }
  return true;
}

}  // namespace bearsim
