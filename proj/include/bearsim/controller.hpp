#pragma once

#include <Eigen/Dense>

#include "bearsim/bearing.hpp"
#include "bearsim/errors.hpp"
#include "bearsim/graph.hpp"

namespace bearsim {

/// Positive definite gain matrices of the control and adaptation laws.
struct ControllerGains {
  Eigen::MatrixXd lambda_s;      // d x d
  Eigen::MatrixXd lambda_theta;  // r x r

  void validate() const {
    if (!is_positive_definite(lambda_s))
      throw ValidationError("gains: lambda_s is not positive definite");
    if (!is_positive_definite(lambda_theta))
      throw ValidationError("gains: lambda_theta is not positive definite");
  }
};

struct AuxiliarySignals {
  Eigen::VectorXd zeta;
  Eigen::VectorXd zeta_dot;
  Eigen::VectorXd s;
};

/// Reference-velocity and sliding signals for follower i:
///   zeta_i  = F etahat_i  + sum_j P_{g*_ij} (q_j - q_i)
///   zeta_i' = F etahat_i' + sum_j P_{g*_ij} (q_j' - q_i')
///   s_i     = q_i' - zeta_i.
/// The projector sum is the bearing-error feedback; stacked over followers it
/// equals -(B_fl q_l + B_ff q_f), which is what gives the error dynamics
/// qtilde' = -B_ff qtilde + d with B_ff positive definite.
/// Inputs are restricted to agent i's own state, its estimate, and its
/// neighbors' positions/velocities.
inline AuxiliarySignals auxiliary_signals(const GraphTopology& g, const BearingSet& b,
                                          const Eigen::MatrixXd& F, int follower,
                                          const Eigen::VectorXd& q_all,
                                          const Eigen::VectorXd& qdot_all,
                                          const Eigen::VectorXd& eta_hat_i,
                                          const Eigen::VectorXd& eta_hat_dot_i) {
  const int d = b.dim();
  if (follower <= g.leaders() || follower > g.agents()) {
    throw ValidationError("auxiliary_signals: index is not a follower");
  }
  AuxiliarySignals out;
  out.zeta = F * eta_hat_i;
  out.zeta_dot = F * eta_hat_dot_i;
  const Eigen::VectorXd q_i = q_all.segment((follower - 1) * d, d);
  const Eigen::VectorXd qd_i = qdot_all.segment((follower - 1) * d, d);
  for (int j : g.neighbors(follower)) {
    const Eigen::MatrixXd p = bearing_projector(b.get(follower, j), 1e-9);
    out.zeta += p * (q_all.segment((j - 1) * d, d) - q_i);
    out.zeta_dot += p * (qdot_all.segment((j - 1) * d, d) - qd_i);
  }
  out.s = qd_i - out.zeta;
  return out;
}

/// tau_i = Y_i thetahat_i - Lambda_s s_i. Takes the regressor rather than the
/// model so the control path cannot touch the true parameters.
inline Eigen::VectorXd control_torque(const Eigen::MatrixXd& regressor,
                                      const Eigen::VectorXd& theta_hat,
                                      const Eigen::MatrixXd& lambda_s,
                                      const Eigen::VectorXd& s) {
  return regressor * theta_hat - lambda_s * s;
}

/// thetahat_i' = -Lambda_theta Y_i^T s_i.
inline Eigen::VectorXd adaptation_rhs(const Eigen::MatrixXd& regressor,
                                      const Eigen::MatrixXd& lambda_theta,
                                      const Eigen::VectorXd& s) {
  return -lambda_theta * (regressor.transpose() * s);
}

}  // namespace bearsim
