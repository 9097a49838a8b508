#pragma once

#include <Eigen/Dense>

#include "bearsim/errors.hpp"
#include "bearsim/graph.hpp"
#include "bearsim/leader.hpp"
#include "bearsim/matrix_equations.hpp"

namespace bearsim {

/// Gains and certificates for the per-follower leader-state compensator
///   etahat_i' = S etahat_i - gamma L sum_{j in N_i} (vhat_i - vhat_j),
/// where vhat_i = F etahat_i for followers and vhat_j = v_c for leader
/// neighbors. L = P F^T with P the stabilizing Riccati solution.
struct ObserverConfig {
  double gamma = 0.0;
  Eigen::MatrixXd L;          // w x d output-injection gain
  double lambda_min_Lff = 0.0;
  bool condition_ok = false;  // 2 lambda_min(L_ff) gamma > 1
  bool sf_hurwitz = false;
  RiccatiSolution riccati;
};

/// Stacked error dynamics matrix S_f = I kron S - gamma (L_ff kron L F);
/// Hurwitz whenever the gain condition holds.
inline Eigen::MatrixXd observer_error_dynamics_matrix(const ObserverConfig& cfg,
                                                      const GraphTopology& g,
                                                      const LeaderModel& m) {
  const Eigen::MatrixXd lff = g.laplacian_blocks().ff;
  const Eigen::MatrixXd i_nf =
      Eigen::MatrixXd::Identity(g.followers(), g.followers());
  return kronecker(i_nf, m.S) - cfg.gamma * kronecker(lff, cfg.L * m.F);
}

inline ObserverConfig synthesize_observer(const GraphTopology& g, const LeaderModel& m,
                                          double gamma) {
  if (gamma <= 0.0) throw ValidationError("observer: gamma must be positive");
  ObserverConfig cfg;
  cfg.gamma = gamma;
  cfg.riccati = solve_riccati(m.S, m.F);
  cfg.L = cfg.riccati.P * m.F.transpose();
  cfg.lambda_min_Lff = lambda_min_symmetric(g.laplacian_blocks().ff);
  cfg.condition_ok = 2.0 * cfg.lambda_min_Lff * gamma > 1.0;
  cfg.sf_hurwitz = is_hurwitz(observer_error_dynamics_matrix(cfg, g, m));
  return cfg;
}

/// Stacked compensator right-hand side for all followers. eta_hat_all holds
/// the followers' estimates in agent order; eta is the true leader state
/// (leader neighbors inject the exact v_c = F eta).
inline Eigen::VectorXd observer_rhs(const ObserverConfig& cfg, const GraphTopology& g,
                                    const LeaderModel& m,
                                    const Eigen::VectorXd& eta_hat_all,
                                    const Eigen::VectorXd& eta) {
  const int w = m.state_dim();
  const int nf = g.followers();
  const int nl = g.leaders();
  if (eta_hat_all.size() != w * nf) {
    throw ValidationError("observer_rhs: eta_hat size mismatch");
  }
  const Eigen::VectorXd v_c = m.F * eta;
  Eigen::VectorXd out(w * nf);
  for (int k = 0; k < nf; ++k) {
    const int i = nl + k + 1;
    const Eigen::VectorXd eta_i = eta_hat_all.segment(k * w, w);
    const Eigen::VectorXd v_i = m.F * eta_i;
    Eigen::VectorXd coupling = Eigen::VectorXd::Zero(m.dim());
    for (int j : g.neighbors(i)) {
      const Eigen::VectorXd v_j =
          g.is_leader(j) ? v_c
                         : Eigen::VectorXd(m.F * eta_hat_all.segment((j - nl - 1) * w, w));
      coupling += v_i - v_j;
    }
    out.segment(k * w, w) = m.S * eta_i - cfg.gamma * cfg.L * coupling;
  }
  return out;
}

}  // namespace bearsim
