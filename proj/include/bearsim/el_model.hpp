#pragma once

#include <cmath>
#include <memory>

#include <Eigen/Dense>

#include "bearsim/errors.hpp"

namespace bearsim {

/// Euler-Lagrange follower dynamics M(q) q'' + C(q, q') q' + D(q) q' = tau
/// with the linear-in-parameters factorization
///   M(q) zeta' + C(q, q') zeta + D(q) q' = Y(q, q', zeta, zeta') theta.
/// Controllers see only the regressor and measured signals; true_params is
/// reserved for the simulator and error views.
class ElModel {
public:
  virtual ~ElModel() = default;

  virtual int dim() const = 0;
  virtual int param_count() const = 0;
  virtual const Eigen::VectorXd& true_params() const = 0;
  /// Lower bound m with M(q) >= m I for all q.
  virtual double inertia_lower_bound() const = 0;

  virtual Eigen::MatrixXd inertia(const Eigen::VectorXd& q) const = 0;
  virtual Eigen::MatrixXd coriolis(const Eigen::VectorXd& q,
                                   const Eigen::VectorXd& qdot) const = 0;
  virtual Eigen::MatrixXd damping(const Eigen::VectorXd& q) const = 0;
  virtual Eigen::MatrixXd regressor(const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                                    const Eigen::VectorXd& zeta,
                                    const Eigen::VectorXd& zetadot) const = 0;
};

/// q'' = M(q)^{-1} (tau - C q' - D q'), inertia inverted by Cholesky.
inline Eigen::VectorXd forward_dynamics(const ElModel& m, const Eigen::VectorXd& q,
                                        const Eigen::VectorXd& qdot,
                                        const Eigen::VectorXd& tau) {
  Eigen::LLT<Eigen::MatrixXd> llt(m.inertia(q));
  if (llt.info() != Eigen::Success) {
    throw NonPdInertia("forward_dynamics: inertia matrix is not positive definite");
  }
  return llt.solve(tau - m.coriolis(q, qdot) * qdot - m.damping(q) * qdot);
}

/// Planar two-degree-of-freedom model:
///   M = [[2.35 + 0.16 cos(q2), 0], [0, 0.10]]
///   C = [[-0.08 sin(q2) q2', -0.08 sin(q2) q1'], [0.08 sin(q2) q1', 0]]
///   D = diag(0.3, 0.5)
/// C follows the Christoffel construction for this M, which is what makes
/// Mdot - 2C skew-symmetric. theta stacks the coefficients column-matched to
/// the regressor so the factorization identity holds to round-off.
class Planar2Dof final : public ElModel {
public:
  Planar2Dof() {
    theta_.resize(8);
    theta_ << 2.35, 0.16, -0.08, -0.08, 0.3, 0.1, 0.08, 0.5;
  }

  int dim() const override { return 2; }
  int param_count() const override { return 8; }
  const Eigen::VectorXd& true_params() const override { return theta_; }
  double inertia_lower_bound() const override { return 0.10; }

  Eigen::MatrixXd inertia(const Eigen::VectorXd& q) const override {
    Eigen::MatrixXd m(2, 2);
    m << 2.35 + 0.16 * std::cos(q[1]), 0.0, 0.0, 0.10;
    return m;
  }

  Eigen::MatrixXd coriolis(const Eigen::VectorXd& q,
                           const Eigen::VectorXd& qdot) const override {
    const double s = std::sin(q[1]);
    Eigen::MatrixXd c(2, 2);
    c << -0.08 * s * qdot[1], -0.08 * s * qdot[0], 0.08 * s * qdot[0], 0.0;
    return c;
  }

  Eigen::MatrixXd damping(const Eigen::VectorXd&) const override {
    return Eigen::Vector2d(0.3, 0.5).asDiagonal();
  }

  Eigen::MatrixXd regressor(const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                            const Eigen::VectorXd& zeta,
                            const Eigen::VectorXd& zetadot) const override {
    const double s = std::sin(q[1]);
    const double c = std::cos(q[1]);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(2, 8);
    y(0, 0) = zetadot[0];
    y(0, 1) = c * zetadot[0];
    y(0, 2) = s * qdot[1] * zeta[0];
    y(0, 3) = s * qdot[0] * zeta[1];
    y(0, 4) = qdot[0];
    y(1, 5) = zetadot[1];
    y(1, 6) = s * qdot[0] * zeta[0];
    y(1, 7) = qdot[1];
    return y;
  }

private:
  Eigen::VectorXd theta_;
};

inline std::shared_ptr<const ElModel> planar_2dof_model() {
  return std::make_shared<Planar2Dof>();
}

}  // namespace bearsim
