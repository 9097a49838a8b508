#pragma once

#include <map>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "bearsim/errors.hpp"
#include "bearsim/graph.hpp"
#include "bearsim/matrix_equations.hpp"

namespace bearsim {

/// Orthogonal projector P = I - g g^T onto the complement of the bearing
/// direction. Symmetric, idempotent, annihilates g.
inline Eigen::MatrixXd bearing_projector(const Eigen::VectorXd& g, double unit_tol = 1e-9) {
  const double norm = g.norm();
  if (std::abs(norm - 1.0) > unit_tol) {
    throw NonUnitBearing("bearing norm " + std::to_string(norm) + " deviates from 1");
  }
  const Eigen::Index d = g.size();
  return Eigen::MatrixXd::Identity(d, d) - g * g.transpose();
}

/// Desired bearings keyed by ordered pair (i, j). Since the projector is
/// orientation-invariant (P_{-g} = P_g), one orientation per edge suffices;
/// if both are stored they must be antisymmetric.
class BearingSet {
public:
  explicit BearingSet(int dim) : d_(dim) {
    if (d_ < 2) throw ValidationError("bearings: dimension must be >= 2");
  }

  int dim() const { return d_; }

  void insert(int i, int j, const Eigen::VectorXd& g) {
    if (g.size() != d_) throw ValidationError("bearings: wrong vector dimension");
    if (std::abs(g.norm() - 1.0) > 1e-12) {
      throw NonUnitBearing("bearing (" + std::to_string(i) + "," + std::to_string(j) +
                           ") has norm " + std::to_string(g.norm()));
    }
    auto rev = entries_.find({j, i});
    if (rev != entries_.end() && (rev->second + g).norm() > 1e-12) {
      throw ValidationError("bearings: (" + std::to_string(i) + "," + std::to_string(j) +
                            ") is not the negation of its reverse");
    }
    entries_[{i, j}] = g;
  }

  bool has(int i, int j) const {
    return entries_.count({i, j}) > 0 || entries_.count({j, i}) > 0;
  }

  /// Bearing for ordered pair (i, j); derived as -g_ji when only the reverse
  /// orientation is stored.
  Eigen::VectorXd get(int i, int j) const {
    auto it = entries_.find({i, j});
    if (it != entries_.end()) return it->second;
    it = entries_.find({j, i});
    if (it != entries_.end()) return -it->second;
    throw MissingBearing("no bearing for edge (" + std::to_string(i) + "," +
                         std::to_string(j) + ")");
  }

  const std::map<std::pair<int, int>, Eigen::VectorXd>& entries() const { return entries_; }

private:
  int d_;
  std::map<std::pair<int, int>, Eigen::VectorXd> entries_;
};

/// Bearing Laplacian with its leader/follower partition. Diagonal blocks sum
/// the incident projectors, off-diagonal blocks are -P on edges; this sign
/// convention makes the matrix positive semidefinite with the translation
/// null space B (1 kron u) = 0.
struct BearingLaplacian {
  int dim = 0;
  int leaders = 0;
  int followers = 0;
  Eigen::MatrixXd full;
  Eigen::MatrixXd ll, lf, fl, ff;
  double lambda_min_ff = 0.0;
};

inline BearingLaplacian bearing_laplacian(const GraphTopology& g, const BearingSet& b) {
  const int n = g.agents();
  const int d = b.dim();
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(n * d, n * d);
  for (const auto& [i, j] : g.edges()) {
    if (!b.has(i, j)) {
      throw MissingBearing("edge (" + std::to_string(i) + "," + std::to_string(j) +
                           ") has no bearing");
    }
    const Eigen::MatrixXd p = bearing_projector(b.get(i, j), 1e-9);
    full.block((i - 1) * d, (j - 1) * d, d, d) -= p;
    full.block((j - 1) * d, (i - 1) * d, d, d) -= p;
    full.block((i - 1) * d, (i - 1) * d, d, d) += p;
    full.block((j - 1) * d, (j - 1) * d, d, d) += p;
  }
  BearingLaplacian out;
  out.dim = d;
  out.leaders = g.leaders();
  out.followers = g.followers();
  const int nl = g.leaders() * d;
  const int nf = g.followers() * d;
  out.ll = full.topLeftCorner(nl, nl);
  out.lf = full.topRightCorner(nl, nf);
  out.fl = full.bottomLeftCorner(nf, nl);
  out.ff = full.bottomRightCorner(nf, nf);
  out.lambda_min_ff = lambda_min_symmetric(out.ff);
  out.full = std::move(full);
  return out;
}

struct LocalizabilityCertificate {
  bool localizable = false;
  double lambda_min = 0.0;
  double tolerance = 0.0;
  bool followers_reachable = false;
};

/// Default nonsingularity tolerance: 1e-8 relative to ||B_ff||.
inline double default_localizability_tol(const BearingLaplacian& b) {
  return 1e-8 * std::max(1.0, spectral_norm(b.ff));
}

/// Localizable iff lambda_min(B_ff) > tol. Also reports leader reachability,
/// which nonsingularity of B_ff implies; a mismatch indicates a broken input.
inline LocalizabilityCertificate certify_localizability(const BearingLaplacian& b,
                                                        const GraphTopology& g, double tol) {
  LocalizabilityCertificate cert;
  cert.lambda_min = b.lambda_min_ff;
  cert.tolerance = tol;
  cert.localizable = b.lambda_min_ff > tol;
  cert.followers_reachable = g.followers_reachable_from_leaders();
  return cert;
}

inline LocalizabilityCertificate certify_localizability(const BearingLaplacian& b,
                                                        const GraphTopology& g) {
  return certify_localizability(b, g, default_localizability_tol(b));
}

/// Unique target follower positions given stacked leader positions:
/// solves B_ff q_f = -B_fl q_l by Cholesky (valid once localizable).
inline Eigen::VectorXd target_followers(const BearingLaplacian& b,
                                        const Eigen::VectorXd& leader_positions,
                                        double tol = -1.0) {
  if (leader_positions.size() != b.leaders * b.dim) {
    throw ValidationError("target_followers: leader position vector has wrong size");
  }
  const double eff_tol = tol >= 0.0 ? tol : default_localizability_tol(b);
  if (b.lambda_min_ff <= eff_tol) {
    throw NotLocalizable("target_followers: lambda_min(B_ff) = " +
                         std::to_string(b.lambda_min_ff) + " below tolerance");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(b.ff);
  if (llt.info() != Eigen::Success) {
    throw NotLocalizable("target_followers: Cholesky of B_ff failed");
  }
  return llt.solve(-b.fl * leader_positions);
}

}  // namespace bearsim
