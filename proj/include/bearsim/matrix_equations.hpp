#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "bearsim/errors.hpp"

namespace bearsim {

inline Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

/// Largest singular value.
inline double spectral_norm(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()(0);
}

inline double lambda_min_symmetric(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline bool is_positive_definite(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (a + a.transpose()));
  return llt.info() == Eigen::Success;
}

namespace detail {

/// Solves A^T X + X A = -Q by Kronecker vectorization (dense m^2 system).
/// No symmetry or definiteness is assumed of Q. Throws NotHurwitz when the
/// Sylvester operator is singular (some eigenvalue pair of A sums to zero).
/// Bartels-Stewart would be the upgrade path if m ever grows past desk scale.
inline Eigen::MatrixXd lyapunov_raw(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
  const Eigen::Index m = a.rows();
  const Eigen::MatrixXd im = Eigen::MatrixXd::Identity(m, m);
  // vec(A^T X) = (I kron A^T) vec(X), vec(X A) = (A^T kron I) vec(X)
  const Eigen::MatrixXd op = kronecker(im, a.transpose()) + kronecker(a.transpose(), im);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(op);
  if (!lu.isInvertible()) {
    throw NotHurwitz("lyapunov: singular Sylvester operator (eigenvalue pair sums to zero)");
  }
  Eigen::VectorXd rhs(m * m);
  for (Eigen::Index j = 0; j < m; ++j) rhs.segment(j * m, m) = -q.col(j);
  const Eigen::VectorXd x = lu.solve(rhs);
  Eigen::MatrixXd sol(m, m);
  for (Eigen::Index j = 0; j < m; ++j) sol.col(j) = x.segment(j * m, m);
  return 0.5 * (sol + sol.transpose());
}

}  // namespace detail

/// Solves A^T X + X A = -Q for symmetric positive definite Q, requiring a
/// symmetric positive definite solution (the Lyapunov certificate that A is
/// Hurwitz). Throws NotHurwitz otherwise.
inline Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
  const Eigen::MatrixXd x = detail::lyapunov_raw(a, q);
  if (lambda_min_symmetric(x) <= 0.0) {
    throw NotHurwitz("lyapunov: solution is not positive definite");
  }
  const double res = (a.transpose() * x + x * a + q).norm();
  if (res > 1e-9 * std::max(1.0, q.norm())) {
    throw NotHurwitz("lyapunov: residual " + std::to_string(res) + " exceeds tolerance");
  }
  return x;
}

/// Lyapunov characterization of Hurwitz stability: true iff
/// A^T X + X A = -I admits a positive definite solution. Deliberately avoids
/// a nonsymmetric eigensolver.
inline bool is_hurwitz(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return true;
  try {
    solve_lyapunov(a, Eigen::MatrixXd::Identity(a.rows(), a.cols()));
    return true;
  } catch (const NotHurwitz&) {
    return false;
  }
}

/// PBH detectability test for the pair (S, F): every eigenvalue of S with
/// nonnegative real part must keep rank [lambda I - S; F] full. Rank is read
/// off singular values with threshold 1e-9 * sigma_max.
inline bool check_detectability(const Eigen::MatrixXd& s, const Eigen::MatrixXd& f) {
  const Eigen::Index w = s.rows();
  if (f.cols() != w) throw ValidationError("detectability: F has wrong column count");
  Eigen::EigenSolver<Eigen::MatrixXd> es(s);
  for (Eigen::Index k = 0; k < w; ++k) {
    const std::complex<double> lam = es.eigenvalues()(k);
    if (lam.real() < -1e-9) continue;
    Eigen::MatrixXcd pbh(w + f.rows(), w);
    pbh.topRows(w) = lam * Eigen::MatrixXcd::Identity(w, w) - s.cast<std::complex<double>>();
    pbh.bottomRows(f.rows()) = f.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
    const auto& sv = svd.singularValues();
    if (sv(w - 1) <= 1e-9 * sv(0)) return false;
  }
  return true;
}

struct RiccatiSolution {
  Eigen::MatrixXd P;     // symmetric positive definite
  double residual_norm;  // of P S^T + S P - P F^T F P + I
  int iterations;
};

/// Solves P S^T + S P - P F^T F P + I = 0 for the stabilizing positive
/// definite P by Newton-Kleinman iteration on the output-injection gain.
/// Each Newton step solves the Lyapunov equation
///   (S - G_k F) P_{k+1} + P_{k+1} (S - G_k F)^T = -(I + G_k G_k^T),
/// then updates G_{k+1} = P_{k+1} F^T. The initial stabilizing gain comes
/// from Bass' pole-shift construction on the dual pair.
inline RiccatiSolution solve_riccati(const Eigen::MatrixXd& s, const Eigen::MatrixXd& f,
                                     int max_iters = 60, double tol = 1e-12) {
  const Eigen::Index w = s.rows();
  const Eigen::MatrixXd iw = Eigen::MatrixXd::Identity(w, w);
  if (!check_detectability(s, f)) {
    throw NotDetectable("riccati: the pair (S, F) is not detectable");
  }

  auto residual = [&](const Eigen::MatrixXd& p) {
    return (p * s.transpose() + s * p - p * f.transpose() * f * p + iw).norm();
  };

  // Bass initializer: with beta > spectral abscissa of S, the shifted
  // equation (S + beta I) Z + Z (S + beta I)^T = 2 F^T F has a unique PSD
  // solution; G0 = pinv(Z) F^T stabilizes S - G0 F for detectable pairs.
  Eigen::MatrixXd g0 = Eigen::MatrixXd::Zero(w, f.rows());
  if (!is_hurwitz(s)) {
    double beta = s.norm() + 1.0;
    bool stabilized = false;
    for (int attempt = 0; attempt < 4 && !stabilized; ++attempt, beta *= 2.0) {
      // (S^T + beta I) Z + Z (S + beta I) = 2 F^T F, i.e. the raw form
      // A^T Z + Z A = -Q with A = S + beta I and Q = -2 F^T F
      const Eigen::MatrixXd z =
          detail::lyapunov_raw(s + beta * iw, -2.0 * f.transpose() * f);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      Eigen::VectorXd inv_sv = Eigen::VectorXd::Zero(sv.size());
      for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > 1e-12 * sv(0)) inv_sv(i) = 1.0 / sv(i);
      }
      const Eigen::MatrixXd z_pinv =
          svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
      g0 = z_pinv * f.transpose();
      stabilized = is_hurwitz(s - g0 * f);
    }
    if (!stabilized) {
      throw NoConvergence("riccati: failed to find an initial stabilizing gain");
    }
  }

  Eigen::MatrixXd g = g0;
  Eigen::MatrixXd p = iw;
  for (int k = 1; k <= max_iters; ++k) {
    const Eigen::MatrixXd a_cl = (s - g * f).transpose();  // A^T X + X A form
    const Eigen::MatrixXd q = iw + g * g.transpose();
    p = detail::lyapunov_raw(a_cl, q);
    g = p * f.transpose();
    const double res = residual(p);
    if (res <= tol * std::max(1.0, p.norm())) {
      if (lambda_min_symmetric(p) <= 0.0) {
        throw NoConvergence("riccati: converged to a non-positive-definite solution");
      }
      return RiccatiSolution{p, res, k};
    }
  }
  throw NoConvergence("riccati: no convergence after " + std::to_string(max_iters) +
                      " Newton iterations; last residual " + std::to_string(residual(p)));
}

/// exp(A t) by scaling-and-squaring with Pade approximation (Eigen's
/// MatrixFunctions backend).
inline Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a, double t) {
  return (a * t).exp();
}

}  // namespace bearsim
