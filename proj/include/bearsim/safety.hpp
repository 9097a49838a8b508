#pragma once

#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "bearsim/engine.hpp"
#include "bearsim/errors.hpp"
#include "bearsim/matrix_equations.hpp"

namespace bearsim {

/// Initial-condition collision-avoidance certificate. With
///   D_sf   = sqrt(V1(0) / min_i m_i),
///   D_vf   = ||F|| sqrt(V2(0) / lambda_min(P_f)),
///   D_bar  = D_sf + D_vf,
/// the certificate holds iff
///   inf target distance >= sqrt(n) (||q_tilde(0)|| + D_bar / lambda_min(B_ff)) + gamma.
/// V1 and V2 are non-increasing along the closed loop, so D_sf and D_vf
/// bound ||s_f(t)|| and ||v_tilde_f(t)|| for all time.
struct SafetyCertificate {
  double gamma_safe = 0.0;
  double D_sf = 0.0;
  double D_vf = 0.0;
  double D_bar = 0.0;
  double lambda_min_Bff = 0.0;
  double lambda_min_Pf = 0.0;
  double F_norm = 0.0;
  double V1_initial = 0.0;
  double V2_initial = 0.0;
  double q_tilde0_norm = 0.0;
  double inf_target_distance = 0.0;
  double lhs = 0.0;  // inf target distance
  double rhs = 0.0;  // sqrt(n)(...) + gamma
  bool holds = false;
};

/// Smallest pairwise target distance. The target formation translates
/// rigidly with the common velocity, so pairwise distances are constant in
/// time; sampling the horizon asserts that invariance.
inline double inf_target_distance(const SimulationSetup& su, double horizon = 10.0,
                                  int samples = 16) {
  if (!su.localizability.localizable) {
    throw NotLocalizable("inf_target_distance: target formation undefined");
  }
  const double at0 = min_pairwise_distance(su, su.scenario.q_l0, su.q_f_star0);
  for (int k = 1; k <= samples; ++k) {
    const double t = horizon * k / samples;
    const Eigen::VectorXd delta = leader_displacement(su.leader, t);
    Eigen::VectorXd q_l = su.scenario.q_l0;
    Eigen::VectorXd q_f = su.q_f_star0;
    for (int a = 0; a < su.n_l; ++a) q_l.segment(a * su.d, su.d) += delta;
    for (int a = 0; a < su.n_f; ++a) q_f.segment(a * su.d, su.d) += delta;
    const double at_t = min_pairwise_distance(su, q_l, q_f);
    if (std::abs(at_t - at0) > 1e-6 * (1.0 + at0)) {
      throw Error("inf_target_distance: target distances drifted in time");
    }
  }
  return at0;
}

inline SafetyCertificate safety_certificate(const SimulationSetup& su,
                                            const ClosedLoopState& init) {
  if (!su.localizability.localizable) {
    throw CertificateFailure("safety certificate: prerequisite failed: localizability");
  }
  if (!su.observer.sf_hurwitz || !su.P_f) {
    throw CertificateFailure("safety certificate: prerequisite failed: S_f Hurwitz");
  }
  double m_lower = std::numeric_limits<double>::infinity();
  for (const auto& m : su.models) m_lower = std::min(m_lower, m->inertia_lower_bound());

  const ErrorViews ev = error_views(init, su);
  SafetyCertificate cert;
  cert.gamma_safe = su.scenario.gamma_safe;
  cert.V1_initial = ev.V1;
  cert.V2_initial = ev.V2;
  cert.D_sf = std::sqrt(ev.V1 / m_lower);
  cert.lambda_min_Pf = su.lambda_min_Pf;
  cert.F_norm = spectral_norm(su.leader.F);
  cert.D_vf = cert.F_norm * std::sqrt(ev.V2 / cert.lambda_min_Pf);
  cert.D_bar = cert.D_sf + cert.D_vf;
  cert.lambda_min_Bff = su.B.lambda_min_ff;
  cert.q_tilde0_norm = ev.q_tilde_f.norm();
  cert.inf_target_distance = inf_target_distance(su);
  cert.lhs = cert.inf_target_distance;
  cert.rhs = std::sqrt(static_cast<double>(su.n)) *
                 (cert.q_tilde0_norm + cert.D_bar / cert.lambda_min_Bff) +
             cert.gamma_safe;
  cert.holds = cert.lhs >= cert.rhs;
  return cert;
}

struct DistanceReport {
  double min_distance = 0.0;
  std::optional<double> first_violation_time;
  bool ok = true;
};

/// Minimum realized inter-agent distance over the logged samples, checked
/// against the safety margin. The certificate is sufficient, not necessary:
/// an uncertified run may still stay clear.
inline DistanceReport runtime_distance_monitor(const TrajectoryLog& log, double gamma) {
  if (log.samples.empty()) throw ValidationError("distance monitor: empty log");
  DistanceReport rep;
  rep.min_distance = std::numeric_limits<double>::infinity();
  for (const LogSample& smp : log.samples) {
    rep.min_distance = std::min(rep.min_distance, smp.min_dist);
    if (smp.min_dist < gamma && !rep.first_violation_time) {
      rep.first_violation_time = smp.t;
    }
  }
  rep.ok = !rep.first_violation_time.has_value();
  return rep;
}

}  // namespace bearsim
