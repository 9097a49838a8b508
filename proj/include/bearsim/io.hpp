#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include "bearsim/engine.hpp"
#include "bearsim/safety.hpp"

namespace bearsim {

namespace io_detail {

inline std::string g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace io_detail

/// CSV layout (one row per logged sample, full double precision):
///   t,
///   q<i>_<c>     position component c of agent i (leaders first),
///   qd<i>_<c>    velocity component (leaders carry v_c),
///   s<i>_<c>     sliding variable per follower,
///   qtilde_norm, etatilde_norm, thetatilde_norm, V1, V2, min_dist
inline void write_trajectory_csv(const TrajectoryLog& log, const SimulationSetup& su,
                                 std::ostream& out) {
  out << "t";
  for (int i = 1; i <= su.n; ++i)
    for (int c = 0; c < su.d; ++c) out << ",q" << i << "_" << c;
  for (int i = 1; i <= su.n; ++i)
    for (int c = 0; c < su.d; ++c) out << ",qd" << i << "_" << c;
  for (int i = su.n_l + 1; i <= su.n; ++i)
    for (int c = 0; c < su.d; ++c) out << ",s" << i << "_" << c;
  out << ",qtilde_norm,etatilde_norm,thetatilde_norm,V1,V2,min_dist\n";
  for (const LogSample& smp : log.samples) {
    out << io_detail::g17(smp.t);
    for (Eigen::Index k = 0; k < smp.q_all.size(); ++k)
      out << "," << io_detail::g17(smp.q_all[k]);
    for (Eigen::Index k = 0; k < smp.qdot_all.size(); ++k)
      out << "," << io_detail::g17(smp.qdot_all[k]);
    for (Eigen::Index k = 0; k < smp.s_f.size(); ++k)
      out << "," << io_detail::g17(smp.s_f[k]);
    out << "," << io_detail::g17(smp.q_tilde_norm) << "," << io_detail::g17(smp.eta_tilde_norm)
        << "," << io_detail::g17(smp.theta_tilde_norm) << "," << io_detail::g17(smp.V1) << ","
        << io_detail::g17(smp.V2) << "," << io_detail::g17(smp.min_dist) << "\n";
  }
}

inline void write_certificate_report(const SimulationSetup& su,
                                     const SafetyCertificate* cert, std::ostream& out) {
  using io_detail::g17;
  out << "scenario = " << su.scenario.name << "\n";
  out << "localizable = " << (su.localizability.localizable ? "yes" : "no") << "\n";
  out << "lambda_min_Bff = " << g17(su.B.lambda_min_ff) << "\n";
  out << "followers_reachable = " << (su.localizability.followers_reachable ? "yes" : "no")
      << "\n";
  out << "detectable = " << (su.detectable ? "yes" : "no") << "\n";
  out << "exosystem_bounded = " << (su.exosystem_bounded ? "yes" : "no") << "\n";
  out << "gamma = " << g17(su.observer.gamma) << "\n";
  out << "lambda_min_Lff = " << g17(su.observer.lambda_min_Lff) << "\n";
  out << "gain_condition_ok = " << (su.observer.condition_ok ? "yes" : "no") << "\n";
  out << "sf_hurwitz = " << (su.observer.sf_hurwitz ? "yes" : "no") << "\n";
  out << "riccati_residual = " << g17(su.observer.riccati.residual_norm) << "\n";
  if (cert) {
    out << "safety_gamma = " << g17(cert->gamma_safe) << "\n";
    out << "safety_D_sf = " << g17(cert->D_sf) << "\n";
    out << "safety_D_vf = " << g17(cert->D_vf) << "\n";
    out << "safety_D_bar = " << g17(cert->D_bar) << "\n";
    out << "safety_lambda_min_Pf = " << g17(cert->lambda_min_Pf) << "\n";
    out << "safety_F_norm = " << g17(cert->F_norm) << "\n";
    out << "safety_V1_initial = " << g17(cert->V1_initial) << "\n";
    out << "safety_V2_initial = " << g17(cert->V2_initial) << "\n";
    out << "safety_q_tilde0_norm = " << g17(cert->q_tilde0_norm) << "\n";
    out << "safety_inf_target_distance = " << g17(cert->inf_target_distance) << "\n";
    out << "safety_lhs = " << g17(cert->lhs) << "\n";
    out << "safety_rhs = " << g17(cert->rhs) << "\n";
    out << "safety_holds = " << (cert->holds ? "yes" : "no") << "\n";
  }
}

inline void write_vector_line(std::ostream& out, const char* name, const Eigen::VectorXd& v) {
  out << name << " =";
  for (Eigen::Index i = 0; i < v.size(); ++i) out << " " << io_detail::g17(v[i]);
  out << "\n";
}

inline void write_summary_report(const SummaryReport& sum, const MaterializedInit& init,
                                 std::ostream& out) {
  using io_detail::g17;
  out << "horizon = " << g17(sum.horizon) << "\n";
  out << "dt = " << g17(sum.dt) << "\n";
  out << "steps = " << sum.steps << "\n";
  out << "terminal_q_tilde_norm = " << g17(sum.terminal_q_tilde_norm) << "\n";
  out << "terminal_s_norm = " << g17(sum.terminal_s_norm) << "\n";
  out << "terminal_eta_tilde_norm = " << g17(sum.terminal_eta_tilde_norm) << "\n";
  out << "terminal_theta_tilde_norm = " << g17(sum.terminal_theta_tilde_norm) << "\n";
  out << "min_distance = " << g17(sum.min_distance) << "\n";
  out << "max_s_norm = " << g17(sum.max_s_norm) << "\n";
  out << "max_v_tilde_norm = " << g17(sum.max_v_tilde_norm) << "\n";
  out << "V1_initial = " << g17(sum.V1_initial) << "\n";
  out << "V2_initial = " << g17(sum.V2_initial) << "\n";
  out << "V1_violations = " << sum.v1_violations << "\n";
  out << "V2_violations = " << sum.v2_violations << "\n";
  // materialized draws echoed for exact replay
  write_vector_line(out, "init_eta_tilde0", init.eta_tilde0);
  write_vector_line(out, "init_s0", init.s0);
  write_vector_line(out, "init_theta_tilde0", init.theta_tilde0);
  write_vector_line(out, "init_q_tilde0", init.q_tilde0);
  write_vector_line(out, "init_q_f0", init.q_f0);
  write_vector_line(out, "init_qdot_f0", init.qdot_f0);
  write_vector_line(out, "init_eta_hat0", init.eta_hat0);
  write_vector_line(out, "init_theta_hat0", init.theta_hat0);
}

}  // namespace bearsim
