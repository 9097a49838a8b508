// Command-line driver: scenario certificates, closed-loop simulation with
// CSV trajectory export, and the initial-condition safety certificate.
//
// Exit codes: 0 pass, 1 check failure, 2 usage/parse/validation error,
// 3 numerical blowup.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bearsim/engine.hpp"
#include "bearsim/io.hpp"
#include "bearsim/safety.hpp"
#include "bearsim/scenario.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> horizon;
};

bearsim::Scenario load_with_overrides(const std::string& path, const Overrides& ov) {
  bearsim::Scenario sc = bearsim::load_scenario_file(path);
  if (ov.seed) sc.seed = *ov.seed;
  if (ov.dt) sc.dt = *ov.dt;
  if (ov.horizon) sc.horizon = *ov.horizon;
  return sc;
}

int cmd_check(const std::string& path, const Overrides& ov) {
  const bearsim::SimulationSetup su = bearsim::make_setup(load_with_overrides(path, ov));
  bearsim::write_certificate_report(su, nullptr, std::cout);
  const std::string failed = bearsim::failed_certificate(su);
  if (!failed.empty()) {
    std::cout << "failed_check = " << failed << "\n";
    return 1;
  }
  return 0;
}

int cmd_simulate(const std::string& path, const std::string& out_dir, bool force,
                 const Overrides& ov) {
  const bearsim::SimulationSetup su = bearsim::make_setup(load_with_overrides(path, ov));
  const bearsim::RunResult rr = bearsim::run(su, force);

  std::filesystem::create_directories(out_dir);
  {
    std::ofstream csv(out_dir + "/trajectory.csv");
    bearsim::write_trajectory_csv(rr.log, su, csv);
  }
  {
    std::ofstream cert_out(out_dir + "/certificate.txt");
    try {
      bearsim::ClosedLoopState init;
      init.t = 0.0;
      init.q_f = rr.init.q_f0;
      init.qdot_f = rr.init.qdot_f0;
      init.eta_hat_f = rr.init.eta_hat0;
      init.theta_hat_f = rr.init.theta_hat0;
      init.eta = su.leader.eta0;
      init.q_l = su.scenario.q_l0;
      const bearsim::SafetyCertificate cert = bearsim::safety_certificate(su, init);
      bearsim::write_certificate_report(su, &cert, cert_out);
    } catch (const bearsim::Error& e) {
      bearsim::write_certificate_report(su, nullptr, cert_out);
      cert_out << "safety_certificate_error = " << e.what() << "\n";
    }
  }
  {
    std::ofstream sum(out_dir + "/summary.txt");
    bearsim::write_summary_report(rr.summary, rr.init, sum);
  }
  std::cout << "steps = " << rr.summary.steps << "\n";
  std::cout << "terminal_q_tilde_norm = " << rr.summary.terminal_q_tilde_norm << "\n";
  std::cout << "terminal_s_norm = " << rr.summary.terminal_s_norm << "\n";
  std::cout << "terminal_eta_tilde_norm = " << rr.summary.terminal_eta_tilde_norm << "\n";
  std::cout << "min_distance = " << rr.summary.min_distance << "\n";
  std::cout << "wrote " << out_dir << "/trajectory.csv, certificate.txt, summary.txt\n";
  return 0;
}

int cmd_safety(const std::string& path, const Overrides& ov) {
  const bearsim::SimulationSetup su = bearsim::make_setup(load_with_overrides(path, ov));
  const bearsim::MaterializedInit init = bearsim::materialize_init(su);
  bearsim::ClosedLoopState st;
  st.t = 0.0;
  st.q_f = init.q_f0;
  st.qdot_f = init.qdot_f0;
  st.eta_hat_f = init.eta_hat0;
  st.theta_hat_f = init.theta_hat0;
  st.eta = su.leader.eta0;
  st.q_l = su.scenario.q_l0;
  const bearsim::SafetyCertificate cert = bearsim::safety_certificate(su, st);
  bearsim::write_certificate_report(su, &cert, std::cout);
  bearsim::write_vector_line(std::cout, "init_q_tilde0", init.q_tilde0);
  bearsim::write_vector_line(std::cout, "init_s0", init.s0);
  bearsim::write_vector_line(std::cout, "init_eta_tilde0", init.eta_tilde0);
  bearsim::write_vector_line(std::cout, "init_theta_tilde0", init.theta_tilde0);
  return cert.holds ? 0 : 1;
}

int cmd_sweep(const std::vector<std::string>& paths, const std::string& out_dir, bool force,
              const Overrides& ov) {
  int failures = 0;
  for (const std::string& path : paths) {
    const std::string stem = std::filesystem::path(path).stem().string();
    try {
      const int rc = cmd_simulate(path, out_dir + "/" + stem, force, ov);
      std::cout << stem << ": " << (rc == 0 ? "ok" : "failed") << "\n";
      if (rc != 0) ++failures;
    } catch (const std::exception& e) {
      std::cout << stem << ": error: " << e.what() << "\n";
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bearing-driven formation tracking simulator"};
  app.require_subcommand(1);

  Overrides ov;
  std::string scenario_path, out_dir = "out";
  std::vector<std::string> sweep_paths;
  bool force = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", ov.seed, "override the scenario seed");
    cmd->add_option("--dt", ov.dt, "override the integration step");
    cmd->add_option("--horizon", ov.horizon, "override the horizon");
  };

  CLI::App* check = app.add_subcommand("check", "evaluate scenario certificates");
  check->add_option("scenario", scenario_path, "scenario file")->required();
  add_common(check);

  CLI::App* simulate = app.add_subcommand("simulate", "integrate the closed loop");
  simulate->add_option("scenario", scenario_path, "scenario file")->required();
  simulate->add_option("--out", out_dir, "output directory");
  simulate->add_flag("--force", force, "run even if certificates fail");
  add_common(simulate);

  CLI::App* safety = app.add_subcommand("safety", "evaluate the collision certificate");
  safety->add_option("scenario", scenario_path, "scenario file")->required();
  add_common(safety);

  CLI::App* sweep = app.add_subcommand("sweep", "simulate a list of scenarios");
  sweep->add_option("scenarios", sweep_paths, "scenario files")->required();
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_flag("--force", force, "run even if certificates fail");
  add_common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(check)) return cmd_check(scenario_path, ov);
    if (app.got_subcommand(simulate)) return cmd_simulate(scenario_path, out_dir, force, ov);
    if (app.got_subcommand(safety)) return cmd_safety(scenario_path, ov);
    if (app.got_subcommand(sweep)) return cmd_sweep(sweep_paths, out_dir, force, ov);
  } catch (const bearsim::NumericalBlowup& e) {
    std::cerr << "numerical blowup: " << e.what() << "\n";
    return 3;
  } catch (const bearsim::CertificateFailure& e) {
    std::cerr << "certificate failure: " << e.what() << "\n";
    return 1;
  } catch (const bearsim::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const bearsim::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
