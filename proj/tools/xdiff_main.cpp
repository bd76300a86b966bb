#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "xdiff/commands.hpp"
#include "xdiff/config.hpp"
#include "xdiff/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cross-diffusion entropy certification, simulation, and regularity probes"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_dir = ".";
  int threads = 0;
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", threads,
                 "worker threads (0: XDIFF_THREADS environment variable, then 1)");

  std::string certify_config, simulate_config, probe_config, convergence_config;
  bool skip_certify = false;

  CLI::App* certify = app.add_subcommand("certify", "certify entropy structure");
  certify->add_option("config", certify_config, "config file")->required();

  CLI::App* simulate = app.add_subcommand("simulate", "run the finite-volume solver");
  simulate->add_option("config", simulate_config, "config file")->required();
  simulate->add_flag("--skip-certify", skip_certify, "run without the certification gate");

  CLI::App* probe = app.add_subcommand("probe", "compute regularity diagnostics");
  probe->add_option("config", probe_config,
                    "config file; the [probe] section's 'trajectory' key names the input")
      ->required();

  CLI::App* convergence = app.add_subcommand("convergence", "manufactured-solution orders");
  convergence->add_option("config", convergence_config, "config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (certify->parsed()) return xdiff::cmd_certify(certify_config, out_dir, threads);
  if (simulate->parsed())
    return xdiff::cmd_simulate(simulate_config, out_dir, threads, skip_certify);
  if (probe->parsed()) {
    std::string trajectory;
    try {
      xdiff::Config cfg = xdiff::Config::parse_file(probe_config);
      trajectory = cfg.get_string("probe", "trajectory");
    } catch (const xdiff::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
    return xdiff::cmd_probe(trajectory, probe_config, out_dir, threads);
  }
  if (convergence->parsed()) return xdiff::cmd_convergence(convergence_config, out_dir, threads);
  return 2;
}
