#include "xdiff/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "xdiff/errors.hpp"
#include "xdiff/parallel.hpp"
#include "xdiff/probe.hpp"
#include "xdiff/reports.hpp"
#include "xdiff/solver.hpp"
#include "xdiff/trajectory_io.hpp"
#include "xdiff/verifier.hpp"

namespace fs = std::filesystem;

namespace xdiff {

namespace {

Mat list_to_square(const std::vector<double>& vals, int n, const std::string& key) {
  if (static_cast<int>(vals.size()) != n * n)
    throw ConfigError("key '" + key + "' needs " + std::to_string(n * n) +
                          " entries (row-major " + std::to_string(n) + "x" + std::to_string(n) +
                          ")",
                      0, key);
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = vals[static_cast<size_t>(i * n + j)];
  return m;
}

SktCoeffs list_to_coeffs(const std::vector<double>& vals, const std::string& key) {
  if (vals.size() != 6)
    throw ConfigError("key '" + key + "' needs 6 entries", 0, key);
  SktCoeffs c{};
  for (size_t i = 0; i < 6; ++i) c[i] = vals[i];
  return c;
}

SolverConfig solver_from_config(const Config& cfg) {
  SolverConfig s;
  s.newton_tol = cfg.get_double("solver", "newton_tol", s.newton_tol);
  s.newton_max_iters = cfg.get_int("solver", "newton_max_iters", s.newton_max_iters);
  s.fd_step = cfg.get_double("solver", "fd_step", s.fd_step);
  s.damping_max_halvings = cfg.get_int("solver", "damping_max_halvings", s.damping_max_halvings);
  s.positivity_margin = cfg.get_double("solver", "positivity_margin", s.positivity_margin);
  return s;
}

InitialData initial_from_config(const Config& cfg, const CrossDiffusionModel& model,
                                const SpaceTimeGrid& grid) {
  const int ns = model.solve_species();
  std::string kind = cfg.get_string("initial", "kind", "constant");
  std::vector<double> value = cfg.get_list("initial", "value");
  if (static_cast<int>(value.size()) != ns)
    throw ConfigError("initial value needs " + std::to_string(ns) + " entries", 0, "value");
  if (kind == "constant") {
    Vec v = Eigen::Map<const Vec>(value.data(), ns);
    return [v](const Point&) { return v; };
  }
  if (kind == "cosine") {
    std::vector<double> amp = cfg.get_list("initial", "amplitude");
    if (static_cast<int>(amp.size()) != ns)
      throw ConfigError("initial amplitude needs " + std::to_string(ns) + " entries", 0,
                        "amplitude");
    int mode = cfg.get_int("initial", "mode", 1);
    Vec v = Eigen::Map<const Vec>(value.data(), ns);
    Vec a = Eigen::Map<const Vec>(amp.data(), ns);
    double lx = grid.extent[0], ly = grid.extent[1];
    int dim = grid.dim;
    return [v, a, mode, lx, ly, dim](const Point& x) {
      double shape = std::cos(mode * M_PI * x[0] / lx);
      if (dim == 2) shape *= std::cos(mode * M_PI * x[1] / ly);
      return Vec(v + shape * a);
    };
  }
  throw ConfigError("unknown initial kind '" + kind + "'", 0, "kind");
}

struct CertifyOutcome {
  CertificationReport report;
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  bool pass = false;
};

CertifyOutcome run_certification(const Config& cfg, const CrossDiffusionModel& model,
                                 int threads) {
  int resolution = cfg.get_int("entropy", "resolution", 32);
  double lambda_target = cfg.get_double("entropy", "lambda_target", 0.05);
  std::string sub_name = cfg.get_string("entropy", "subspace", "auto");
  Subspace sub = Subspace::full(model.n);
  if (sub_name == "zero_sum" ||
      (sub_name == "auto" && model.constraint == Constraint::VolumeFilling))
    sub = Subspace::zero_sum(model.n);
  else if (sub_name != "full" && sub_name != "auto")
    throw ConfigError("subspace must be auto, full, or zero_sum", 0, "subspace");

  CertifyOutcome outcome;
  std::string eps_raw = cfg.get_string("entropy", "epsilon", "search");
  if (eps_raw == "search") {
    try {
      auto [eps, report] = glue_search(model, model.entropy, lambda_target, sub, resolution,
                                       threads);
      outcome.epsilon = eps;
      outcome.report = report;
      outcome.pass = true;
    } catch (const NoAdmissibleEpsilon& e) {
      outcome.report.condition =
          sub.kind == SubspaceKind::ZeroSum ? std::string("C1'") : std::string("C1");
      outcome.report.model_name = model.name;
      outcome.report.matrix_form = model.reduced_solve ? "M" : "A";
      outcome.report.resolution = resolution;
      outcome.report.lambda_target = lambda_target;
      outcome.report.min_margin = e.best_margin;
      outcome.report.epsilon = e.best_epsilon;
      outcome.report.argmin_state = Vec::Zero(model.n);
      outcome.report.pass = false;
      outcome.pass = false;
    }
  } else {
    double eps = cfg.get_double("entropy", "epsilon");
    GluedEntropy glued(model.entropy, eps);
    outcome.report =
        sample_certify(model, glued_hessian_eval(glued), sub, resolution, lambda_target, threads);
    outcome.epsilon = eps;
    outcome.pass = outcome.report.pass;
  }
  try {
    auto [bound, mu] = near_diagonal_bound(model, model.entropy, resolution);
    outcome.report.near_diag_bound = bound;
    outcome.report.mu = mu;
  } catch (const MissingComparisonFunctions&) {
  }
  return outcome;
}

double default_epsilon(const CrossDiffusionModel& model) {
  double dmin = std::numeric_limits<double>::infinity();
  for (const ScalarEntropy& c : model.entropy.comp) dmin = std::min(dmin, c.d);
  return dmin / 8.0;
}

}  // namespace

CrossDiffusionModel model_from_config(const Config& cfg) {
  std::string name = cfg.get_string("model", "name");
  double d1 = cfg.get_double("model", "d1", 1.0);
  double d2 = cfg.get_double("model", "d2", 1.0);
  if (name == "heat") return heat_model(cfg.get_int("model", "n", 1), d1);
  if (name == "skt") {
    SktCoeffs alpha = list_to_coeffs(cfg.get_list("model", "alpha"), "alpha");
    SktCoeffs beta =
        list_to_coeffs(cfg.get_list("model", "beta", std::vector<double>(6, 0.0)), "beta");
    return skt_model(alpha, beta, d1, d2);
  }
  if (name == "sc")
    return sc_model(cfg.get_double("model", "mu1"), cfg.get_double("model", "mu2"), d1, d2);
  if (name == "pks")
    return hj_model(cfg.get_double("model", "delta"), cfg.get_double("model", "mu"),
                    cfg.get_double("model", "pks_beta"), d1, d2);
  if (name == "ms") {
    int n = cfg.get_int("model", "n");
    return ms_model(n, list_to_square(cfg.get_list("model", "d"), n, "d"));
  }
  if (name == "hb") {
    int n = cfg.get_int("model", "n");
    return hb_model(n, list_to_square(cfg.get_list("model", "k"), n, "k"),
                    cfg.get_bool("model", "full_interaction", true));
  }
  if (name == "toy_negdef") return toy_negdef_model();
  if (name == "toy_zero") return toy_zero_model();
  throw ConfigError("unknown model name '" + name + "'", 0, "name");
}

SpaceTimeGrid grid_from_config(const Config& cfg, int n_species) {
  SpaceTimeGrid g;
  g.dim = cfg.get_int("grid", "dim", 1);
  g.cells_per_axis = cfg.get_int("grid", "cells");
  g.dt = cfg.get_double("grid", "dt");
  g.dt_snap = cfg.get_double("grid", "dt_snap", g.dt);
  g.snapshots = cfg.get_int("grid", "snapshots");
  g.extent[0] = cfg.get_double("grid", "extent_x", 1.0);
  g.extent[1] = cfg.get_double("grid", "extent_y", 1.0);
  g.t_start = cfg.get_double("grid", "t_start", 0.0);
  g.n_species = n_species;
  g.validate();
  return g;
}

int cmd_certify(const std::string& config_path, const std::string& out_dir, int threads) {
  try {
    Config cfg = Config::parse_file(config_path);
    CrossDiffusionModel model = model_from_config(cfg);
    model.validate();
    CertifyOutcome outcome = run_certification(cfg, model, threads);

    fs::create_directories(out_dir);
    write_certification_csv((fs::path(out_dir) / "certification.csv").string(),
                            {outcome.report});
    std::string summary = certification_summary(outcome.report);
    std::ofstream txt(fs::path(out_dir) / "certification_summary.txt");
    txt << summary;
    std::cout << summary;
    return outcome.pass ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, int threads,
                 bool skip_certify) {
  try {
    Config cfg = Config::parse_file(config_path);
    CrossDiffusionModel model = model_from_config(cfg);
    model.validate();
    SpaceTimeGrid grid = grid_from_config(cfg, model.n);
    SolverConfig scfg = solver_from_config(cfg);
    InitialData initial = initial_from_config(cfg, model, grid);

    double lambda = 0.0;
    double eps = default_epsilon(model);
    if (!skip_certify) {
      CertifyOutcome outcome = run_certification(cfg, model, threads);
      if (!outcome.pass) {
        std::cerr << "certification failed (margin "
                  << format_double(outcome.report.min_margin)
                  << "); pass --skip-certify to run regardless\n";
        return 1;
      }
      lambda = outcome.report.min_margin;
      eps = outcome.epsilon;
    } else if (cfg.has("entropy", "epsilon") &&
               cfg.get_string("entropy", "epsilon") != "search") {
      eps = cfg.get_double("entropy", "epsilon");
    }

    Simulator sim(model, grid, scfg);
    Field trajectory = sim.run(initial);
    std::string prefix = cfg.get_string("output", "prefix", "run");
    fs::create_directories(out_dir);
    std::string traj_path = (fs::path(out_dir) / (prefix + ".xdif")).string();
    write_trajectory(traj_path, trajectory);

    GluedEntropy glued(model.entropy, eps);
    std::vector<EntropyReportRow> rows = entropy_report(model, glued, trajectory, lambda);
    write_entropy_csv((fs::path(out_dir) / (prefix + "_entropy.csv")).string(), rows);

    std::cout << "trajectory written to " << traj_path << " (" << grid.snapshots
              << " snapshots, " << grid.cells() << " cells, " << model.n << " species)\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_probe(const std::string& trajectory_path, const std::string& config_path,
              const std::string& out_dir, int threads) {
  Field trajectory;
  try {
    trajectory = read_trajectory(trajectory_path);
  } catch (const IoError& e) {
    std::cerr << "trajectory error: " << e.what() << "\n";
    return 2;
  }
  try {
    Config cfg = Config::parse_file(config_path);
    CrossDiffusionModel model = model_from_config(cfg);

    ProbeConfig pc;
    pc.radii = cfg.get_list("probe", "radii");
    pc.epsilon0 = cfg.get_double("probe", "epsilon0", pc.epsilon0);
    pc.epsilon1 = cfg.get_double("probe", "epsilon1", pc.epsilon1);
    pc.p = cfg.get_double("probe", "p", pc.p);
    pc.tau = cfg.get_double("probe", "tau", pc.tau);
    pc.lattice_stride = cfg.get_int("probe", "stride", pc.lattice_stride);
    pc.t0 = cfg.get_double("probe", "t0", pc.t0);
    pc.threads = threads;
    pc.validate();

    const SpaceTimeGrid& g = trajectory.grid;
    Point x0{cfg.get_double("probe", "x0", 0.5 * g.extent[0]),
             cfg.get_double("probe", "y0", 0.5 * g.extent[1])};
    double t0 = std::isnan(pc.t0) ? g.snapshot_time(g.snapshots - 1) : pc.t0;

    fs::create_directories(out_dir);
    DecayCurve curve = excess_decay_curve(trajectory, x0, t0, pc.radii);
    write_decay_csv((fs::path(out_dir) / "excess_decay.csv").string(), curve);

    std::vector<ParabolicCylinder> cylinders;
    for (double r : pc.radii)
      if (cylinder_interior(g, ParabolicCylinder{x0, t0, 4.0 * r}))
        cylinders.push_back(ParabolicCylinder{x0, t0, r});
    std::vector<RatioTableRow> rows = ratio_table(trajectory, model, cylinders, pc.p, threads);
    write_ratio_csv((fs::path(out_dir) / "ratios.csv").string(), rows, g.dim);

    std::vector<CandidatePoint> candidates = singular_candidates(trajectory, pc);
    write_candidates_csv((fs::path(out_dir) / "candidates.csv").string(), candidates, pc,
                         g.dim);

    int flagged = 0;
    for (const CandidatePoint& p : candidates) flagged += p.flagged ? 1 : 0;
    std::cout << "probe wrote excess_decay.csv, ratios.csv (" << rows.size()
              << " rows), candidates.csv (" << flagged << " flagged of " << candidates.size()
              << ")\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "probe error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_convergence(const std::string& config_path, const std::string& out_dir, int threads) {
  (void)threads;
  try {
    Config cfg = Config::parse_file(config_path);
    CrossDiffusionModel model = model_from_config(cfg);
    SpaceTimeGrid base = grid_from_config(cfg, model.n);
    SolverConfig scfg = solver_from_config(cfg);
    double horizon = base.t_end() - base.t_start;

    ManufacturedSolution exact;
    double lx = base.extent[0];
    if (model.name == "heat" && model.n == 1) {
      exact.value = [lx](const Point& x, double t) {
        Vec v(1);
        v[0] = 0.5 + 0.25 * std::exp(-t) * std::cos(M_PI * x[0] / lx);
        return v;
      };
      exact.time_derivative = [lx](const Point& x, double t) {
        Vec v(1);
        v[0] = -0.25 * std::exp(-t) * std::cos(M_PI * x[0] / lx);
        return v;
      };
      exact.space_derivative = [lx](const Point& x, double t, int) {
        Vec v(1);
        v[0] = -0.25 * M_PI / lx * std::exp(-t) * std::sin(M_PI * x[0] / lx);
        return v;
      };
    } else if (model.name == "skt") {
      exact.value = [lx](const Point& x, double t) {
        Vec v(2);
        v[0] = 0.5 + 0.1 * std::exp(-t) * std::cos(M_PI * x[0] / lx);
        v[1] = 0.5 + 0.1 * std::exp(-t) * std::cos(2.0 * M_PI * x[0] / lx);
        return v;
      };
      exact.time_derivative = [lx](const Point& x, double t) {
        Vec v(2);
        v[0] = -0.1 * std::exp(-t) * std::cos(M_PI * x[0] / lx);
        v[1] = -0.1 * std::exp(-t) * std::cos(2.0 * M_PI * x[0] / lx);
        return v;
      };
      exact.space_derivative = [lx](const Point& x, double t, int) {
        Vec v(2);
        v[0] = -0.1 * M_PI / lx * std::exp(-t) * std::sin(M_PI * x[0] / lx);
        v[1] = -0.2 * M_PI / lx * std::exp(-t) * std::sin(2.0 * M_PI * x[0] / lx);
        return v;
      };
    } else {
      throw ConfigError("convergence study supports model names 'heat' and 'skt'", 0, "name");
    }

    fs::create_directories(out_dir);

    std::vector<double> dts, dt_errors;
    for (int level = 0; level < 3; ++level) {
      SpaceTimeGrid g = base;
      g.dt = base.dt / std::pow(2.0, level);
      g.dt_snap = horizon;
      g.snapshots = 2;
      dts.push_back(g.dt);
      dt_errors.push_back(manufactured_run_error(model, g, exact, scfg));
    }
    double dt_order = fitted_order(dts, dt_errors);
    write_convergence_csv((fs::path(out_dir) / "convergence_dt.csv").string(), dts, dt_errors,
                          "dt", dt_order);

    std::vector<double> hs, h_errors;
    for (int level = 0; level < 3; ++level) {
      SpaceTimeGrid g = base;
      g.cells_per_axis = base.cells_per_axis << level;
      g.dt = base.dt / std::pow(4.0, level);
      g.dt_snap = horizon;
      g.snapshots = 2;
      hs.push_back(g.h(0));
      h_errors.push_back(manufactured_run_error(model, g, exact, scfg));
    }
    double h_order = fitted_order(hs, h_errors);
    write_convergence_csv((fs::path(out_dir) / "convergence_hx.csv").string(), hs, h_errors,
                          "hx", h_order);

    std::cout << "fitted order in dt: " << format_double(dt_order) << "\n";
    std::cout << "fitted order in hx: " << format_double(h_order) << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace xdiff
