#ifndef XDIFF_SOLVER_HPP
#define XDIFF_SOLVER_HPP

#include <functional>
#include <vector>

#include "xdiff/grid.hpp"
#include "xdiff/models.hpp"

namespace xdiff {

struct SolverConfig {
  double newton_tol = 1e-10;      // on the dt-scaled residual max-norm
  int newton_max_iters = 50;
  double fd_step = 1e-7;          // relative step for coefficient derivatives
  int damping_max_halvings = 40;
  double positivity_margin = 1e-14;  // box inflation during damping
  bool record_entropy = true;
};

using InitialData = std::function<Vec(const Point&)>;
using SourceTerm = std::function<Vec(const Point&, double)>;

// Cell-centered finite volumes on the uniform grid, no-flux boundary, fully
// implicit Euler in time; face diffusion coefficients are the arithmetic
// average of A at the two adjacent cells, and each step is solved by damped
// Newton with a sparse LU factorization. Models with reduced_solve evolve
// the reduced unknowns and the recorded field carries the expanded species.
class Simulator {
 public:
  Simulator(CrossDiffusionModel model, SpaceTimeGrid grid, SolverConfig cfg = {});

  // Steps from t_start to t_end, recording grid.snapshots slices every
  // dt_snap (snapshot 0 is the initial data). initial maps cell centers to
  // solve-space states; source, when given, adds s(x, t^{m+1}) to the right
  // hand side and is expressed in solve space as well.
  Field run(const InitialData& initial, const SourceTerm& source = {});

  // Entropy of each recorded snapshot: sum of cell volumes times the model's
  // base entropy density at the full-species state.
  const std::vector<double>& entropy_history() const { return entropy_history_; }
  // Per-species masses of each recorded snapshot, full species.
  const std::vector<Vec>& mass_history() const { return mass_history_; }
  long total_newton_iterations() const { return newton_total_; }

  const CrossDiffusionModel& model() const { return model_; }
  const SpaceTimeGrid& grid() const { return grid_; }

 private:
  CrossDiffusionModel model_;
  SpaceTimeGrid grid_;
  SolverConfig cfg_;
  std::vector<double> entropy_history_;
  std::vector<Vec> mass_history_;
  long newton_total_ = 0;
};

// Per-snapshot entropy budget of a recorded trajectory under the glued
// entropy: H^k, its increment, the dissipation proxy lambda*sum|grad_h u|^2,
// and the reaction term sum f(u).h_eps'(u), all volume-weighted.
struct EntropyReportRow {
  int snap = 0;
  double time = 0.0;
  double entropy = 0.0;
  double delta = 0.0;        // H^k - H^{k-1}; 0 for the first row
  double dissipation = 0.0;  // lambda * integral of |grad_h u|^2
  double reaction = 0.0;     // integral of f(u) . h_eps'(u)
};
std::vector<EntropyReportRow> entropy_report(const CrossDiffusionModel& model,
                                             const GluedEntropy& glued, const Field& trajectory,
                                             double lambda);

// Linear companion problem with the diffusion matrix frozen at a cylinder
// average: solve d_t ubar - div(A(freeze) grad ubar) = f(u) on solve_cyl,
// with ubar = u on the parabolic boundary (initial slice and every cell
// outside the covered ball, values from the trajectory) and the source
// sampled from the trajectory. The linear systems are assembled in the
// symmetrized variable w = B ubar, B = sqrt(h_eps''(freeze)).
struct FrozenProblem {
  Vec freeze_state;           // (u)_{z0,R}, full species
  ParabolicCylinder solve_cyl;  // C_{R/8}(z0)
};

struct FrozenResult {
  Field field;          // trajectory with covered cells replaced by ubar
  Mat frozen_matrix;    // A(freeze_state)
  Vec symmetrizer;      // diagonal of B
  double margin = 0.0;  // coercivity margin of h''(freeze) A(freeze)
  int first_snapshot = 0;
  std::vector<int> covered_cells;
  std::vector<int> covered_snapshots;
};

FrozenResult solve_frozen(const CrossDiffusionModel& model, const GluedEntropy& glued,
                          const Field& trajectory, const FrozenProblem& problem);

// A manufactured solution: analytic value, time derivative, and first
// spatial derivative along each axis, all in solve space.
struct ManufacturedSolution {
  std::function<Vec(const Point&, double)> value;
  std::function<Vec(const Point&, double)> time_derivative;
  std::function<Vec(const Point&, double, int)> space_derivative;
};

// Source making the manufactured solution exact:
// s = B dt u* - div(A(u*) grad u*) - f(u*), with the divergence taken by
// fourth-order central differences of the analytic flux.
Vec manufactured_source(const CrossDiffusionModel& model, const ManufacturedSolution& exact,
                        const Point& x, double t, int dim, double fd_delta = 1e-3);

// Space-time L2 error of the run against the manufactured solution
// (midpoint in space, dt_snap weights in time, initial slice excluded).
double manufactured_run_error(const CrossDiffusionModel& model, const SpaceTimeGrid& grid,
                              const ManufacturedSolution& exact, const SolverConfig& cfg = {});

// Least-squares slope of log(err) against log(scale).
double fitted_order(const std::vector<double>& scales, const std::vector<double>& errors);

}  // namespace xdiff

#endif
