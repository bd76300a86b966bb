#include "xdiff/solver.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <utility>

#include "xdiff/errors.hpp"
#include "xdiff/verifier.hpp"

namespace xdiff {

namespace {

using Sparse = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct Stencil {
  // Neighbor cell index per face, -1 at a no-flux boundary; coefficient
  // vol/h_axis^2 per face.
  std::vector<std::array<int, 4>> neighbor;
  std::vector<std::array<double, 4>> face_coeff;
  int faces = 2;
};

Stencil build_stencil(const SpaceTimeGrid& g) {
  Stencil st;
  st.faces = 2 * g.dim;
  int nc = g.cells();
  st.neighbor.assign(static_cast<size_t>(nc), {-1, -1, -1, -1});
  st.face_coeff.assign(static_cast<size_t>(nc), {0.0, 0.0, 0.0, 0.0});
  double vol = g.cell_volume();
  for (int cell = 0; cell < nc; ++cell) {
    auto c = g.cell_coords(cell);
    for (int axis = 0; axis < g.dim; ++axis) {
      double coeff = vol / (g.h(axis) * g.h(axis));
      for (int side = 0; side < 2; ++side) {
        int face = 2 * axis + side;
        int delta = side == 0 ? -1 : 1;
        std::array<int, 2> nb = {c[0], c[1]};
        nb[static_cast<size_t>(axis)] += delta;
        if (nb[static_cast<size_t>(axis)] < 0 || nb[static_cast<size_t>(axis)] >= g.cells_per_axis)
          continue;
        st.neighbor[static_cast<size_t>(cell)][static_cast<size_t>(face)] =
            g.cell_index(nb[0], nb[1]);
        st.face_coeff[static_cast<size_t>(cell)][static_cast<size_t>(face)] = coeff;
      }
    }
  }
  return st;
}

Vec implicit_step(const CrossDiffusionModel& model, const SpaceTimeGrid& grid,
                  const SolverConfig& cfg, const Stencil& st, const Vec& prev, double t_next,
                  const SourceTerm& source, long& newton_total) {
  const int nc = grid.cells();
  const int ns = model.solve_species();
  const int dof = nc * ns;
  const double vol = grid.cell_volume();
  const double dt = grid.dt;
  const auto mat_a = model.reduced_solve ? model.A_reduced : model.A;
  const auto fn_f = model.reduced_solve ? model.f_reduced : model.f;
  const Vec mass = model.reduced_solve ? Vec::Ones(ns) : model.mass_diag;

  Vec upper(ns);
  for (int s = 0; s < ns; ++s) upper[s] = model.domain_upper[s];
  const bool cap_sum = model.reduced_solve;

  Vec src = Vec::Zero(dof);
  if (source)
    for (int cell = 0; cell < nc; ++cell) {
      Vec sv = source(grid.cell_center(cell), t_next);
      if (sv.size() != ns) throw Error("source term dimension mismatch");
      src.segment(cell * ns, ns) = sv;
    }

  auto in_box = [&](const Vec& flat) {
    for (int cell = 0; cell < nc; ++cell) {
      double sum = 0.0;
      for (int s = 0; s < ns; ++s) {
        double v = flat[cell * ns + s];
        if (v < -cfg.positivity_margin || v > upper[s] + cfg.positivity_margin) return false;
        sum += v;
      }
      if (cap_sum && sum > 1.0 + cfg.positivity_margin) return false;
    }
    return true;
  };

  // Residual F(U) = vol*B*(U - U^m)/dt - sum_faces coeff*Abar*(U_nb - U_c)
  //                 - vol*(f(U) + s).
  auto residual = [&](const Vec& flat, std::vector<Mat>& a_cells) {
    Vec res(dof);
    a_cells.resize(static_cast<size_t>(nc));
    for (int cell = 0; cell < nc; ++cell) {
      Vec u = flat.segment(cell * ns, ns);
      a_cells[static_cast<size_t>(cell)] = mat_a(u);
      Vec r = vol / dt * mass.cwiseProduct(u - prev.segment(cell * ns, ns));
      r -= vol * fn_f(u);
      r -= vol * src.segment(cell * ns, ns);
      res.segment(cell * ns, ns) = r;
    }
    for (int cell = 0; cell < nc; ++cell)
      for (int face = 0; face < st.faces; ++face) {
        int nb = st.neighbor[static_cast<size_t>(cell)][static_cast<size_t>(face)];
        if (nb < 0) continue;
        double coeff = st.face_coeff[static_cast<size_t>(cell)][static_cast<size_t>(face)];
        Mat abar = 0.5 * (a_cells[static_cast<size_t>(cell)] + a_cells[static_cast<size_t>(nb)]);
        res.segment(cell * ns, ns) -=
            coeff * abar * (flat.segment(nb * ns, ns) - flat.segment(cell * ns, ns));
      }
    if (!res.allFinite()) throw NonFiniteMatrix("non-finite residual during Newton iteration");
    return res;
  };

  Vec state = prev;
  std::vector<Mat> a_cells;
  Vec res = residual(state, a_cells);
  double scale = dt / (vol * (1.0 + state.cwiseAbs().maxCoeff()));

  for (int iter = 0; iter < cfg.newton_max_iters; ++iter) {
    if (res.cwiseAbs().maxCoeff() * scale <= cfg.newton_tol) {
      newton_total += iter;
      for (int i = 0; i < dof; ++i) {
        double hi = upper[i % ns];
        if (state[i] < 0.0) state[i] = 0.0;
        if (state[i] > hi) state[i] = hi;
      }
      return state;
    }

    // Coefficient derivatives by forward differences at the evaluator level.
    std::vector<Mat> da(static_cast<size_t>(nc) * static_cast<size_t>(ns));
    std::vector<Mat> df(static_cast<size_t>(nc));
    for (int cell = 0; cell < nc; ++cell) {
      Vec u = state.segment(cell * ns, ns);
      Vec f0 = fn_f(u);
      df[static_cast<size_t>(cell)] = Mat::Zero(ns, ns);
      for (int j = 0; j < ns; ++j) {
        double delta = cfg.fd_step * std::max(1.0, std::abs(u[j]));
        Vec up = u;
        up[j] += delta;
        da[static_cast<size_t>(cell * ns + j)] =
            (mat_a(up) - a_cells[static_cast<size_t>(cell)]) / delta;
        df[static_cast<size_t>(cell)].col(j) = (fn_f(up) - f0) / delta;
      }
    }

    std::vector<Triplet> trip;
    trip.reserve(static_cast<size_t>(dof) * static_cast<size_t>(ns) *
                 static_cast<size_t>(st.faces + 1));
    for (int cell = 0; cell < nc; ++cell) {
      Mat diag = Mat::Zero(ns, ns);
      for (int s = 0; s < ns; ++s) diag(s, s) = vol / dt * mass[s];
      diag -= vol * df[static_cast<size_t>(cell)];
      for (int face = 0; face < st.faces; ++face) {
        int nb = st.neighbor[static_cast<size_t>(cell)][static_cast<size_t>(face)];
        if (nb < 0) continue;
        double coeff = st.face_coeff[static_cast<size_t>(cell)][static_cast<size_t>(face)];
        Mat abar = 0.5 * (a_cells[static_cast<size_t>(cell)] + a_cells[static_cast<size_t>(nb)]);
        Vec jump = state.segment(nb * ns, ns) - state.segment(cell * ns, ns);
        diag += coeff * abar;
        Mat off = -coeff * abar;
        for (int j = 0; j < ns; ++j) {
          Vec dj_c = 0.5 * da[static_cast<size_t>(cell * ns + j)] * jump;
          Vec dj_n = 0.5 * da[static_cast<size_t>(nb * ns + j)] * jump;
          for (int i = 0; i < ns; ++i) {
            diag(i, j) -= coeff * dj_c[i];
            off(i, j) -= coeff * dj_n[i];
          }
        }
        for (int i = 0; i < ns; ++i)
          for (int j = 0; j < ns; ++j)
            trip.emplace_back(cell * ns + i, nb * ns + j, off(i, j));
      }
      for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ns; ++j)
          trip.emplace_back(cell * ns + i, cell * ns + j, diag(i, j));
    }

    Sparse jac(dof, dof);
    jac.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Sparse> lu(jac);
    if (lu.info() != Eigen::Success)
      throw LinearSolveFailed("sparse LU factorization failed at t = " + std::to_string(t_next));
    Vec delta = lu.solve(-res);
    if (lu.info() != Eigen::Success || !delta.allFinite())
      throw LinearSolveFailed("sparse LU solve failed at t = " + std::to_string(t_next));

    double alpha = 1.0;
    int halvings = 0;
    while (halvings <= cfg.damping_max_halvings && !in_box(state + alpha * delta)) {
      alpha *= 0.5;
      ++halvings;
    }
    if (halvings > cfg.damping_max_halvings)
      throw PositivityLost("Newton update leaves the state box at t = " + std::to_string(t_next));
    state += alpha * delta;
    res = residual(state, a_cells);
  }
  throw NewtonDiverged("Newton failed to reach tolerance " + std::to_string(cfg.newton_tol) +
                       " within " + std::to_string(cfg.newton_max_iters) +
                       " iterations at t = " + std::to_string(t_next));
}

}  // namespace

Simulator::Simulator(CrossDiffusionModel model, SpaceTimeGrid grid, SolverConfig cfg)
    : model_(std::move(model)), grid_(std::move(grid)), cfg_(cfg) {
  grid_.validate();
  if (grid_.n_species != model_.n)
    throw Error("grid carries " + std::to_string(grid_.n_species) + " species but model " +
                model_.name + " has " + std::to_string(model_.n));
  if (model_.dim_restriction != 0 && grid_.dim != model_.dim_restriction)
    throw Error("model " + model_.name + " is posed in dimension " +
                std::to_string(model_.dim_restriction));
  double ratio = grid_.dt_snap / grid_.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || ratio < 1.0 - 1e-9)
    throw Error("dt_snap must be an integer multiple of dt");
}

Field Simulator::run(const InitialData& initial, const SourceTerm& source) {
  const int nc = grid_.cells();
  const int ns = model_.solve_species();
  const Stencil stencil = build_stencil(grid_);

  Vec state(nc * ns);
  for (int cell = 0; cell < nc; ++cell) {
    Vec u0 = initial(grid_.cell_center(cell));
    if (u0.size() != ns)
      throw Error("initial data has " + std::to_string(u0.size()) + " species, expected " +
                  std::to_string(ns));
    state.segment(cell * ns, ns) = u0;
  }

  entropy_history_.clear();
  mass_history_.clear();
  newton_total_ = 0;

  Field out = Field::zeros(grid_);
  auto record = [&](int snap, const Vec& flat) {
    double vol = grid_.cell_volume();
    double entropy = 0.0;
    Vec mass = Vec::Zero(model_.n);
    for (int cell = 0; cell < nc; ++cell) {
      Vec full = model_.expand_state(flat.segment(cell * ns, ns));
      for (int s = 0; s < model_.n; ++s) out.at(snap, cell, s) = full[s];
      mass += vol * full;
      if (cfg_.record_entropy)
        for (int s = 0; s < model_.n; ++s)
          entropy += vol * model_.entropy.comp[static_cast<size_t>(s)].h(full[s]);
    }
    mass_history_.push_back(mass);
    if (cfg_.record_entropy) entropy_history_.push_back(entropy);
  };
  record(0, state);

  long steps_per_snap = std::lround(grid_.dt_snap / grid_.dt);
  for (int snap = 1; snap < grid_.snapshots; ++snap) {
    double t_base = grid_.snapshot_time(snap - 1);
    for (long k = 0; k < steps_per_snap; ++k) {
      double t_next = t_base + (k + 1) * grid_.dt;
      state = implicit_step(model_, grid_, cfg_, stencil, state, t_next, source, newton_total_);
    }
    record(snap, state);
  }
  return out;
}

std::vector<EntropyReportRow> entropy_report(const CrossDiffusionModel& model,
                                             const GluedEntropy& glued, const Field& trajectory,
                                             double lambda) {
  const SpaceTimeGrid& g = trajectory.grid;
  if (g.n_species != model.n || glued.n() != model.n)
    throw Error("entropy_report: species mismatch");
  const double vol = g.cell_volume();
  std::vector<EntropyReportRow> rows;
  rows.reserve(static_cast<size_t>(g.snapshots));
  for (int snap = 0; snap < g.snapshots; ++snap) {
    EntropyReportRow row;
    row.snap = snap;
    row.time = g.snapshot_time(snap);
    for (int cell = 0; cell < g.cells(); ++cell) {
      Vec u = trajectory.state(snap, cell);
      auto [value, grad] = glued.value_and_grad(u);
      row.entropy += vol * value;
      row.reaction += vol * model.f(u).dot(grad);
      row.dissipation += lambda * vol * discrete_gradient(trajectory, snap, cell).squaredNorm();
    }
    row.delta = rows.empty() ? 0.0 : row.entropy - rows.back().entropy;
    rows.push_back(row);
  }
  return rows;
}

FrozenResult solve_frozen(const CrossDiffusionModel& model, const GluedEntropy& glued,
                          const Field& trajectory, const FrozenProblem& problem) {
  const SpaceTimeGrid& g = trajectory.grid;
  if (g.n_species != model.n) throw Error("solve_frozen: species mismatch");
  if (problem.freeze_state.size() != model.n)
    throw Error("solve_frozen: freeze state dimension mismatch");
  const ParabolicCylinder& cyl = problem.solve_cyl;
  std::vector<int> cells = covered_cells(g, cyl.x0, cyl.R);
  std::vector<int> snaps = covered_snapshots(g, cyl.t0, cyl.R);
  if (cells.empty() || snaps.empty())
    throw EmptyCylinder("parabolic cylinder covers no grid cells or snapshots");

  FrozenResult result;
  result.covered_cells = cells;
  result.covered_snapshots = snaps;
  result.first_snapshot = snaps.front();
  result.frozen_matrix = model.A(problem.freeze_state);
  if (!result.frozen_matrix.allFinite())
    throw NonFiniteMatrix("frozen diffusion matrix has non-finite entries");

  Vec hess = glued.hessian_diag(problem.freeze_state);
  for (int s = 0; s < model.n; ++s)
    if (!(hess[s] > 0.0))
      throw Error("frozen symmetrizer is not positive definite at the freeze state");
  result.symmetrizer = hess.cwiseSqrt();
  Subspace sub = model.constraint == Constraint::VolumeFilling ? Subspace::zero_sum(model.n)
                                                               : Subspace::full(model.n);
  result.margin = coercivity_margin(hess, result.frozen_matrix, sub);
  if (result.margin <= 0.0)
    throw Error("frozen system lacks a positive coercivity margin at the freeze state");

  result.field = trajectory;
  const int ns = model.n;
  const int n_int = static_cast<int>(cells.size());
  std::vector<int> slot(static_cast<size_t>(g.cells()), -1);
  for (int i = 0; i < n_int; ++i) slot[static_cast<size_t>(cells[i])] = i;

  Stencil st = build_stencil(g);
  const double vol = g.cell_volume();
  const double dt = g.dt_snap;
  const Vec& b_diag = result.symmetrizer;
  // System in w = B ubar: the diffusion block becomes Ahat = B A B^{-1} and
  // the mass matrix is unchanged (both diagonal).
  Mat ahat = b_diag.asDiagonal() * result.frozen_matrix * b_diag.cwiseInverse().asDiagonal();
  const Vec mass = model.mass_diag;
  const int dof = n_int * ns;

  std::vector<Triplet> trip;
  for (int i = 0; i < n_int; ++i) {
    int cell = cells[static_cast<size_t>(i)];
    Mat diag = Mat::Zero(ns, ns);
    for (int s = 0; s < ns; ++s) diag(s, s) = vol / dt * mass[s];
    for (int face = 0; face < st.faces; ++face) {
      int nb = st.neighbor[static_cast<size_t>(cell)][static_cast<size_t>(face)];
      if (nb < 0) continue;
      double coeff = st.face_coeff[static_cast<size_t>(cell)][static_cast<size_t>(face)];
      diag += coeff * ahat;
      if (slot[static_cast<size_t>(nb)] >= 0) {
        Mat off = -coeff * ahat;
        for (int r = 0; r < ns; ++r)
          for (int c = 0; c < ns; ++c)
            trip.emplace_back(i * ns + r, slot[static_cast<size_t>(nb)] * ns + c, off(r, c));
      }
    }
    for (int r = 0; r < ns; ++r)
      for (int c = 0; c < ns; ++c) trip.emplace_back(i * ns + r, i * ns + c, diag(r, c));
  }
  Sparse sys(dof, dof);
  sys.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Sparse> lu(sys);
  if (lu.info() != Eigen::Success)
    throw LinearSolveFailed("frozen system factorization failed");

  Vec w(dof);
  for (int i = 0; i < n_int; ++i)
    w.segment(i * ns, ns) =
        b_diag.cwiseProduct(trajectory.state(snaps.front(), cells[static_cast<size_t>(i)]));

  for (size_t step_idx = 1; step_idx < snaps.size(); ++step_idx) {
    int snap = snaps[step_idx];
    if (snaps[step_idx - 1] + 1 != snap) throw Error("covered snapshots are not contiguous");
    Vec rhs(dof);
    for (int i = 0; i < n_int; ++i) {
      int cell = cells[static_cast<size_t>(i)];
      Vec b = vol / dt * mass.cwiseProduct(w.segment(i * ns, ns));
      b += vol * b_diag.cwiseProduct(model.f(trajectory.state(snap, cell)));
      for (int face = 0; face < st.faces; ++face) {
        int nb = st.neighbor[static_cast<size_t>(cell)][static_cast<size_t>(face)];
        if (nb < 0 || slot[static_cast<size_t>(nb)] >= 0) continue;
        double coeff = st.face_coeff[static_cast<size_t>(cell)][static_cast<size_t>(face)];
        b += coeff * ahat * b_diag.cwiseProduct(trajectory.state(snap, nb));
      }
      rhs.segment(i * ns, ns) = b;
    }
    w = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !w.allFinite())
      throw LinearSolveFailed("frozen system solve failed");
    for (int i = 0; i < n_int; ++i)
      for (int s = 0; s < ns; ++s)
        result.field.at(snap, cells[static_cast<size_t>(i)], s) = w[i * ns + s] / b_diag[s];
  }
  return result;
}

Vec manufactured_source(const CrossDiffusionModel& model, const ManufacturedSolution& exact,
                        const Point& x, double t, int dim, double fd_delta) {
  const int ns = model.solve_species();
  const auto mat_a = model.reduced_solve ? model.A_reduced : model.A;
  const Vec mass = model.reduced_solve ? Vec::Ones(ns) : model.mass_diag;
  auto flux = [&](const Point& z, int axis) -> Vec {
    return mat_a(exact.value(z, t)) * exact.space_derivative(z, t, axis);
  };
  Vec div = Vec::Zero(ns);
  for (int axis = 0; axis < dim; ++axis) {
    auto shifted = [&](double k) {
      Point z = x;
      z[static_cast<size_t>(axis)] += k * fd_delta;
      return flux(z, axis);
    };
    div += (-shifted(2.0) + 8.0 * shifted(1.0) - 8.0 * shifted(-1.0) + shifted(-2.0)) /
           (12.0 * fd_delta);
  }
  const auto fn_f = model.reduced_solve ? model.f_reduced : model.f;
  return mass.cwiseProduct(exact.time_derivative(x, t)) - div - fn_f(exact.value(x, t));
}

double manufactured_run_error(const CrossDiffusionModel& model, const SpaceTimeGrid& grid,
                              const ManufacturedSolution& exact, const SolverConfig& cfg) {
  Simulator sim(model, grid, cfg);
  SourceTerm source = [&](const Point& x, double t) {
    return manufactured_source(model, exact, x, t, grid.dim);
  };
  InitialData initial = [&](const Point& x) { return exact.value(x, grid.t_start); };
  Field out = sim.run(initial, source);
  double err2 = 0.0;
  for (int snap = 1; snap < grid.snapshots; ++snap) {
    double t = grid.snapshot_time(snap);
    for (int cell = 0; cell < grid.cells(); ++cell) {
      Vec target = model.expand_state(exact.value(grid.cell_center(cell), t));
      Vec got = out.state(snap, cell);
      err2 += grid.cell_volume() * grid.dt_snap * (got - target).squaredNorm();
    }
  }
  return std::sqrt(err2);
}

double fitted_order(const std::vector<double>& scales, const std::vector<double>& errors) {
  if (scales.size() != errors.size() || scales.size() < 2)
    throw Error("fitted_order needs matching sample lists with at least two entries");
  const int n = static_cast<int>(scales.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    double lx = std::log(scales[static_cast<size_t>(i)]);
    double ly = std::log(errors[static_cast<size_t>(i)]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace xdiff
