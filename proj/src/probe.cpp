#include "xdiff/probe.hpp"

#include <algorithm>
#include <cmath>

#include "xdiff/errors.hpp"
#include "xdiff/parallel.hpp"

namespace xdiff {

namespace {

struct Covered {
  std::vector<int> cells;
  std::vector<int> snaps;
  double measure = 0.0;  // cellvol * dt_snap per covered pair
  long pairs() const { return static_cast<long>(cells.size()) * static_cast<long>(snaps.size()); }
};

Covered cover(const Field& f, const ParabolicCylinder& cyl) {
  Covered c;
  c.cells = covered_cells(f.grid, cyl.x0, cyl.R);
  c.snaps = covered_snapshots(f.grid, cyl.t0, cyl.R);
  if (c.cells.empty() || c.snaps.empty())
    throw EmptyCylinder("parabolic cylinder covers no grid cells or snapshots");
  c.measure = f.grid.cell_volume() * f.grid.dt_snap;
  return c;
}

ParabolicCylinder scaled(const ParabolicCylinder& cyl, double factor) {
  return ParabolicCylinder{cyl.x0, cyl.t0, factor * cyl.R};
}

double sup_reaction_sq(const Field& f, const CrossDiffusionModel& model, const Covered& c) {
  double sup = 0.0;
  for (int snap : c.snaps)
    for (int cell : c.cells)
      sup = std::max(sup, model.f(f.state(snap, cell)).cwiseAbs().maxCoeff());
  return sup * sup;
}

double grad_energy(const Field& f, const Covered& c) {
  double acc = 0.0;
  for (int snap : c.snaps)
    for (int cell : c.cells) acc += discrete_gradient(f, snap, cell).squaredNorm();
  return acc * c.measure;
}

}  // namespace

void ProbeConfig::validate() const {
  if (radii.empty()) throw Error("probe config needs a non-empty radii list");
  for (size_t i = 0; i + 1 < radii.size(); ++i)
    if (radii[i] <= radii[i + 1]) throw Error("probe radii must be sorted descending");
  if (radii.back() <= 0.0) throw Error("probe radii must be positive");
  if (!(epsilon0 > 0.0) || !(epsilon1 > 0.0)) throw Error("probe thresholds must be positive");
  if (!(p > 2.0)) throw Error("reverse-Hoelder exponent must exceed 2");
  if (!(tau > 0.0) || tau > 1.0 / 16.0) throw Error("tau must lie in (0, 1/16]");
  if (lattice_stride < 1) throw Error("lattice stride must be at least 1");
}

double tilt_excess(const Field& trajectory, const ParabolicCylinder& cyl) {
  Covered c = cover(trajectory, cyl);
  Vec mean = mean_on_cylinder(trajectory, cyl);
  double acc = 0.0;
  for (int snap : c.snaps)
    for (int cell : c.cells) acc += (trajectory.state(snap, cell) - mean).squaredNorm();
  return acc / double(c.pairs());
}

double gradient_excess(const Field& trajectory, const ParabolicCylinder& cyl) {
  Covered c = cover(trajectory, cyl);
  Mat mean = Mat::Zero(trajectory.grid.n_species, trajectory.grid.dim);
  for (int snap : c.snaps)
    for (int cell : c.cells) mean += discrete_gradient(trajectory, snap, cell);
  mean /= double(c.pairs());
  double acc = 0.0;
  for (int snap : c.snaps)
    for (int cell : c.cells)
      acc += (discrete_gradient(trajectory, snap, cell) - mean).squaredNorm();
  return acc / double(c.pairs());
}

double gradient_density(const Field& trajectory, const ParabolicCylinder& cyl) {
  Covered c = cover(trajectory, cyl);
  return grad_energy(trajectory, c) / std::pow(cyl.R, trajectory.grid.dim);
}

DecayCurve excess_decay_curve(const Field& trajectory, const Point& x0, double t0,
                              const std::vector<double>& radii) {
  DecayCurve curve;
  const double floor = 1e-300;
  bool all_flat = true;
  for (double r : radii) {
    double phi = tilt_excess(trajectory, ParabolicCylinder{x0, t0, r});
    curve.points.emplace_back(r, phi);
    if (phi > floor) all_flat = false;
  }
  if (all_flat || curve.points.size() < 2) {
    curve.flat = all_flat;
    return curve;
  }
  std::vector<double> rs, phis;
  for (auto& [r, phi] : curve.points)
    if (phi > floor) {
      rs.push_back(r);
      phis.push_back(phi);
    }
  if (rs.size() < 2) {
    curve.flat = false;
    return curve;
  }
  curve.slope = fitted_order(rs, phis);
  curve.alpha = 0.5 * curve.slope;
  return curve;
}

RatioResult caccioppoli_ratio(const Field& trajectory, const CrossDiffusionModel& model,
                              const ParabolicCylinder& cyl) {
  Covered inner = cover(trajectory, cyl);
  Covered outer = cover(trajectory, scaled(cyl, 2.0));
  RatioResult res;
  res.lhs = grad_energy(trajectory, inner);
  double osc = 0.0;
  for (int snap : outer.snaps) {
    Vec ref = weighted_mean(trajectory, cyl.x0, cyl.R, snap);
    for (int cell : outer.cells)
      osc += (trajectory.state(snap, cell) - ref).squaredNorm();
  }
  osc *= outer.measure;
  int d = trajectory.grid.dim;
  res.rhs = osc / (cyl.R * cyl.R) +
            std::pow(cyl.R, d + 4) * sup_reaction_sq(trajectory, model, outer);
  if (res.rhs < 1e-30) {
    res.degenerate = true;
    return res;
  }
  res.value = res.lhs / res.rhs;
  return res;
}

RatioResult poincare_ratio(const Field& trajectory, const ParabolicCylinder& cyl,
                           const CrossDiffusionModel* model) {
  Covered inner = cover(trajectory, cyl);
  Covered outer = cover(trajectory, scaled(cyl, 2.0));
  RatioResult res;
  Vec mean = mean_on_cylinder(trajectory, cyl);
  double osc = 0.0;
  for (int snap : inner.snaps)
    for (int cell : inner.cells) osc += (trajectory.state(snap, cell) - mean).squaredNorm();
  res.lhs = osc * inner.measure;
  int d = trajectory.grid.dim;
  res.rhs = cyl.R * cyl.R * grad_energy(trajectory, outer);
  if (model)
    res.rhs += std::pow(cyl.R, d + 6) * sup_reaction_sq(trajectory, *model, outer);
  if (res.rhs < 1e-30) {
    res.degenerate = true;
    return res;
  }
  res.value = res.lhs / res.rhs;
  return res;
}

double reverse_holder_ratio(const Field& trajectory, const ParabolicCylinder& cyl, double p) {
  if (!(p > 2.0)) throw Error("reverse-Hoelder exponent must exceed 2");
  Covered inner = cover(trajectory, cyl);
  Covered outer = cover(trajectory, scaled(cyl, 4.0));
  double lhs = 0.0;
  for (int snap : inner.snaps)
    for (int cell : inner.cells)
      lhs += std::pow(discrete_gradient(trajectory, snap, cell).norm(), p);
  lhs /= double(inner.pairs());
  double rhs = 0.0;
  for (int snap : outer.snaps)
    for (int cell : outer.cells) rhs += discrete_gradient(trajectory, snap, cell).squaredNorm();
  rhs /= double(outer.pairs());
  return std::pow(lhs, 1.0 / p) / (std::sqrt(rhs) + cyl.R);
}

std::vector<CandidatePoint> singular_candidates(const Field& trajectory, const ProbeConfig& cfg) {
  cfg.validate();
  const SpaceTimeGrid& g = trajectory.grid;
  double t0 = std::isnan(cfg.t0) ? g.snapshot_time(g.snapshots - 1) : cfg.t0;
  double r_min = cfg.radii.back();

  std::vector<int> lattice;
  for (int cell = 0; cell < g.cells(); ++cell) {
    auto c = g.cell_coords(cell);
    bool on_stride = c[0] % cfg.lattice_stride == 0 &&
                     (g.dim == 1 || c[1] % cfg.lattice_stride == 0);
    if (!on_stride) continue;
    if (cylinder_interior(g, ParabolicCylinder{g.cell_center(cell), t0, r_min}))
      lattice.push_back(cell);
  }

  std::vector<CandidatePoint> out(lattice.size());
  int threads = resolve_threads(cfg.threads);
  parallel_for(static_cast<int>(lattice.size()), threads, [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      int cell = lattice[static_cast<size_t>(i)];
      CandidatePoint pt;
      pt.cell = cell;
      pt.x0 = g.cell_center(cell);
      pt.t0 = t0;
      pt.min_excess = std::numeric_limits<double>::infinity();
      pt.min_grad_density = std::numeric_limits<double>::infinity();
      for (double r : cfg.radii) {
        ParabolicCylinder cyl{pt.x0, t0, r};
        if (!cylinder_interior(g, cyl)) continue;
        pt.min_excess = std::min(pt.min_excess, tilt_excess(trajectory, cyl));
        pt.min_grad_density = std::min(pt.min_grad_density, gradient_density(trajectory, cyl));
      }
      pt.flagged = pt.min_excess > cfg.epsilon0 || pt.min_grad_density > cfg.epsilon1;
      out[static_cast<size_t>(i)] = pt;
    }
  });
  return out;
}

FrozenComparison frozen_comparison(const Field& trajectory, const CrossDiffusionModel& model,
                                   const GluedEntropy& glued, const Point& x0, double t0,
                                   double R) {
  ParabolicCylinder big{x0, t0, R};
  FrozenProblem problem;
  problem.freeze_state = mean_on_cylinder(trajectory, big);
  problem.solve_cyl = ParabolicCylinder{x0, t0, R / 8.0};
  FrozenResult frozen = solve_frozen(model, glued, trajectory, problem);

  Covered c = cover(trajectory, problem.solve_cyl);
  FrozenComparison cmp;
  cmp.margin = frozen.margin;
  for (int snap : c.snaps)
    for (int cell : c.cells) {
      Mat gu = discrete_gradient(trajectory, snap, cell);
      Mat gbar = discrete_gradient(frozen.field, snap, cell);
      cmp.error_energy += (gbar - gu).squaredNorm();
      cmp.solution_energy += gu.squaredNorm();
    }
  cmp.error_energy *= c.measure;
  cmp.solution_energy *= c.measure;
  if (cmp.solution_energy < 1e-30) {
    cmp.degenerate = true;
    return cmp;
  }
  cmp.ratio = cmp.error_energy / cmp.solution_energy;
  return cmp;
}

std::vector<RatioTableRow> ratio_table(const Field& trajectory, const CrossDiffusionModel& model,
                                       const std::vector<ParabolicCylinder>& cylinders, double p,
                                       int threads) {
  std::vector<RatioTableRow> rows(cylinders.size());
  int workers = resolve_threads(threads);
  parallel_for(static_cast<int>(cylinders.size()), workers, [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const ParabolicCylinder& cyl = cylinders[static_cast<size_t>(i)];
      RatioTableRow row;
      row.x0 = cyl.x0;
      row.t0 = cyl.t0;
      row.R = cyl.R;
      row.tilt = tilt_excess(trajectory, cyl);
      row.grad_density = gradient_density(trajectory, cyl);
      row.grad_excess = gradient_excess(trajectory, cyl);
      RatioResult cacc = caccioppoli_ratio(trajectory, model, cyl);
      row.caccioppoli = cacc.value;
      row.cacc_degenerate = cacc.degenerate;
      RatioResult poin = poincare_ratio(trajectory, cyl, &model);
      row.poincare = poin.value;
      row.poin_degenerate = poin.degenerate;
      row.reverse_holder = reverse_holder_ratio(trajectory, cyl, p);
      rows[static_cast<size_t>(i)] = row;
    }
  });
  return rows;
}

}  // namespace xdiff
