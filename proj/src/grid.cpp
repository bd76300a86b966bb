#include "xdiff/grid.hpp"

#include <cmath>
#include <sstream>

namespace xdiff {

void SpaceTimeGrid::validate() const {
  if (dim != 1 && dim != 2) throw Error("grid: dim must be 1 or 2");
  if (cells_per_axis < 4) throw Error("grid: cells_per_axis must be >= 4");
  for (int a = 0; a < dim; ++a)
    if (!(h(a) > 0.0)) throw Error("grid: extent must be positive on every axis");
  if (!(dt > 0.0)) throw Error("grid: dt must be positive");
  if (!(dt_snap > 0.0)) throw Error("grid: dt_snap must be positive");
  if (snapshots < 1) throw Error("grid: need at least one snapshot");
  if (n_species < 1) throw Error("grid: need at least one species");
}

Field Field::zeros(const SpaceTimeGrid& g) {
  Field f;
  f.grid = g;
  f.values.assign(static_cast<size_t>(g.snapshots) * g.cells() * g.n_species, 0.0);
  return f;
}

void Field::validate(bool volume_filling, double tol) const {
  for (double v : values)
    if (!std::isfinite(v)) throw Error("field: non-finite entry");
  if (volume_filling) {
    for (int k = 0; k < grid.snapshots; ++k)
      for (int c = 0; c < grid.cells(); ++c) {
        double s = 0.0;
        for (int i = 0; i < grid.n_species; ++i) s += at(k, c, i);
        if (std::abs(s - 1.0) > tol) {
          std::ostringstream msg;
          msg << "field: volume-filling constraint violated at snapshot " << k << ", cell " << c
              << " (sum = " << s << ")";
          throw Error(msg.str());
        }
      }
  }
}

static double sq_dist(const Point& a, const Point& b, int dim) {
  double d2 = (a[0] - b[0]) * (a[0] - b[0]);
  if (dim == 2) d2 += (a[1] - b[1]) * (a[1] - b[1]);
  return d2;
}

std::vector<int> covered_cells(const SpaceTimeGrid& g, const Point& x0, double R) {
  std::vector<int> out;
  const double R2 = R * R;
  for (int c = 0; c < g.cells(); ++c)
    if (sq_dist(g.cell_center(c), x0, g.dim) < R2) out.push_back(c);
  return out;
}

std::vector<int> covered_snapshots(const SpaceTimeGrid& g, double t0, double R) {
  std::vector<int> out;
  const double lo = t0 - R * R;
  // half-open window (t0-R^2, t0]; snapshot times compared with a relative
  // slack so that t0 equal to a snapshot time is reliably included
  const double slack = 1e-9 * g.dt_snap;
  for (int k = 0; k < g.snapshots; ++k) {
    double t = g.snapshot_time(k);
    if (t > lo + slack && t <= t0 + slack) out.push_back(k);
  }
  return out;
}

bool cylinder_interior(const SpaceTimeGrid& g, const ParabolicCylinder& cyl) {
  for (int a = 0; a < g.dim; ++a) {
    double c = cyl.x0[static_cast<size_t>(a)];
    if (c - cyl.R < 0.0 || c + cyl.R > g.extent[static_cast<size_t>(a)]) return false;
  }
  const double slack = 1e-9 * g.dt_snap;
  if (cyl.t0 - cyl.R * cyl.R < g.t_start - slack) return false;
  if (cyl.t0 > g.t_end() + slack) return false;
  return true;
}

double cutoff_eval(const Point& x0, double R, const Point& x, int dim) {
  double r = std::sqrt(sq_dist(x, x0, dim));
  if (r <= R) return 1.0;
  if (r >= 2.0 * R) return 0.0;
  double t = (r - R) / R;
  return 1.0 - t * t * (3.0 - 2.0 * t);
}

Vec mean_on_cylinder(const Field& f, const ParabolicCylinder& cyl) {
  const SpaceTimeGrid& g = f.grid;
  auto cells = covered_cells(g, cyl.x0, cyl.R);
  auto snaps = covered_snapshots(g, cyl.t0, cyl.R);
  if (cells.empty() || snaps.empty())
    throw EmptyCylinder("mean_on_cylinder: no cell-snapshot pairs covered");
  Vec acc = Vec::Zero(g.n_species);
  for (int k : snaps)
    for (int c : cells)
      for (int s = 0; s < g.n_species; ++s) acc[s] += f.at(k, c, s);
  acc /= static_cast<double>(cells.size() * snaps.size());
  return acc;
}

Vec weighted_mean(const Field& f, const Point& x0, double R, int snap) {
  const SpaceTimeGrid& g = f.grid;
  Vec acc = Vec::Zero(g.n_species);
  double wsum = 0.0;
  for (int c = 0; c < g.cells(); ++c) {
    double chi = cutoff_eval(x0, R, g.cell_center(c), g.dim);
    if (chi == 0.0) continue;
    double w = chi * chi;
    wsum += w;
    for (int s = 0; s < g.n_species; ++s) acc[s] += w * f.at(snap, c, s);
  }
  if (wsum <= 0.0) throw ZeroWeight("weighted_mean: all cutoff weights vanish");
  return acc / wsum;
}

int snapshot_index_of(const SpaceTimeGrid& g, double t) {
  double k = (t - g.t_start) / g.dt_snap;
  int ki = static_cast<int>(std::lround(k));
  if (ki < 0 || ki >= g.snapshots || std::abs(k - ki) > 1e-9)
    throw Error("snapshot_index_of: t is not a snapshot time");
  return ki;
}

double parabolic_distance(const Point& x0, double t0, const Point& x1, double t1, int dim) {
  return std::max(std::sqrt(sq_dist(x0, x1, dim)), std::sqrt(std::abs(t0 - t1)));
}

Mat discrete_gradient(const Field& f, int snap, int cell) {
  const SpaceTimeGrid& g = f.grid;
  Mat grad = Mat::Zero(g.n_species, g.dim);
  auto c = g.cell_coords(cell);
  for (int axis = 0; axis < g.dim; ++axis) {
    int coord = c[static_cast<size_t>(axis)];
    int lo = coord - 1, hi = coord + 1;
    double denom = 2.0 * g.h(axis);
    if (lo < 0) {
      lo = coord;
      denom = g.h(axis);
    }
    if (hi >= g.cells_per_axis) {
      hi = coord;
      denom = g.h(axis);
    }
    std::array<int, 2> cl = c, ch = c;
    cl[static_cast<size_t>(axis)] = lo;
    ch[static_cast<size_t>(axis)] = hi;
    int cell_lo = g.cell_index(cl[0], cl[1]);
    int cell_hi = g.cell_index(ch[0], ch[1]);
    for (int s = 0; s < g.n_species; ++s)
      grad(s, axis) = (f.at(snap, cell_hi, s) - f.at(snap, cell_lo, s)) / denom;
  }
  return grad;
}

}  // namespace xdiff
