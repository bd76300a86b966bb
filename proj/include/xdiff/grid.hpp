#ifndef XDIFF_GRID_HPP
#define XDIFF_GRID_HPP

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "xdiff/errors.hpp"

namespace xdiff {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Point in physical space; second coordinate unused for dim == 1.
using Point = std::array<double, 2>;

// Uniform cell-centered Cartesian grid on [0,extent_1]x...x(0,T].
// Snapshot k lives at time t_start + k*dt_snap; dt is the solver step and
// dt_snap an integer multiple of it.
struct SpaceTimeGrid {
  int dim = 1;
  std::array<double, 2> extent{1.0, 1.0};
  int cells_per_axis = 4;
  double dt = 1e-3;
  double dt_snap = 1e-3;
  int snapshots = 1;
  int n_species = 1;
  double t_start = 0.0;

  double h(int axis) const { return extent[static_cast<size_t>(axis)] / cells_per_axis; }
  double cell_volume() const { return dim == 1 ? h(0) : h(0) * h(1); }
  int cells() const { return dim == 1 ? cells_per_axis : cells_per_axis * cells_per_axis; }
  int cell_index(int ix, int iy = 0) const { return ix + cells_per_axis * iy; }
  std::array<int, 2> cell_coords(int cell) const {
    return {cell % cells_per_axis, cell / cells_per_axis};
  }
  Point cell_center(int cell) const {
    auto c = cell_coords(cell);
    Point p{(c[0] + 0.5) * h(0), 0.0};
    if (dim == 2) p[1] = (c[1] + 0.5) * h(1);
    return p;
  }
  double snapshot_time(int k) const { return t_start + k * dt_snap; }
  double t_end() const { return snapshot_time(snapshots - 1); }

  void validate() const;
};

// Full space-time data: snapshot-major, then cell, then species.
struct Field {
  SpaceTimeGrid grid;
  std::vector<double> values;

  static Field zeros(const SpaceTimeGrid& g);

  double& at(int snap, int cell, int species) {
    return values[static_cast<size_t>((snap * grid.cells() + cell) * grid.n_species + species)];
  }
  double at(int snap, int cell, int species) const {
    return values[static_cast<size_t>((snap * grid.cells() + cell) * grid.n_species + species)];
  }
  Vec state(int snap, int cell) const {
    Vec u(grid.n_species);
    for (int s = 0; s < grid.n_species; ++s) u[s] = at(snap, cell, s);
    return u;
  }
  // Check finiteness and, if requested, the volume-filling constraint.
  void validate(bool volume_filling = false, double tol = 1e-8) const;
};

struct ParabolicCylinder {
  Point x0{0.0, 0.0};
  double t0 = 0.0;
  double R = 0.0;
};

// Cells whose center lies in the open ball B_R(x0); ascending cell order.
std::vector<int> covered_cells(const SpaceTimeGrid& g, const Point& x0, double R);

// Snapshots with time in the window (t0 - R^2, t0]; ascending order.
std::vector<int> covered_snapshots(const SpaceTimeGrid& g, double t0, double R);

// True iff B_R(x0) x (t0-R^2, t0] lies inside the grid's space-time box.
bool cylinder_interior(const SpaceTimeGrid& g, const ParabolicCylinder& cyl);

// Cut-off: 1 on B_R(x0), 0 outside B_2R(x0), cubic smoothstep radially in
// between; |d/dr| <= 1.5/R.
double cutoff_eval(const Point& x0, double R, const Point& x, int dim);

// Plain average of u over covered (cell, snapshot) pairs.
Vec mean_on_cylinder(const Field& f, const ParabolicCylinder& cyl);

// chi^2-weighted spatial average at one snapshot; weights from cutoff_eval.
Vec weighted_mean(const Field& f, const Point& x0, double R, int snap);

// Locate the snapshot index of time t (within dt_snap*1e-9); throws otherwise.
int snapshot_index_of(const SpaceTimeGrid& g, double t);

// Discrete spatial gradient at a cell center: species-by-axis matrix from
// central differences, one-sided at the box faces.
Mat discrete_gradient(const Field& f, int snap, int cell);

double parabolic_distance(const Point& x0, double t0, const Point& x1, double t1, int dim);

}  // namespace xdiff

#endif
