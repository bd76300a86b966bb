#include <cmath>

#include "doctest.h"
#include "xdiff/grid.hpp"

using namespace xdiff;

namespace {

SpaceTimeGrid grid_1d(int cells, double extent = 1.0, int snapshots = 1,
                      double dt_snap = 1e-2) {
  SpaceTimeGrid g;
  g.dim = 1;
  g.extent = {extent, 1.0};
  g.cells_per_axis = cells;
  g.dt = dt_snap;
  g.dt_snap = dt_snap;
  g.snapshots = snapshots;
  g.n_species = 1;
  g.validate();
  return g;
}

}  // namespace

TEST_CASE("grid indexing and geometry") {
  SpaceTimeGrid g;
  g.dim = 2;
  g.extent = {2.0, 1.0};
  g.cells_per_axis = 4;
  g.n_species = 1;
  g.validate();

  CHECK(g.h(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g.h(1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(g.cell_volume() == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(g.cells() == 16);
  CHECK(g.cell_index(2, 3) == 14);
  auto c = g.cell_coords(14);
  CHECK(c[0] == 2);
  CHECK(c[1] == 3);
  Point p = g.cell_center(14);
  CHECK(p[0] == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.875).epsilon(1e-15));
}

TEST_CASE("grid validate rejects bad parameters") {
  SpaceTimeGrid g = grid_1d(8);
  g.dt = -1.0;
  CHECK_THROWS_AS(g.validate(), Error);
  g = grid_1d(8);
  g.dim = 3;
  CHECK_THROWS_AS(g.validate(), Error);
  g = grid_1d(8);
  g.cells_per_axis = 2;
  CHECK_THROWS_AS(g.validate(), Error);
  g = grid_1d(8);
  g.snapshots = 0;
  CHECK_THROWS_AS(g.validate(), Error);
}

TEST_CASE("snapshot times and lookup") {
  SpaceTimeGrid g = grid_1d(8, 1.0, 11, 0.01);
  g.t_start = 0.0;
  CHECK(g.snapshot_time(5) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(g.t_end() == doctest::Approx(0.10).epsilon(1e-15));
  CHECK(snapshot_index_of(g, 0.05) == 5);
  CHECK(snapshot_index_of(g, 0.05 + 1e-13) == 5);
  CHECK_THROWS_AS(snapshot_index_of(g, 0.055), Error);
  CHECK_THROWS_AS(snapshot_index_of(g, -0.01), Error);
  CHECK_THROWS_AS(snapshot_index_of(g, 0.11), Error);
}

TEST_CASE("cutoff is a radial cubic smoothstep") {
  Point x0{0.0, 0.0};
  CHECK(cutoff_eval(x0, 1.0, Point{0.5, 0.0}, 1) == 1.0);
  CHECK(cutoff_eval(x0, 1.0, Point{1.0, 0.0}, 1) == 1.0);
  CHECK(cutoff_eval(x0, 1.0, Point{2.0, 0.0}, 1) == 0.0);
  CHECK(cutoff_eval(x0, 1.0, Point{2.5, 0.0}, 1) == 0.0);
  CHECK(cutoff_eval(x0, 1.0, Point{1.5, 0.0}, 1) == doctest::Approx(0.5).epsilon(1e-15));
  // |(0.9, 1.2)| = 1.5, so the 2d norm must land exactly on the half-way value
  CHECK(cutoff_eval(x0, 1.0, Point{0.9, 1.2}, 2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(cutoff_eval(x0, 1.0, Point{0.9, 1.2}, 1) == 1.0);

  // steepest slope of the radial profile is 1.5/R, attained at r = 1.5 R
  double R = 0.4, d = 1e-6;
  double lo = cutoff_eval(x0, R, Point{1.5 * R - d, 0.0}, 1);
  double hi = cutoff_eval(x0, R, Point{1.5 * R + d, 0.0}, 1);
  CHECK((lo - hi) / (2.0 * d) == doctest::Approx(1.5 / R).epsilon(1e-6));
}

TEST_CASE("covered cells and snapshots") {
  SpaceTimeGrid g = grid_1d(8, 1.0, 11, 0.01);
  auto cells = covered_cells(g, Point{0.5, 0.0}, 0.2);
  REQUIRE(cells.size() == 4);
  CHECK(cells[0] == 2);
  CHECK(cells[3] == 5);

  auto snaps = covered_snapshots(g, 0.085, 0.2);
  REQUIRE(snaps.size() == 4);
  CHECK(snaps.front() == 5);
  CHECK(snaps.back() == 8);

  // t0 exactly on a snapshot time stays included despite roundoff
  auto snaps2 = covered_snapshots(g, 0.08, 0.1);
  REQUIRE(!snaps2.empty());
  CHECK(snaps2.back() == 8);
}

TEST_CASE("cylinder interior test") {
  SpaceTimeGrid g = grid_1d(8, 1.0, 11, 0.01);
  CHECK(cylinder_interior(g, ParabolicCylinder{{0.5, 0.0}, 0.05, 0.2}));
  CHECK_FALSE(cylinder_interior(g, ParabolicCylinder{{0.15, 0.0}, 0.05, 0.2}));
  CHECK_FALSE(cylinder_interior(g, ParabolicCylinder{{0.5, 0.0}, 0.03, 0.2}));
  CHECK_FALSE(cylinder_interior(g, ParabolicCylinder{{0.5, 0.0}, 0.2, 0.2}));
}

TEST_CASE("mean on cylinder") {
  SpaceTimeGrid g = grid_1d(4, 1.0, 3, 0.01);
  Field f = Field::zeros(g);
  for (int k = 0; k < 3; ++k)
    for (int c = 0; c < 4; ++c) f.at(k, c, 0) = k + c;

  ParabolicCylinder cyl{{0.5, 0.0}, 0.02, 0.3};
  Vec m = mean_on_cylinder(f, cyl);
  CHECK(m[0] == doctest::Approx(2.5).epsilon(1e-15));

  CHECK_THROWS_AS(mean_on_cylinder(f, ParabolicCylinder{{0.5, 0.0}, 0.02, 1e-3}),
                  EmptyCylinder);
}

TEST_CASE("weighted mean uses squared cutoff weights") {
  SpaceTimeGrid g = grid_1d(4);
  Field f = Field::zeros(g);
  for (int c = 0; c < 4; ++c) f.at(0, c, 0) = c + 1;

  // centers 1/8, 3/8, 5/8, 7/8; x0 = 0.45, R = 0.1 gives cutoff weights
  // 0, 1, 5/32, 0, hence mean (2 + (5/32)^2 * 3) / (1 + (5/32)^2) = 2123/1049
  Vec m = weighted_mean(f, Point{0.45, 0.0}, 0.1, 0);
  CHECK(m[0] == doctest::Approx(2123.0 / 1049.0).epsilon(1e-15));

  CHECK_THROWS_AS(weighted_mean(f, Point{-5.0, 0.0}, 0.1, 0), ZeroWeight);
}

TEST_CASE("discrete gradient: linear fields are exact, boundaries one-sided") {
  SpaceTimeGrid g;
  g.dim = 2;
  g.extent = {1.0, 1.0};
  g.cells_per_axis = 4;
  g.n_species = 1;
  g.validate();
  Field f = Field::zeros(g);
  for (int c = 0; c < g.cells(); ++c) {
    Point p = g.cell_center(c);
    f.at(0, c, 0) = 2.0 * p[0] + 5.0 * p[1];
  }
  for (int c = 0; c < g.cells(); ++c) {
    Mat gr = discrete_gradient(f, 0, c);
    CHECK(gr(0, 0) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(gr(0, 1) == doctest::Approx(5.0).epsilon(1e-13));
  }

  SpaceTimeGrid g1 = grid_1d(4);
  Field q = Field::zeros(g1);
  for (int c = 0; c < 4; ++c) {
    double x = g1.cell_center(c)[0];
    q.at(0, c, 0) = x * x;
  }
  // central difference of x^2 is exact; one-sided at cell 0 gives 2x + h
  CHECK(discrete_gradient(q, 0, 1)(0, 0) == doctest::Approx(0.75).epsilon(1e-13));
  CHECK(discrete_gradient(q, 0, 0)(0, 0) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(discrete_gradient(q, 0, 3)(0, 0) == doctest::Approx(1.5).epsilon(1e-13));
}

TEST_CASE("parabolic distance") {
  CHECK(parabolic_distance(Point{0.0, 0.0}, 0.0, Point{0.3, 0.4}, -0.16, 2) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(parabolic_distance(Point{0.0, 0.0}, 0.0, Point{0.1, 0.0}, -0.25, 1) ==
        doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("field validate") {
  SpaceTimeGrid g = grid_1d(4);
  g.n_species = 2;
  Field f = Field::zeros(g);
  for (int c = 0; c < 4; ++c) {
    f.at(0, c, 0) = 0.25;
    f.at(0, c, 1) = 0.75;
  }
  CHECK_NOTHROW(f.validate(true));
  f.at(0, 2, 1) = 0.9;
  CHECK_THROWS_AS(f.validate(true), Error);
  f.at(0, 2, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(f.validate(false), Error);
}
