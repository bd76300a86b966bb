#include <cmath>

#include "doctest.h"
#include "xdiff/probe.hpp"

using namespace xdiff;

namespace {

SpaceTimeGrid grid_1d(int cells, double dt_snap, int snapshots, int n_species) {
  SpaceTimeGrid g;
  g.dim = 1;
  g.extent = {1.0, 1.0};
  g.cells_per_axis = cells;
  g.dt = dt_snap;
  g.dt_snap = dt_snap;
  g.snapshots = snapshots;
  g.n_species = n_species;
  g.validate();
  return g;
}

Field linear_field(const SpaceTimeGrid& g, double slope) {
  Field f = Field::zeros(g);
  for (int k = 0; k < g.snapshots; ++k)
    for (int c = 0; c < g.cells(); ++c) f.at(k, c, 0) = slope * g.cell_center(c)[0];
  return f;
}

Field step_field(const SpaceTimeGrid& g) {
  Field f = Field::zeros(g);
  for (int k = 0; k < g.snapshots; ++k)
    for (int c = 0; c < g.cells(); ++c)
      f.at(k, c, 0) = g.cell_center(c)[0] < 0.5 ? 0.0 : 1.0;
  return f;
}

}  // namespace

TEST_CASE("tilt excess: hand value, translation invariance, time averaging") {
  SpaceTimeGrid g = grid_1d(8, 0.01, 1, 1);
  Field f = Field::zeros(g);
  const double vals[8] = {9, 9, 1, 2, 3, 6, 9, 9};
  for (int c = 0; c < 8; ++c) f.at(0, c, 0) = vals[c];
  ParabolicCylinder cyl{{0.5, 0.0}, 0.0, 0.2};
  // covered cells {2,3,4,5}, values {1,2,3,6}, mean 3
  CHECK(tilt_excess(f, cyl) == doctest::Approx(3.5).epsilon(1e-14));

  for (int c = 0; c < 8; ++c) f.at(0, c, 0) += 5.0;
  CHECK(tilt_excess(f, cyl) == doctest::Approx(3.5).epsilon(1e-14));

  SpaceTimeGrid g2 = grid_1d(8, 0.01, 2, 1);
  Field f2 = Field::zeros(g2);
  for (int k = 0; k < 2; ++k)
    for (int c = 0; c < 8; ++c) f2.at(k, c, 0) = vals[c];
  CHECK(tilt_excess(f2, ParabolicCylinder{{0.5, 0.0}, 0.01, 0.2}) ==
        doctest::Approx(3.5).epsilon(1e-14));

  CHECK_THROWS_AS(tilt_excess(f, ParabolicCylinder{{5.0, 0.0}, 0.0, 0.2}), EmptyCylinder);
}

TEST_CASE("gradient density and gradient excess on polynomial fields") {
  SpaceTimeGrid g = grid_1d(8, 0.01, 1, 1);
  Field lin = linear_field(g, 2.0);
  ParabolicCylinder cyl{{0.5, 0.0}, 0.0, 0.2};
  // 4 covered cells, |grad|^2 = 4, measure = 0.125 * 0.01
  CHECK(gradient_density(lin, cyl) == doctest::Approx(0.1).epsilon(1e-13));
  CHECK(gradient_excess(lin, cyl) == doctest::Approx(0.0).epsilon(1e-26));

  SpaceTimeGrid g32 = grid_1d(32, 0.01, 1, 1);
  Field quad = Field::zeros(g32);
  for (int c = 0; c < 32; ++c) {
    double x = g32.cell_center(c)[0];
    quad.at(0, c, 0) = x * x;
  }
  // central differences of x^2 give exactly 2x; variance of 2x over the
  // 7 covered centers is 4 * 2h^2(1+4+9)/7 = 16h^2
  ParabolicCylinder cyl32{{0.515625, 0.0}, 0.0, 0.125};
  CHECK(gradient_excess(quad, cyl32) == doctest::Approx(16.0 / 1024.0).epsilon(1e-12));
}

TEST_CASE("excess decay curve: quadratic rate on linear data, flat on constants") {
  SpaceTimeGrid g = grid_1d(64, 0.01, 1, 1);
  Field lin = linear_field(g, 1.0);
  const double h = 1.0 / 64.0;
  Point x0{32.5 * h, 0.0};
  std::vector<double> radii{16 * h, 8 * h, 4 * h};
  DecayCurve curve = excess_decay_curve(lin, x0, 0.0, radii);
  REQUIRE(curve.points.size() == 3);
  CHECK(curve.points[2].first == doctest::Approx(4 * h));
  CHECK(curve.points[2].second == doctest::Approx(4.0 * h * h).epsilon(1e-12));
  CHECK(!curve.flat);
  CHECK(curve.slope > 1.7);
  CHECK(curve.slope < 2.3);
  CHECK(curve.alpha == doctest::Approx(0.5 * curve.slope).epsilon(1e-15));

  Field flat = Field::zeros(g);
  for (double& v : flat.values) v = 0.75;
  DecayCurve fc = excess_decay_curve(flat, x0, 0.0, radii);
  CHECK(fc.flat);
  CHECK(std::isnan(fc.slope));
  for (auto& [r, phi] : fc.points) CHECK(phi == 0.0);
}

TEST_CASE("Caccioppoli, Poincare, and reverse-Hoelder ratios on a linear field") {
  SpaceTimeGrid g = grid_1d(32, 0.01, 1, 1);
  Field lin = linear_field(g, 1.0);
  CrossDiffusionModel heat = heat_model(1, 2.0);
  const double h = 1.0 / 32.0;
  ParabolicCylinder cyl{{16.5 * h, 0.0}, 0.0, 4 * h};

  // inner: 7 cells of unit gradient; outer oscillation around the symmetric
  // weighted mean x0: 2h^2(1+...+49) = 280h^2, divided by R^2 = 16h^2
  RatioResult cacc = caccioppoli_ratio(lin, heat, cyl);
  CHECK(!cacc.degenerate);
  CHECK(cacc.value == doctest::Approx(0.4).epsilon(1e-10));

  RatioResult poin = poincare_ratio(lin, cyl, &heat);
  CHECK(!poin.degenerate);
  CHECK(poin.value == doctest::Approx(7.0 / 60.0).epsilon(1e-10));

  RatioResult poin_free = poincare_ratio(lin, cyl);
  CHECK(poin_free.value == poin.value);

  CHECK(reverse_holder_ratio(lin, cyl, 4.0) == doctest::Approx(1.0 / 1.125).epsilon(1e-13));
  CHECK_THROWS_AS(reverse_holder_ratio(lin, cyl, 2.0), Error);
}

TEST_CASE("degenerate ratios on constant data") {
  SpaceTimeGrid g = grid_1d(32, 0.01, 1, 1);
  Field flat = Field::zeros(g);
  for (double& v : flat.values) v = 0.7;
  CrossDiffusionModel heat = heat_model(1, 2.0);
  ParabolicCylinder cyl{{0.515625, 0.0}, 0.0, 0.125};
  RatioResult cacc = caccioppoli_ratio(flat, heat, cyl);
  CHECK(cacc.degenerate);
  CHECK(cacc.value == 0.0);
  RatioResult poin = poincare_ratio(flat, cyl, &heat);
  CHECK(poin.degenerate);
  CHECK(poin.value == 0.0);
}

TEST_CASE("singular candidates flag the injected discontinuity") {
  SpaceTimeGrid g = grid_1d(32, 0.01, 3, 1);
  Field step = step_field(g);
  ProbeConfig cfg;
  cfg.radii = {0.125, 0.0625};
  cfg.epsilon0 = 0.01;
  cfg.epsilon1 = 0.01;
  cfg.threads = 1;

  auto pts = singular_candidates(step, cfg);
  CHECK(pts.size() == 28);  // interior lattice: cells 2..29
  std::vector<int> flagged;
  for (const auto& p : pts)
    if (p.flagged) flagged.push_back(p.cell);
  CHECK(flagged == std::vector<int>{14, 15, 16, 17});

  Field smooth = Field::zeros(g);
  for (double& v : smooth.values) v = 0.5;
  auto clean = singular_candidates(smooth, cfg);
  CHECK(clean.size() == 28);
  for (const auto& p : clean) {
    CHECK(!p.flagged);
    CHECK(p.min_excess == 0.0);
    CHECK(p.min_grad_density == 0.0);
  }

  ProbeConfig lax = cfg;
  lax.epsilon0 = 1e30;
  lax.epsilon1 = 1e30;
  for (const auto& p : singular_candidates(step, lax)) CHECK(!p.flagged);

  ProbeConfig strided = cfg;
  strided.lattice_stride = 2;
  std::vector<int> flagged2;
  for (const auto& p : singular_candidates(step, strided))
    if (p.flagged) flagged2.push_back(p.cell);
  CHECK(flagged2 == std::vector<int>{14, 16});
}

TEST_CASE("candidate evaluation is independent of the worker count") {
  SpaceTimeGrid g = grid_1d(32, 0.01, 3, 1);
  Field step = step_field(g);
  ProbeConfig cfg;
  cfg.radii = {0.125, 0.0625};
  cfg.threads = 1;
  auto base = singular_candidates(step, cfg);
  for (int threads : {2, 4, 9}) {
    cfg.threads = threads;
    auto pts = singular_candidates(step, cfg);
    REQUIRE(pts.size() == base.size());
    for (size_t i = 0; i < pts.size(); ++i) {
      CHECK(pts[i].cell == base[i].cell);
      CHECK(pts[i].min_excess == base[i].min_excess);
      CHECK(pts[i].min_grad_density == base[i].min_grad_density);
      CHECK(pts[i].flagged == base[i].flagged);
    }
  }
}

TEST_CASE("ratio table rows are bit-identical across thread counts") {
  SpaceTimeGrid g;
  g.dim = 2;
  g.extent = {1.0, 1.0};
  g.cells_per_axis = 16;
  g.dt = 0.01;
  g.dt_snap = 0.01;
  g.snapshots = 4;
  g.n_species = 2;
  g.validate();
  Field f = Field::zeros(g);
  for (int k = 0; k < g.snapshots; ++k)
    for (int c = 0; c < g.cells(); ++c) {
      Point x = g.cell_center(c);
      double t = g.snapshot_time(k);
      f.at(k, c, 0) = 0.5 + 0.3 * std::sin(3.0 * x[0] + x[1]) * std::cos(5.0 * t);
      f.at(k, c, 1) = 0.6 - 0.2 * std::cos(2.0 * x[0] - x[1] + t);
    }
  CrossDiffusionModel skt = skt_model({1, 1, 1, 1, 1, 1});

  std::vector<ParabolicCylinder> cyls{
      {{0.5, 0.5}, 0.03, 0.2},
      {{0.4, 0.6}, 0.03, 0.2},
      {{0.5, 0.5}, 0.03, 0.1},
      {{0.4, 0.6}, 0.03, 0.1},
  };
  auto base = ratio_table(f, skt, cyls, 2.5, 1);
  REQUIRE(base.size() == cyls.size());
  for (int threads : {2, 4, 13}) {
    auto rows = ratio_table(f, skt, cyls, 2.5, threads);
    REQUIRE(rows.size() == base.size());
    for (size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].tilt == base[i].tilt);
      CHECK(rows[i].grad_density == base[i].grad_density);
      CHECK(rows[i].grad_excess == base[i].grad_excess);
      CHECK(rows[i].caccioppoli == base[i].caccioppoli);
      CHECK(rows[i].poincare == base[i].poincare);
      CHECK(rows[i].reverse_holder == base[i].reverse_holder);
      CHECK(rows[i].cacc_degenerate == base[i].cacc_degenerate);
      CHECK(rows[i].poin_degenerate == base[i].poin_degenerate);
    }
  }
}

TEST_CASE("frozen comparison reproduces constant-coefficient trajectories") {
  CrossDiffusionModel model = heat_model(1, 2.0);
  SpaceTimeGrid g = grid_1d(32, 1e-3, 8, 1);
  Simulator sim(model, g);
  Field traj = sim.run([](const Point& x) {
    return Vec::Constant(1, 1.0 + 0.5 * std::cos(M_PI * x[0]));
  });
  GluedEntropy glued(model.entropy, 0.1);

  FrozenComparison cmp = frozen_comparison(traj, model, glued, {0.5, 0.0}, 0.005, 0.4);
  CHECK(!cmp.degenerate);
  CHECK(cmp.margin > 0.0);
  CHECK(cmp.solution_energy > 0.0);
  CHECK(cmp.ratio <= 1e-10);

  Field flat = Field::zeros(g);
  for (double& v : flat.values) v = 1.0;
  FrozenComparison dg = frozen_comparison(flat, model, glued, {0.5, 0.0}, 0.005, 0.4);
  CHECK(dg.degenerate);
  CHECK(dg.ratio == 0.0);
}

TEST_CASE("probe configuration validation") {
  ProbeConfig ok;
  ok.radii = {0.2, 0.1};
  CHECK_NOTHROW(ok.validate());

  ProbeConfig bad = ok;
  bad.radii = {};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = ok;
  bad.radii = {0.1, 0.2};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = ok;
  bad.radii = {0.2, 0.0};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = ok;
  bad.epsilon0 = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = ok;
  bad.epsilon1 = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = ok;
  bad.p = 2.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = ok;
  bad.tau = 0.2;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = ok;
  bad.tau = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = ok;
  bad.lattice_stride = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}
