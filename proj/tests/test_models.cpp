#include <cmath>
#include <random>

#include "doctest.h"
#include "xdiff/models.hpp"

using namespace xdiff;

namespace {

Mat pair_matrix3(double d01, double d02, double d12) {
  Mat D = Mat::Zero(3, 3);
  D(0, 1) = D(1, 0) = d01;
  D(0, 2) = D(2, 0) = d02;
  D(1, 2) = D(2, 1) = d12;
  return D;
}

Vec simplex_point(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  Vec y(n);
  for (int i = 0; i < n; ++i) y[i] = unif(rng);
  return y / y.sum();
}

}  // namespace

TEST_CASE("Maxwell-Stefan matrix entries and column sums") {
  Mat D = pair_matrix3(2.0, 3.0, 4.0);
  Vec y(3);
  y << 0.2, 0.3, 0.5;
  Mat M = ms_matrix(D, y);
  CHECK(M(0, 0) == doctest::Approx(0.15 + 0.5 / 3.0).epsilon(1e-15));
  CHECK(M(0, 1) == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(M(0, 2) == doctest::Approx(-0.2 / 3.0).epsilon(1e-15));
  CHECK(M(1, 1) == doctest::Approx(0.225).epsilon(1e-15));
  CHECK(M(2, 2) == doctest::Approx(0.2 / 3.0 + 0.075).epsilon(1e-15));
  for (int j = 0; j < 3; ++j) CHECK(std::abs(M.col(j).sum()) <= 1e-15);

  Mat bad = D;
  bad(0, 1) = 5.0;  // breaks symmetry
  CHECK_THROWS_AS(ms_matrix(bad, y), BadCoefficients);
  Mat zero = pair_matrix3(0.0, 3.0, 4.0);
  CHECK_THROWS_AS(ms_matrix(zero, y), BadCoefficients);
}

TEST_CASE("Maxwell-Stefan reduced matrix") {
  Mat D = pair_matrix3(2.0, 3.0, 4.0);
  Vec up(2);
  up << 0.2, 0.3;
  Mat M0 = ms_reduced(D, up);
  CHECK(M0(0, 0) == doctest::Approx(23.0 / 60.0).epsilon(1e-15));
  CHECK(M0(0, 1) == doctest::Approx(-1.0 / 30.0).epsilon(1e-15));
  CHECK(M0(1, 0) == doctest::Approx(-0.075).epsilon(1e-15));
  CHECK(M0(1, 1) == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("Maxwell-Stefan effective diffusion matrix") {
  Mat D = pair_matrix3(2.0, 3.0, 4.0);
  Vec y(3);
  y << 0.2, 0.3, 0.5;
  Mat A = ms_effective_A(D, y);
  CHECK(A(0, 0) == doctest::Approx(8.0 / 3.0).epsilon(1e-13));
  CHECK(A(0, 1) == doctest::Approx(8.0 / 27.0).epsilon(1e-13));
  CHECK(A(1, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  CHECK(A(1, 1) == doctest::Approx(92.0 / 27.0).epsilon(1e-13));
  CHECK(A(2, 2) == doctest::Approx(0.0).epsilon(1e-13));
  for (int j = 0; j < 3; ++j) CHECK(std::abs(A.col(j).sum()) <= 1e-12);
}

TEST_CASE("flux-gradient inversion on the zero-sum subspace") {
  std::mt19937 rng(1357u);
  std::uniform_real_distribution<double> coeff(0.3, 4.0);
  std::uniform_real_distribution<double> comp(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 2 + trial % 4;
    Mat D = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) D(i, j) = D(j, i) = coeff(rng);
    Vec y = simplex_point(rng, n);
    Vec rho(n);
    for (int i = 0; i < n; ++i) rho[i] = comp(rng);
    rho.array() -= rho.mean();
    Vec back = ms_matrix(D, y) * (ms_effective_A(D, y) * rho);
    CHECK((back - rho).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + rho.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("ill-conditioned reduced matrix is rejected") {
  Mat D = pair_matrix3(1.0, 2.0, 2.0);
  Vec y(3);
  y << -0.5, -0.5, 2.0;  // crafted so M0 is exactly singular
  CHECK_THROWS_AS(ms_effective_A(D, y), IllConditioned);
}

TEST_CASE("Hopf-Burger matrix") {
  Mat K = Mat::Zero(2, 2);
  K(0, 1) = K(1, 0) = 2.0;
  Vec y(2);
  y << 0.25, 0.75;
  Mat M = hb_matrix(K, y);
  CHECK(M(0, 0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(M(0, 1) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(M(1, 0) == doctest::Approx(-1.5).epsilon(1e-15));
  CHECK(M(1, 1) == doctest::Approx(0.5).epsilon(1e-15));

  CHECK(hb_matrix(K, Vec::Zero(2)).norm() == 0.0);

  // K = 1/D entrywise reproduces the Maxwell-Stefan matrix
  Mat D = pair_matrix3(2.0, 3.0, 4.0);
  Mat K3 = Mat::Zero(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) K3(i, j) = 1.0 / D(i, j);
  Vec y3(3);
  y3 << 0.2, 0.3, 0.5;
  CHECK((hb_matrix(K3, y3) - ms_matrix(D, y3)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("SKT matrix and reaction") {
  SktCoeffs one{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  Vec y(2);
  y << 1.0, 1.0;
  Mat A = skt_matrix(one, y);
  CHECK(A(0, 0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(A(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(A(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(A(1, 1) == doctest::Approx(4.0).epsilon(1e-15));

  SktCoeffs gen{0.5, 2.0, 3.0, 0.7, 4.0, 5.0};
  Vec z(2);
  z << 0.0, 0.0;
  Mat Az = skt_matrix(gen, z);
  CHECK(Az(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(Az(1, 1) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(Az(0, 1) == 0.0);
  CHECK(Az(1, 0) == 0.0);

  SktCoeffs beta{1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
  Vec w(2);
  w << 0.5, 0.2;
  Vec f = skt_reaction(beta, w);
  CHECK(f[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(f[1] == doctest::Approx(0.0).epsilon(1e-15));

  SktCoeffs neg{1.0, -1.0, 1.0, 1.0, 1.0, 1.0};
  CHECK_THROWS_AS(skt_matrix(neg, y), BadCoefficients);
  SktCoeffs negb{1.0, -1.0, 0.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(skt_reaction(negb, y), BadCoefficients);
}

TEST_CASE("semiconductor matrix") {
  Vec z = Vec::Zero(2);
  Mat I = sc_matrix(1.0, 1.0, z);
  CHECK((I - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-15);

  Vec y(2);
  y << 0.0, 1.0;
  Mat A = sc_matrix(2.0, 1.0, y);
  CHECK(A(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(A(0, 1) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(A(1, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(A(1, 1) == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(sc_matrix(0.0, 1.0, y), BadCoefficients);
  CHECK_THROWS_AS(sc_matrix(1.0, -1.0, y), BadCoefficients);
}

TEST_CASE("semiconductor quadratic form equals its sum of squares") {
  std::mt19937 rng(8642u);
  std::uniform_real_distribution<double> mob(0.1, 3.0);
  std::uniform_real_distribution<double> state(1e-3, 1.0);
  std::uniform_real_distribution<double> comp(-1.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    double mu1 = mob(rng), mu2 = mob(rng);
    Vec u(2), rho(2);
    u << state(rng), state(rng);
    rho << comp(rng), comp(rng);
    Mat A = sc_matrix(mu1, mu2, u);
    double lhs = rho[0] / u[0] * (A.row(0) * rho)(0) + rho[1] / u[1] * (A.row(1) * rho)(0);
    double rhs = (mu1 / u[0] * rho[0] * rho[0] + mu2 / u[1] * rho[1] * rho[1] +
                  mu1 * mu2 * (rho[0] + rho[1]) * (rho[0] + rho[1])) /
                 (1.0 + mu2 * u[0] + mu1 * u[1]);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("model factories wire the expected structure") {
  CrossDiffusionModel heat = heat_model(2, 1.5);
  CHECK(heat.n == 2);
  CHECK(heat.domain_upper[1] == 1.5);
  CHECK((heat.A(Vec::Constant(2, 0.3)) - Mat::Identity(2, 2)).norm() == 0.0);
  CHECK_NOTHROW(heat.validate());

  CrossDiffusionModel skt = skt_model({1, 1, 1, 1, 1, 1});
  CHECK(skt.constraint == Constraint::None);
  CHECK(skt.entropy.comp[0].blowup == BlowupClass::Case1);
  Vec ys(2);
  ys << 0.3, 0.4;
  CHECK(skt.near_diagonal[0](ys) == doctest::Approx(1.4).epsilon(1e-15));
  CHECK(skt.near_diagonal[1](ys) == doctest::Approx(1.3).epsilon(1e-15));
  CHECK_NOTHROW(skt.validate());

  CrossDiffusionModel sc = sc_model(1.0, 2.0);
  CHECK_NOTHROW(sc.validate());

  CrossDiffusionModel pks = hj_model(0.5, 2.0, 1.0);
  CHECK(pks.dim_restriction == 2);
  CHECK(pks.mass_diag[0] == 1.0);
  CHECK(pks.mass_diag[1] == 1.0);
  Vec yp(2);
  yp << 1.0, 2.0;
  Mat Ap = pks.A(yp);
  CHECK(Ap(0, 1) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(Ap(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
  Vec fp = pks.f(yp);
  CHECK(fp[0] == 0.0);
  CHECK(fp[1] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(hj_model(0.5, 2.0, 0.0).mass_diag[1] == 0.0);
  CHECK_THROWS_AS(hj_model(0.0, 1.0, 1.0), BadCoefficients);
  CHECK_NOTHROW(pks.validate());
}

TEST_CASE("Maxwell-Stefan model: reduced form and comparison functions") {
  Mat D = pair_matrix3(2.0, 3.0, 4.0);
  CrossDiffusionModel ms = ms_model(3, D);
  CHECK(ms.constraint == Constraint::VolumeFilling);
  CHECK(ms.reduced_solve);
  CHECK(ms.solve_species() == 2);
  CHECK_NOTHROW(ms.validate());

  Vec up(2);
  up << 0.2, 0.3;
  Vec full = ms.expand_state(up);
  CHECK(full.size() == 3);
  CHECK(full[2] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(full.sum() == doctest::Approx(1.0).epsilon(1e-15));

  Vec y(3);
  y << 0.2, 0.3, 0.5;
  // m_0(y) = (D_0 + sum_j (prod_{k != 0,j} D_0k - D_0) y_j) / (D_01 D_02)
  CHECK(ms.near_diagonal[0](y) == doctest::Approx(2.3 / 6.0).epsilon(1e-14));

  Mat Ared = ms.A_reduced(up);
  CHECK(Ared(0, 0) == doctest::Approx(8.0 / 3.0).epsilon(1e-13));
  CHECK(Ared(1, 1) == doctest::Approx(92.0 / 27.0).epsilon(1e-13));

  CHECK_THROWS_AS(ms_model(2, D), BadCoefficients);
}

TEST_CASE("Hopf-Burger model interaction requirements") {
  Mat K = Mat::Zero(3, 3);
  K(0, 1) = K(1, 0) = 1.0;
  K(0, 2) = K(2, 0) = 1.0;
  // K_12 = 0: not full interaction
  CHECK_THROWS_AS(hb_model(3, K, true), BadCoefficients);
  CrossDiffusionModel hb = hb_model(3, K, false);
  CHECK(hb.near_diagonal.empty());
  CHECK_NOTHROW(hb.validate());

  K(1, 2) = K(2, 1) = 2.0;
  CrossDiffusionModel full = hb_model(3, K, true);
  CHECK(full.near_diagonal.size() == 3);
  CHECK(full.constraint == Constraint::VolumeFilling);
}

TEST_CASE("toy negative controls") {
  CrossDiffusionModel nd = toy_negdef_model();
  CHECK((nd.A(Vec::Constant(2, 0.5)) + Mat::Identity(2, 2)).norm() == 0.0);
  CrossDiffusionModel tz = toy_zero_model();
  CHECK(tz.A(Vec::Constant(2, 0.5)).norm() == 0.0);
}
