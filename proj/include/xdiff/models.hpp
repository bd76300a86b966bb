#ifndef XDIFF_MODELS_HPP
#define XDIFF_MODELS_HPP

#include <array>
#include <functional>
#include <string>

#include "xdiff/entropy.hpp"
#include "xdiff/grid.hpp"

namespace xdiff {

enum class Constraint { None, VolumeFilling };

// A cross-diffusion system du/dt - div(A(u) grad u) = f(u) on the box
// (0,d_1)x...x(0,d_n), plus the entropy it pairs with.
struct CrossDiffusionModel {
  std::string name;
  int n = 1;
  Vec domain_upper;  // d_i; volume-filling models use (0,1)^n
  Constraint constraint = Constraint::None;
  Vec mass_diag;     // diagonal mass matrix; identity except PKS diag(1,beta)
  std::function<Mat(const Vec&)> A;
  std::function<Vec(const Vec&)> f;
  EntropyDensity entropy;

  // Matrix whose entropy structure is certified. For Maxwell-Stefan this is
  // M_MS of the implicit flux relation grad u = -M J; everywhere else A.
  std::function<Mat(const Vec&)> certify_matrix;

  // Comparison functions a_i (resp. m_i) paired with certify_matrix; entries
  // may be empty for components outside S_1.
  std::vector<std::function<double(const Vec&)>> near_diagonal;

  // Reduced-form solve (Maxwell-Stefan): evolve u' in n-1 species with
  // diffusion matrix M0(u')^{-1}; u_n = 1 - sum u' is exact by construction.
  bool reduced_solve = false;
  std::function<Mat(const Vec&)> A_reduced;
  std::function<Vec(const Vec&)> f_reduced;

  int dim_restriction = 0;  // 0 = any; PKS is posed on dim 2

  int solve_species() const { return reduced_solve ? n - 1 : n; }
  // Map a solve-space state to the full n species.
  Vec expand_state(const Vec& u_solve) const;

  // Sampled finiteness of A and f on the closed box; for volume-filling
  // models, sum_i f_i = 0 on the simplex to 1e-12.
  void validate(int samples = 200) const;
};

// --- matrix evaluators -------------------------------------------------

// Maxwell-Stefan matrix: diagonal sum_{k != i} y_k/D_ik, off-diagonal
// -y_i/D_ij. D must be symmetric with positive off-diagonal entries.
Mat ms_matrix(const Mat& D, const Vec& y);

// Reduced matrix M0(u') of the n-1 species system.
Mat ms_reduced(const Mat& D, const Vec& uprime);

// Partial inverse X blockdiag(M0^{-1}, 0) X^{-1} with
// X = Id - e_n (1,...,1,0)^T; the explicit diffusion matrix of the MS system.
Mat ms_effective_A(const Mat& D, const Vec& y);

// Hopf-Burger matrix: same shape with K_ij = 1/D_ij; K symmetric nonnegative.
Mat hb_matrix(const Mat& K, const Vec& y);

// SKT coefficients ordered (a10, a11, a12, a20, a21, a22).
using SktCoeffs = std::array<double, 6>;
Mat skt_matrix(const SktCoeffs& alpha, const Vec& y);
Vec skt_reaction(const SktCoeffs& beta, const Vec& y);

Mat sc_matrix(double mu1, double mu2, const Vec& y);

// --- model factories ----------------------------------------------------

CrossDiffusionModel heat_model(int n = 1, double d = 1.0);
CrossDiffusionModel skt_model(const SktCoeffs& alpha, const SktCoeffs& beta = {},
                              double d1 = 1.0, double d2 = 1.0);
CrossDiffusionModel sc_model(double mu1, double mu2, double d1 = 1.0, double d2 = 1.0);
CrossDiffusionModel hj_model(double delta, double mu, double beta, double d1 = 1.0,
                             double d2 = 1.0);
CrossDiffusionModel ms_model(int n, const Mat& D);
CrossDiffusionModel hb_model(int n, const Mat& K, bool full_interaction = true);

// Toy systems for negative controls.
CrossDiffusionModel toy_negdef_model();
CrossDiffusionModel toy_zero_model();

}  // namespace xdiff

#endif
