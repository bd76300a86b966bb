#ifndef XDIFF_VERIFIER_HPP
#define XDIFF_VERIFIER_HPP

#include <string>
#include <utility>

#include "xdiff/models.hpp"

namespace xdiff {

enum class SubspaceKind { Full, ZeroSum };

struct Subspace {
  SubspaceKind kind = SubspaceKind::Full;
  int n = 1;
  Mat P;  // Full: identity; ZeroSum: orthonormal basis of {rho : sum rho_i = 0}

  static Subspace full(int n);
  static Subspace zero_sum(int n);
};

struct CertificationReport {
  std::string condition;     // H2 / H2' / C1 / C1'
  std::string model_name;
  std::string matrix_form;   // "A" or "M" (Maxwell-Stefan implicit form)
  double min_margin = 0.0;
  Vec argmin_state;
  int resolution = 0;
  double lambda_lo = 0.0;    // lambda'
  double lambda_hi = 0.0;    // Lambda'
  double near_diag_bound = std::numeric_limits<double>::quiet_NaN();
  double mu = std::numeric_limits<double>::quiet_NaN();
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  double lambda_target = 0.0;
  bool pass = false;
  double lipschitz_slack = 0.0;
  double doubling_c = std::numeric_limits<double>::quiet_NaN();
  double m_norm_bound = 0.0;  // max ||certify_matrix||_2 over the grid
};

// Smallest eigenvalue of P^T sym(diag(H) A) P, i.e. the minimum of
// rho . H A rho over unit rho in the subspace.
double coercivity_margin(const Vec& hess_diag, const Mat& A, const Subspace& s);

// Uniform interface over the raw and glued entropy Hessians.
struct HessianEval {
  std::function<Vec(const Vec&)> hess;
  bool glued = false;
  double eps = std::numeric_limits<double>::quiet_NaN();
  double lo = 0.0;   // lambda' (glued) or sampled lower bound (raw, informative)
  double hi = 0.0;
  double doubling_c = std::numeric_limits<double>::quiet_NaN();
};
HessianEval raw_hessian_eval(const EntropyDensity& density);
HessianEval glued_hessian_eval(const GluedEntropy& glued);

// Margin minimization over an m-per-axis grid of the closed domain box
// (volume-filling: the barycentric simplex lattice); raw entropies use grids
// clipped away from Case1 axes where h'' is undefined.
CertificationReport sample_certify(const CrossDiffusionModel& model, const HessianEval& entropy,
                                   const Subspace& s, int resolution,
                                   double lambda_target = 0.05, int threads = 1);

// Dyadic search over eps = min_i(d_i)/2 * 2^{-k}, k = 1..20; returns the
// largest eps whose certification margin reaches lambda_target.
std::pair<double, CertificationReport> glue_search(const CrossDiffusionModel& model,
                                                   const EntropyDensity& base,
                                                   double lambda_target, const Subspace& s,
                                                   int resolution, int threads = 1);

// Both sides of the Maxwell-Stefan quadratic-form identity
// rho . h''(y) M_MS(y) rho = 1/2 sum_ij (y_i y_j / D_ij)(rho_i/y_i - rho_j/y_j)^2
// with Boltzmann h; y must lie in the open simplex.
std::pair<double, double> hypocoercivity_identity(const Mat& D, const Vec& y, const Vec& rho);

// (bound, mu): bound = max over the grid, i in S1 and j of
// |A_ij - a_i delta_ij| h_i''(y_i); mu = grid-min of the a_i.
std::pair<double, double> near_diagonal_bound(const CrossDiffusionModel& model,
                                              const EntropyDensity& density, int resolution);

}  // namespace xdiff

#endif
