#ifndef XDIFF_ENTROPY_HPP
#define XDIFF_ENTROPY_HPP

#include <atomic>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "xdiff/grid.hpp"

namespace xdiff {

enum class BlowupClass { Case1, Case2 };

// One convex scalar entropy component on (0, d). Case1: unbounded Hessian at
// 0 (e.g. Boltzmann); Case2: Hessian bounded above and below on [0, d].
struct ScalarEntropy {
  double d = 1.0;
  BlowupClass blowup = BlowupClass::Case1;
  std::function<double(double)> h;
  std::function<double(double)> dh;
  std::function<double(double)> d2h;
};

ScalarEntropy boltzmann_entropy(double d = 1.0);
// (u/w)(log u - 1); Hessian 1/(w u).
ScalarEntropy weighted_boltzmann_entropy(double w, double d = 1.0);
// c*u^2; Case2 with constant Hessian 2c (c = 0 allowed as a degenerate
// component; it then contributes nothing to the entropy).
ScalarEntropy quadratic_entropy(double c, double d = 1.0);

struct EntropyDensity {
  std::vector<ScalarEntropy> comp;
  int n() const { return static_cast<int>(comp.size()); }
};

EntropyDensity boltzmann_density(int n, double d = 1.0);
EntropyDensity skt_density(double alpha12, double alpha21);
EntropyDensity pks_density(double delta, double beta);

// Sampled validation: convexity of every component, Case1 monotone blow-up
// toward 0+; returns the largest observed doubling constant
// C = max h''(eps)/h''(2 eps) over a dyadic eps ladder (recorded, not
// asserted against a threshold).
double validate_density(const EntropyDensity& density);

// Partition of unity subordinate to (-inf, 2eps) u (eps, inf): returns
// (eta1, eta2) with eta1 + eta2 = 1; eta2 is the cubic smoothstep on
// [eps, 2eps].
std::pair<double, double> transition_weights(double eps, double y);

// g(y) = eps*eta1(y) + y*eta2(y); equals eps on [0, eps], y on [2eps, inf).
double glued_arg(double eps, double y);

// Relative (Bregman) entropy of the raw density; clamp_count, when given,
// counts slightly-negative inputs clamped to 0.
double relative_entropy(const EntropyDensity& density, const Vec& u, const Vec& v,
                        std::atomic<long>* clamp_count = nullptr);

// The glued entropy h_eps: Case1 components get the Hessian h''(g(y));
// values and gradients are the once/twice integrated Hessian, evaluated
// piecewise (exact quadratic on [0,eps], cached adaptive-Simpson tables on
// [eps,2eps], base closed form plus matching constants on [2eps,d]). Case2
// components pass through unchanged.
class GluedEntropy {
 public:
  GluedEntropy(EntropyDensity base, double eps);

  const EntropyDensity& base() const { return base_; }
  double eps() const { return eps_; }
  int n() const { return base_.n(); }
  double lambda_lo() const { return lambda_lo_; }   // lambda'
  double lambda_hi() const { return lambda_hi_; }   // Lambda'
  double doubling_constant() const { return doubling_c_; }
  long clamp_warnings() const { return clamp_count_->load(); }

  // Scalar component evaluators; y is clamped/checked against [0, d_i].
  double hess1(int i, double y) const;
  double grad1(int i, double y) const;
  double value1(int i, double y) const;

  Vec hessian_diag(const Vec& y) const;
  double value(const Vec& y) const;
  Vec grad(const Vec& y) const;
  std::pair<double, Vec> value_and_grad(const Vec& y) const;

  // h_eps(u|v) = h_eps(u) - h_eps(v) - <h_eps'(v), u - v>
  double relative(const Vec& u, const Vec& v) const;

 private:
  struct Case1Tables {
    double c0 = 0.0;          // h''(eps)
    double value_at_eps = 0.0;
    std::vector<double> cum_hess;  // integral of h''(g) from eps to node j
    std::vector<double> cum_grad;  // integral of h_eps' from eps to node j
    double grad_at_2eps = 0.0;
    double value_at_2eps = 0.0;
    double base_dh_2eps = 0.0;
    double base_h_2eps = 0.0;
  };

  double clamp_domain(int i, double y) const;
  double grad1_mid(int i, double y) const;  // y in [eps, 2eps], Case1

  EntropyDensity base_;
  double eps_;
  double lambda_lo_ = 0.0;
  double lambda_hi_ = 0.0;
  double doubling_c_ = 0.0;
  std::vector<Case1Tables> tables_;  // indexed per component; empty for Case2
  std::shared_ptr<std::atomic<long>> clamp_count_;
};

}  // namespace xdiff

#endif
