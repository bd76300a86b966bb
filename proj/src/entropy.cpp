#include "xdiff/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace xdiff {

namespace {

double asimp_rec(const std::function<double(double)>& f, double a, double fa, double b, double fb,
                 double m, double fm, double S, double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double Sl = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double Sr = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = Sl + Sr - S;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return Sl + Sr + delta / 15.0;
  return asimp_rec(f, a, fa, m, fm, lm, flm, Sl, 0.5 * tol, depth - 1) +
         asimp_rec(f, m, fm, b, fb, rm, frm, Sr, 0.5 * tol, depth - 1);
}

// Adaptive Simpson with relative tolerance; integrands here are smooth and
// single-signed, so the initial coarse estimate is a safe tolerance anchor.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-10) {
  if (!(b > a)) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fb = f(b), fm = f(m);
  double S = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  double tol = rel_tol * (std::abs(S) + 1e-30);
  return asimp_rec(f, a, fa, b, fb, m, fm, S, tol, 40);
}

constexpr int kTableIntervals = 64;

}  // namespace

ScalarEntropy boltzmann_entropy(double d) {
  ScalarEntropy s;
  s.d = d;
  s.blowup = BlowupClass::Case1;
  s.h = [](double u) { return u <= 0.0 ? 0.0 : u * (std::log(u) - 1.0); };
  s.dh = [](double u) { return std::log(u); };
  s.d2h = [](double u) { return 1.0 / u; };
  return s;
}

ScalarEntropy weighted_boltzmann_entropy(double w, double d) {
  if (!(w > 0.0)) throw DomainViolation("weighted_boltzmann_entropy: weight must be positive");
  ScalarEntropy s;
  s.d = d;
  s.blowup = BlowupClass::Case1;
  s.h = [w](double u) { return u <= 0.0 ? 0.0 : u / w * (std::log(u) - 1.0); };
  s.dh = [w](double u) { return std::log(u) / w; };
  s.d2h = [w](double u) { return 1.0 / (w * u); };
  return s;
}

ScalarEntropy quadratic_entropy(double c, double d) {
  if (c < 0.0) throw DomainViolation("quadratic_entropy: coefficient must be nonnegative");
  ScalarEntropy s;
  s.d = d;
  s.blowup = BlowupClass::Case2;
  s.h = [c](double u) { return c * u * u; };
  s.dh = [c](double u) { return 2.0 * c * u; };
  s.d2h = [c](double) { return 2.0 * c; };
  return s;
}

EntropyDensity boltzmann_density(int n, double d) {
  EntropyDensity e;
  for (int i = 0; i < n; ++i) e.comp.push_back(boltzmann_entropy(d));
  return e;
}

EntropyDensity skt_density(double alpha12, double alpha21) {
  EntropyDensity e;
  e.comp.push_back(weighted_boltzmann_entropy(alpha12));
  e.comp.push_back(weighted_boltzmann_entropy(alpha21));
  return e;
}

EntropyDensity pks_density(double delta, double beta) {
  if (!(delta > 0.0)) throw DomainViolation("pks_density: delta must be positive");
  if (beta < 0.0) throw DomainViolation("pks_density: beta must be nonnegative");
  EntropyDensity e;
  e.comp.push_back(boltzmann_entropy());
  e.comp.push_back(quadratic_entropy(beta / (2.0 * delta)));
  return e;
}

double validate_density(const EntropyDensity& density) {
  double doubling = 1.0;
  for (int i = 0; i < density.n(); ++i) {
    const ScalarEntropy& c = density.comp[static_cast<size_t>(i)];
    if (!(c.d > 0.0)) throw DomainViolation("entropy: domain bound must be positive");
    if (c.blowup == BlowupClass::Case1) {
      double prev = 0.0;
      for (int k = 1; k <= 20; ++k) {
        double eps = c.d / 2.0 * std::pow(2.0, -k);
        double v = c.d2h(eps);
        if (!(v > 0.0) || !std::isfinite(v))
          throw DomainViolation("entropy: Case1 Hessian must be positive and finite on (0,d)");
        if (k > 1) {
          // monotone blow-up toward 0+ and the doubling constant h''(e)/h''(2e)
          if (v < prev * (1.0 - 1e-9))
            throw DomainViolation("entropy: Case1 Hessian not monotone toward 0+");
          doubling = std::max(doubling, v / prev);
        }
        prev = v;
      }
    } else {
      for (int j = 0; j < 1000; ++j) {
        double y = c.d * (j + 0.5) / 1000.0;
        double v = c.d2h(y);
        if (v < 0.0 || !std::isfinite(v))
          throw DomainViolation("entropy: Case2 Hessian must be nonnegative and bounded");
      }
    }
  }
  return doubling;
}

std::pair<double, double> transition_weights(double eps, double y) {
  if (y <= eps) return {1.0, 0.0};
  if (y >= 2.0 * eps) return {0.0, 1.0};
  double t = (y - eps) / eps;
  double eta2 = t * t * (3.0 - 2.0 * t);
  return {1.0 - eta2, eta2};
}

double glued_arg(double eps, double y) {
  auto [eta1, eta2] = transition_weights(eps, y);
  return eps * eta1 + y * eta2;
}

double relative_entropy(const EntropyDensity& density, const Vec& u, const Vec& v,
                        std::atomic<long>* clamp_count) {
  if (u.size() != density.n() || v.size() != density.n())
    throw DomainViolation("relative_entropy: state size mismatch");
  auto clamp = [&](int i, double y) {
    double d = density.comp[static_cast<size_t>(i)].d;
    if (y < 0.0) {
      if (y < -1e-12) throw DomainViolation("relative_entropy: state below 0");
      if (clamp_count) ++*clamp_count;
      return 0.0;
    }
    if (y > d) {
      if (y > d + 1e-12) throw DomainViolation("relative_entropy: state above domain bound");
      if (clamp_count) ++*clamp_count;
      return d;
    }
    return y;
  };
  double acc = 0.0;
  for (int i = 0; i < density.n(); ++i) {
    const ScalarEntropy& c = density.comp[static_cast<size_t>(i)];
    double ui = clamp(i, u[i]), vi = clamp(i, v[i]);
    acc += c.h(ui) - c.h(vi) - c.dh(vi) * (ui - vi);
  }
  return acc;
}

GluedEntropy::GluedEntropy(EntropyDensity base, double eps)
    : base_(std::move(base)), eps_(eps), clamp_count_(std::make_shared<std::atomic<long>>(0)) {
  if (base_.n() == 0) throw DomainViolation("glued entropy: empty density");
  double dmin = base_.comp[0].d;
  for (const auto& c : base_.comp) dmin = std::min(dmin, c.d);
  if (!(eps_ > 0.0) || !(eps_ < dmin / 2.0))
    throw DomainViolation("glued entropy: need 0 < eps < min_i d_i / 2");
  doubling_c_ = validate_density(base_);

  tables_.resize(static_cast<size_t>(base_.n()));
  lambda_lo_ = std::numeric_limits<double>::infinity();
  lambda_hi_ = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < base_.n(); ++i) {
    const ScalarEntropy& c = base_.comp[static_cast<size_t>(i)];
    if (c.blowup == BlowupClass::Case2) {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (int j = 0; j < 1000; ++j) {
        double v = c.d2h(c.d * (j + 0.5) / 1000.0);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      lambda_lo_ = std::min(lambda_lo_, lo);
      lambda_hi_ = std::max(lambda_hi_, hi);
      continue;
    }
    Case1Tables& tb = tables_[static_cast<size_t>(i)];
    tb.c0 = c.d2h(eps_);
    tb.value_at_eps = 0.5 * tb.c0 * eps_ * eps_;
    auto hess_of_g = [&c, this](double s) { return c.d2h(glued_arg(eps_, s)); };
    tb.cum_hess.assign(kTableIntervals + 1, 0.0);
    double dy = eps_ / kTableIntervals;
    for (int j = 1; j <= kTableIntervals; ++j)
      tb.cum_hess[static_cast<size_t>(j)] =
          tb.cum_hess[static_cast<size_t>(j - 1)] +
          adaptive_simpson(hess_of_g, eps_ + (j - 1) * dy, eps_ + j * dy);
    tb.grad_at_2eps = tb.c0 * eps_ + tb.cum_hess[kTableIntervals];

    auto grad_mid = [&c, &tb, this](double s) {
      double pos = (s - eps_) / eps_ * kTableIntervals;
      int j = std::clamp(static_cast<int>(pos), 0, kTableIntervals - 1);
      double node = eps_ * (1.0 + static_cast<double>(j) / kTableIntervals);
      auto hg = [&c, this](double t) { return c.d2h(glued_arg(eps_, t)); };
      return tb.c0 * eps_ + tb.cum_hess[static_cast<size_t>(j)] + adaptive_simpson(hg, node, s);
    };
    tb.cum_grad.assign(kTableIntervals + 1, 0.0);
    for (int j = 1; j <= kTableIntervals; ++j)
      tb.cum_grad[static_cast<size_t>(j)] =
          tb.cum_grad[static_cast<size_t>(j - 1)] +
          adaptive_simpson(grad_mid, eps_ + (j - 1) * dy, eps_ + j * dy);
    tb.value_at_2eps = tb.value_at_eps + tb.cum_grad[kTableIntervals];
    tb.base_dh_2eps = c.dh(2.0 * eps_);
    tb.base_h_2eps = c.h(2.0 * eps_);

    // Hessian bounds from {eps, 2eps, d} using Case1 monotone blow-up.
    double cand[3] = {c.d2h(eps_), c.d2h(2.0 * eps_), c.d2h(c.d)};
    lambda_lo_ = std::min(lambda_lo_, std::min(cand[0], std::min(cand[1], cand[2])));
    lambda_hi_ = std::max(lambda_hi_, std::max(cand[0], std::max(cand[1], cand[2])));
  }
}

double GluedEntropy::clamp_domain(int i, double y) const {
  double d = base_.comp[static_cast<size_t>(i)].d;
  if (y < 0.0) {
    if (y < -1e-12) {
      std::ostringstream msg;
      msg << "glued entropy: component " << i << " state " << y << " below 0";
      throw DomainViolation(msg.str());
    }
    ++*clamp_count_;
    return 0.0;
  }
  if (y > d) {
    if (y > d + 1e-12) {
      std::ostringstream msg;
      msg << "glued entropy: component " << i << " state " << y << " above " << d;
      throw DomainViolation(msg.str());
    }
    ++*clamp_count_;
    return d;
  }
  return y;
}

double GluedEntropy::hess1(int i, double y) const {
  const ScalarEntropy& c = base_.comp[static_cast<size_t>(i)];
  y = clamp_domain(i, y);
  if (c.blowup == BlowupClass::Case2) return c.d2h(y);
  const Case1Tables& tb = tables_[static_cast<size_t>(i)];
  if (y <= eps_) return tb.c0;
  if (y >= 2.0 * eps_) return c.d2h(y);
  return c.d2h(glued_arg(eps_, y));
}

double GluedEntropy::grad1_mid(int i, double y) const {
  const ScalarEntropy& c = base_.comp[static_cast<size_t>(i)];
  const Case1Tables& tb = tables_[static_cast<size_t>(i)];
  double pos = (y - eps_) / eps_ * kTableIntervals;
  int j = std::clamp(static_cast<int>(pos), 0, kTableIntervals - 1);
  double node = eps_ * (1.0 + static_cast<double>(j) / kTableIntervals);
  auto hg = [&c, this](double t) { return c.d2h(glued_arg(eps_, t)); };
  return tb.c0 * eps_ + tb.cum_hess[static_cast<size_t>(j)] + adaptive_simpson(hg, node, y);
}

double GluedEntropy::grad1(int i, double y) const {
  const ScalarEntropy& c = base_.comp[static_cast<size_t>(i)];
  y = clamp_domain(i, y);
  if (c.blowup == BlowupClass::Case2) return c.dh(y);
  const Case1Tables& tb = tables_[static_cast<size_t>(i)];
  if (y <= eps_) return tb.c0 * y;
  if (y >= 2.0 * eps_) return tb.grad_at_2eps + c.dh(y) - tb.base_dh_2eps;
  return grad1_mid(i, y);
}

double GluedEntropy::value1(int i, double y) const {
  const ScalarEntropy& c = base_.comp[static_cast<size_t>(i)];
  y = clamp_domain(i, y);
  if (c.blowup == BlowupClass::Case2) return c.h(y);
  const Case1Tables& tb = tables_[static_cast<size_t>(i)];
  if (y <= eps_) return 0.5 * tb.c0 * y * y;
  if (y >= 2.0 * eps_)
    return tb.value_at_2eps + (c.h(y) - tb.base_h_2eps) +
           (tb.grad_at_2eps - tb.base_dh_2eps) * (y - 2.0 * eps_);
  double pos = (y - eps_) / eps_ * kTableIntervals;
  int j = std::clamp(static_cast<int>(pos), 0, kTableIntervals - 1);
  double node = eps_ * (1.0 + static_cast<double>(j) / kTableIntervals);
  auto gm = [this, i](double t) { return grad1_mid(i, t); };
  return tb.value_at_eps + tb.cum_grad[static_cast<size_t>(j)] + adaptive_simpson(gm, node, y);
}

Vec GluedEntropy::hessian_diag(const Vec& y) const {
  if (y.size() != n()) throw DomainViolation("glued entropy: state size mismatch");
  Vec out(n());
  for (int i = 0; i < n(); ++i) out[i] = hess1(i, y[i]);
  return out;
}

double GluedEntropy::value(const Vec& y) const {
  if (y.size() != n()) throw DomainViolation("glued entropy: state size mismatch");
  double acc = 0.0;
  for (int i = 0; i < n(); ++i) acc += value1(i, y[i]);
  return acc;
}

Vec GluedEntropy::grad(const Vec& y) const {
  if (y.size() != n()) throw DomainViolation("glued entropy: state size mismatch");
  Vec out(n());
  for (int i = 0; i < n(); ++i) out[i] = grad1(i, y[i]);
  return out;
}

std::pair<double, Vec> GluedEntropy::value_and_grad(const Vec& y) const {
  return {value(y), grad(y)};
}

double GluedEntropy::relative(const Vec& u, const Vec& v) const {
  if (u.size() != n() || v.size() != n())
    throw DomainViolation("glued entropy: state size mismatch");
  double acc = 0.0;
  for (int i = 0; i < n(); ++i)
    acc += value1(i, u[i]) - value1(i, v[i]) - grad1(i, v[i]) * (u[i] - v[i]);
  return acc;
}

}  // namespace xdiff
