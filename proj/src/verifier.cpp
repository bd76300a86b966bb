#include "xdiff/verifier.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>
#include <vector>

#include "xdiff/errors.hpp"
#include "xdiff/parallel.hpp"

namespace xdiff {

namespace {

void require_finite(const Mat& m, const std::string& what) {
  if (!m.allFinite()) throw NonFiniteMatrix(what + " has non-finite entries");
}

void require_finite(const Vec& v, const std::string& what) {
  if (!v.allFinite()) throw NonFiniteMatrix(what + " has non-finite entries");
}

// A deterministic enumeration of certification sample points. Tensor grids
// cover the closed coefficient box axis by axis; volume-filling models use
// the barycentric lattice {k/m : sum k_i = m} of the closed simplex. Raw
// entropies cannot be evaluated on Case1 axes at 0, so their grids are
// shifted strictly inside (tensor: lower bound d_i/(2m); simplex:
// (k_i + 1/2)/(m + n/2)).
struct SampleGrid {
  long total = 0;
  double spacing = 0.0;  // max distance between neighboring grid points
  std::function<Vec(long)> point;
};

std::vector<Eigen::VectorXi> simplex_compositions(int m, int n) {
  std::vector<Eigen::VectorXi> out;
  Eigen::VectorXi k = Eigen::VectorXi::Zero(n);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == n - 1) {
      k[pos] = left;
      out.push_back(k);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      k[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, m);
  return out;
}

SampleGrid make_grid(const CrossDiffusionModel& model, bool raw_interior, int m) {
  if (m < 2) throw Error("sample grid resolution must be at least 2");
  const int n = model.n;
  SampleGrid grid;
  if (model.constraint == Constraint::VolumeFilling) {
    auto comps = std::make_shared<std::vector<Eigen::VectorXi>>(simplex_compositions(m, n));
    grid.total = static_cast<long>(comps->size());
    double denom = raw_interior ? (m + 0.5 * n) : double(m);
    double shift = raw_interior ? 0.5 : 0.0;
    grid.spacing = std::sqrt(2.0) / denom;
    grid.point = [comps, denom, shift, n](long idx) {
      Vec y(n);
      const Eigen::VectorXi& k = (*comps)[static_cast<size_t>(idx)];
      for (int i = 0; i < n; ++i) y[i] = (k[i] + shift) / denom;
      return y;
    };
    return grid;
  }
  double total = 1.0;
  for (int i = 0; i < n; ++i) total *= m;
  if (total > 2e7) throw Error("tensor certification grid too large: " + std::to_string(total));
  grid.total = static_cast<long>(total);
  Vec lo = Vec::Zero(n);
  Vec hi = model.domain_upper;
  if (raw_interior) {
    for (int i = 0; i < n; ++i)
      if (model.entropy.comp[static_cast<size_t>(i)].blowup == BlowupClass::Case1)
        lo[i] = hi[i] / (2.0 * m);
  }
  grid.spacing = ((hi - lo) / double(m - 1)).maxCoeff();
  grid.point = [lo, hi, m, n](long idx) {
    Vec y(n);
    long rest = idx;
    for (int i = 0; i < n; ++i) {
      long j = rest % m;
      rest /= m;
      y[i] = lo[i] + (hi[i] - lo[i]) * double(j) / double(m - 1);
    }
    return y;
  };
  return grid;
}

double spectral_norm(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

// Empirical Lipschitz moduli of y -> A(y) and y -> h''(y) over random short
// segments inside the grid's hull, used to report how much the sampled
// minimum could understate the continuum one over one grid cell.
double lipschitz_slack_estimate(const CrossDiffusionModel& model, const HessianEval& entropy,
                                const SampleGrid& grid, double hess_max, double a_max) {
  std::mt19937 rng(13579);
  std::uniform_int_distribution<long> pick(0, grid.total - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = model.n;
  double l_a = 0.0, l_h = 0.0;
  double step = 0.5 * grid.spacing;
  int accepted = 0;
  for (int trial = 0; trial < 600 && accepted < 200; ++trial) {
    Vec y = grid.point(pick(rng));
    Vec dir(n);
    for (int i = 0; i < n; ++i) dir[i] = gauss(rng);
    if (model.constraint == Constraint::VolumeFilling) dir.array() -= dir.mean();
    double norm = dir.norm();
    if (norm < 1e-12) continue;
    dir /= norm;
    Vec y2 = y + step * dir;
    bool ok = true;
    for (int i = 0; i < n; ++i)
      if (y2[i] <= 0.0 || y2[i] >= model.domain_upper[i]) ok = false;
    if (!ok) continue;
    double dist = (y2 - y).norm();
    l_a = std::max(l_a, (model.certify_matrix(y2) - model.certify_matrix(y)).norm() / dist);
    Vec dh = entropy.hess(y2) - entropy.hess(y);
    l_h = std::max(l_h, dh.cwiseAbs().maxCoeff() / dist);
    ++accepted;
  }
  return (l_a * hess_max + l_h * a_max) * grid.spacing;
}

}  // namespace

Subspace Subspace::full(int n) {
  Subspace s;
  s.kind = SubspaceKind::Full;
  s.n = n;
  s.P = Mat::Identity(n, n);
  return s;
}

Subspace Subspace::zero_sum(int n) {
  if (n < 2) throw Error("zero-sum subspace needs at least two species");
  Subspace s;
  s.kind = SubspaceKind::ZeroSum;
  s.n = n;
  s.P = Mat::Zero(n, n - 1);
  for (int k = 1; k < n; ++k) {
    double scale = 1.0 / std::sqrt(double(k) * (k + 1));
    for (int i = 0; i < k; ++i) s.P(i, k - 1) = scale;
    s.P(k, k - 1) = -double(k) * scale;
  }
  return s;
}

double coercivity_margin(const Vec& hess_diag, const Mat& A, const Subspace& s) {
  if (A.rows() != A.cols() || A.rows() != hess_diag.size() || A.rows() != s.n)
    throw Error("coercivity_margin: dimension mismatch");
  require_finite(hess_diag, "entropy Hessian");
  require_finite(A, "diffusion matrix");
  Mat ha = hess_diag.asDiagonal() * A;
  Mat sym = 0.5 * (ha + ha.transpose());
  Mat reduced = s.P.transpose() * sym * s.P;
  Eigen::SelfAdjointEigenSolver<Mat> eig(reduced);
  if (eig.info() != Eigen::Success) throw Error("coercivity_margin: eigensolver failed");
  return eig.eigenvalues().minCoeff();
}

HessianEval raw_hessian_eval(const EntropyDensity& density) {
  HessianEval e;
  e.glued = false;
  e.doubling_c = validate_density(density);
  auto comps = density.comp;
  e.hess = [comps](const Vec& y) {
    Vec h(static_cast<Eigen::Index>(comps.size()));
    for (size_t i = 0; i < comps.size(); ++i) h[static_cast<Eigen::Index>(i)] = comps[i].d2h(y[static_cast<Eigen::Index>(i)]);
    return h;
  };
  return e;
}

HessianEval glued_hessian_eval(const GluedEntropy& glued) {
  HessianEval e;
  e.glued = true;
  e.eps = glued.eps();
  e.lo = glued.lambda_lo();
  e.hi = glued.lambda_hi();
  e.doubling_c = glued.doubling_constant();
  auto g = std::make_shared<GluedEntropy>(glued);
  e.hess = [g](const Vec& y) { return g->hessian_diag(y); };
  return e;
}

CertificationReport sample_certify(const CrossDiffusionModel& model, const HessianEval& entropy,
                                   const Subspace& s, int resolution, double lambda_target,
                                   int threads) {
  if (s.n != model.n) throw Error("sample_certify: subspace dimension mismatch");
  SampleGrid grid = make_grid(model, !entropy.glued, resolution);
  const long total = grid.total;
  threads = resolve_threads(threads);

  struct ShardBest {
    double margin = std::numeric_limits<double>::infinity();
    long idx = -1;
    double a_max = 0.0;
    double h_max = 0.0;
  };
  int workers = std::max(1, std::min<int>(threads, static_cast<int>(total)));
  int chunk = static_cast<int>((total + workers - 1) / workers);
  std::vector<ShardBest> best(static_cast<size_t>(workers));

  parallel_for(static_cast<int>(total), workers, [&](int begin, int end) {
    for (int idx = begin; idx < end; ++idx) {
      Vec y = grid.point(idx);
      Vec h = entropy.hess(y);
      Mat a = model.certify_matrix(y);
      double margin = coercivity_margin(h, a, s);
      ShardBest& b = best[static_cast<size_t>(idx / chunk)];
      if (margin < b.margin || (margin == b.margin && idx < b.idx)) {
        b.margin = margin;
        b.idx = idx;
      }
      b.a_max = std::max(b.a_max, spectral_norm(a));
      b.h_max = std::max(b.h_max, h.cwiseAbs().maxCoeff());
    }
  });

  ShardBest global;
  for (const ShardBest& b : best) {
    if (b.idx < 0) continue;
    if (b.margin < global.margin || (b.margin == global.margin && b.idx < global.idx))
      global = ShardBest{b.margin, b.idx, 0.0, 0.0};
  }
  double a_max = 0.0, h_max = 0.0;
  for (const ShardBest& b : best) {
    a_max = std::max(a_max, b.a_max);
    h_max = std::max(h_max, b.h_max);
  }

  CertificationReport report;
  report.condition = entropy.glued ? (s.kind == SubspaceKind::ZeroSum ? "C1'" : "C1")
                                   : (s.kind == SubspaceKind::ZeroSum ? "H2'" : "H2");
  report.model_name = model.name;
  report.matrix_form = model.reduced_solve ? "M" : "A";
  report.min_margin = global.margin;
  report.argmin_state = grid.point(global.idx);
  report.resolution = resolution;
  report.lambda_lo = entropy.lo;
  report.lambda_hi = entropy.hi;
  report.epsilon = entropy.eps;
  report.lambda_target = lambda_target;
  report.pass = global.margin >= lambda_target;
  report.doubling_c = entropy.doubling_c;
  report.m_norm_bound = a_max;
  report.lipschitz_slack = lipschitz_slack_estimate(model, entropy, grid, h_max, a_max);
  return report;
}

std::pair<double, CertificationReport> glue_search(const CrossDiffusionModel& model,
                                                   const EntropyDensity& base,
                                                   double lambda_target, const Subspace& s,
                                                   int resolution, int threads) {
  double dmin = std::numeric_limits<double>::infinity();
  for (const ScalarEntropy& c : base.comp) dmin = std::min(dmin, c.d);
  double best_margin = -std::numeric_limits<double>::infinity();
  double best_eps = std::numeric_limits<double>::quiet_NaN();
  for (int k = 1; k <= 20; ++k) {
    double eps = 0.5 * dmin * std::pow(2.0, -k);
    GluedEntropy glued(base, eps);
    CertificationReport report =
        sample_certify(model, glued_hessian_eval(glued), s, resolution, lambda_target, threads);
    if (report.pass) return {eps, report};
    if (report.min_margin > best_margin) {
      best_margin = report.min_margin;
      best_eps = eps;
    }
  }
  throw NoAdmissibleEpsilon("no dyadic gluing width reaches margin " +
                                std::to_string(lambda_target) + " for model " + model.name,
                            best_margin, best_eps);
}

std::pair<double, double> hypocoercivity_identity(const Mat& D, const Vec& y, const Vec& rho) {
  const int n = static_cast<int>(y.size());
  if (D.rows() != n || D.cols() != n || rho.size() != n)
    throw Error("hypocoercivity_identity: dimension mismatch");
  for (int i = 0; i < n; ++i)
    if (!(y[i] > 0.0)) throw DomainViolation("hypocoercivity identity needs y > 0 componentwise");
  Mat m = ms_matrix(D, y);
  Vec hess = y.cwiseInverse();
  double lhs = rho.dot(hess.asDiagonal() * (m * rho));
  double rhs = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double diff = rho[i] / y[i] - rho[j] / y[j];
      rhs += 0.5 * (y[i] * y[j] / D(i, j)) * diff * diff;
    }
  return {lhs, rhs};
}

std::pair<double, double> near_diagonal_bound(const CrossDiffusionModel& model,
                                              const EntropyDensity& density, int resolution) {
  bool any = false;
  for (const auto& fn : model.near_diagonal)
    if (fn) any = true;
  if (!any)
    throw MissingComparisonFunctions("model " + model.name +
                                     " declares no near-diagonal comparison functions");
  if (density.n() != model.n) throw Error("near_diagonal_bound: entropy dimension mismatch");

  SampleGrid grid = make_grid(model, true, resolution);
  double bound = 0.0;
  double mu = std::numeric_limits<double>::infinity();
  for (long idx = 0; idx < grid.total; ++idx) {
    Vec y = grid.point(idx);
    Mat a = model.certify_matrix(y);
    for (int i = 0; i < model.n; ++i) {
      const auto& fn = model.near_diagonal[static_cast<size_t>(i)];
      if (!fn) continue;
      if (density.comp[static_cast<size_t>(i)].blowup != BlowupClass::Case1) continue;
      double ai = fn(y);
      mu = std::min(mu, ai);
      double hess = density.comp[static_cast<size_t>(i)].d2h(y[i]);
      for (int j = 0; j < model.n; ++j) {
        double entry = a(i, j) - (i == j ? ai : 0.0);
        bound = std::max(bound, std::abs(entry) * hess);
      }
    }
  }
  return {bound, mu};
}

}  // namespace xdiff
