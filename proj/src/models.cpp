#include "xdiff/models.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace xdiff {

namespace {

void check_pair_coefficients(const Mat& D, const char* who, bool strictly_positive) {
  if (D.rows() != D.cols() || D.rows() < 2)
    throw BadCoefficients(std::string(who) + ": coefficient matrix must be square, n >= 2");
  for (int i = 0; i < D.rows(); ++i)
    for (int j = 0; j < D.cols(); ++j) {
      if (i == j) continue;
      if (!std::isfinite(D(i, j)))
        throw BadCoefficients(std::string(who) + ": non-finite coefficient");
      if (D(i, j) != D(j, i))
        throw BadCoefficients(std::string(who) + ": coefficients must be symmetric");
      if (strictly_positive ? !(D(i, j) > 0.0) : D(i, j) < 0.0)
        throw BadCoefficients(std::string(who) + ": off-diagonal coefficients out of range");
    }
}

// Solve M0 x = b columns by LU with a condition estimate.
Mat invert_reduced(const Mat& M0) {
  Eigen::PartialPivLU<Mat> lu(M0);
  double rc = lu.rcond();
  if (!(rc > 1e-12)) {
    std::ostringstream msg;
    msg << "ms_effective_A: reduced matrix condition estimate " << (rc > 0 ? 1.0 / rc : 0.0)
        << " exceeds 1e12";
    throw IllConditioned(msg.str());
  }
  return lu.solve(Mat::Identity(M0.rows(), M0.cols()));
}

Vec random_box_point(const Vec& upper, std::mt19937& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Vec y(upper.size());
  for (int i = 0; i < upper.size(); ++i) y[i] = upper[i] * uni(rng);
  return y;
}

Vec random_simplex_point(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> uni(1e-12, 1.0);
  Vec y(n);
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    y[i] = -std::log(uni(rng));
    s += y[i];
  }
  return y / s;
}

}  // namespace

Vec CrossDiffusionModel::expand_state(const Vec& u_solve) const {
  if (!reduced_solve) return u_solve;
  Vec u(n);
  double s = 0.0;
  for (int i = 0; i < n - 1; ++i) {
    u[i] = u_solve[i];
    s += u_solve[i];
  }
  u[n - 1] = 1.0 - s;
  return u;
}

void CrossDiffusionModel::validate(int samples) const {
  std::mt19937 rng(24680u);
  for (int s = 0; s < samples; ++s) {
    Vec y = constraint == Constraint::VolumeFilling ? random_simplex_point(n, rng)
                                                    : random_box_point(domain_upper, rng);
    Mat a = A(y);
    Vec fy = f(y);
    if (!a.allFinite() || !fy.allFinite())
      throw BadCoefficients(name + ": A or f non-finite on the domain box");
    if (constraint == Constraint::VolumeFilling && std::abs(fy.sum()) > 1e-12)
      throw BadCoefficients(name + ": reaction does not preserve the volume constraint");
  }
}

Mat ms_matrix(const Mat& D, const Vec& y) {
  check_pair_coefficients(D, "ms_matrix", true);
  const int n = static_cast<int>(D.rows());
  Mat M = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        for (int k = 0; k < n; ++k)
          if (k != i) M(i, i) += y[k] / D(i, k);
      } else {
        M(i, j) = -y[i] / D(i, j);
      }
    }
  return M;
}

Mat ms_reduced(const Mat& D, const Vec& uprime) {
  check_pair_coefficients(D, "ms_reduced", true);
  const int n = static_cast<int>(D.rows());
  Mat M0 = Mat::Zero(n - 1, n - 1);
  for (int i = 0; i < n - 1; ++i) {
    M0(i, i) = 1.0 / D(i, n - 1);
    for (int k = 0; k < n - 1; ++k)
      if (k != i) M0(i, i) += (1.0 / D(i, k) - 1.0 / D(i, n - 1)) * uprime[k];
    for (int j = 0; j < n - 1; ++j)
      if (j != i) M0(i, j) = -(1.0 / D(i, j) - 1.0 / D(i, n - 1)) * uprime[i];
  }
  return M0;
}

Mat ms_effective_A(const Mat& D, const Vec& y) {
  check_pair_coefficients(D, "ms_effective_A", true);
  const int n = static_cast<int>(D.rows());
  Mat M0inv = invert_reduced(ms_reduced(D, y.head(n - 1)));
  Mat B = Mat::Zero(n, n);
  B.topLeftCorner(n - 1, n - 1) = M0inv;
  Mat X = Mat::Identity(n, n);
  Mat Xinv = Mat::Identity(n, n);
  for (int j = 0; j < n - 1; ++j) {
    X(n - 1, j) = -1.0;
    Xinv(n - 1, j) = 1.0;
  }
  return X * B * Xinv;
}

Mat hb_matrix(const Mat& K, const Vec& y) {
  check_pair_coefficients(K, "hb_matrix", false);
  const int n = static_cast<int>(K.rows());
  Mat M = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        for (int k = 0; k < n; ++k)
          if (k != i) M(i, i) += K(i, k) * y[k];
      } else {
        M(i, j) = -K(i, j) * y[i];
      }
    }
  return M;
}

Mat skt_matrix(const SktCoeffs& alpha, const Vec& y) {
  for (double a : alpha)
    if (!(a > 0.0)) throw BadCoefficients("skt_matrix: all alpha coefficients must be positive");
  Mat A(2, 2);
  A(0, 0) = alpha[0] + 2.0 * alpha[1] * y[0] + alpha[2] * y[1];
  A(0, 1) = alpha[2] * y[0];
  A(1, 0) = alpha[4] * y[1];
  A(1, 1) = alpha[3] + alpha[4] * y[0] + 2.0 * alpha[5] * y[1];
  return A;
}

Vec skt_reaction(const SktCoeffs& beta, const Vec& y) {
  for (double b : beta)
    if (b < 0.0 || !std::isfinite(b))
      throw BadCoefficients("skt_reaction: beta coefficients must be nonnegative");
  Vec f(2);
  f[0] = (beta[0] - beta[1] * y[0] - beta[2] * y[1]) * y[0];
  f[1] = (beta[3] - beta[4] * y[0] - beta[5] * y[1]) * y[1];
  return f;
}

Mat sc_matrix(double mu1, double mu2, const Vec& y) {
  if (!(mu1 > 0.0) || !(mu2 > 0.0))
    throw BadCoefficients("sc_matrix: mobilities must be positive");
  double pref = 1.0 / (1.0 + mu2 * y[0] + mu1 * y[1]);
  Mat A(2, 2);
  A(0, 0) = mu1 * (1.0 + mu2 * y[0]);
  A(0, 1) = mu1 * mu2 * y[0];
  A(1, 0) = mu1 * mu2 * y[1];
  A(1, 1) = mu2 * (1.0 + mu1 * y[1]);
  return pref * A;
}

CrossDiffusionModel heat_model(int n, double d) {
  CrossDiffusionModel m;
  m.name = "heat";
  m.n = n;
  m.domain_upper = Vec::Constant(n, d);
  m.mass_diag = Vec::Ones(n);
  m.A = [n](const Vec&) { return Mat::Identity(n, n); };
  m.f = [n](const Vec&) { return Vec::Zero(n); };
  m.certify_matrix = m.A;
  m.entropy = boltzmann_density(n, d);
  for (int i = 0; i < n; ++i)
    m.near_diagonal.push_back([](const Vec&) { return 1.0; });
  return m;
}

CrossDiffusionModel skt_model(const SktCoeffs& alpha, const SktCoeffs& beta, double d1,
                              double d2) {
  skt_matrix(alpha, Vec::Zero(2));  // coefficient validation
  CrossDiffusionModel m;
  m.name = "skt";
  m.n = 2;
  m.domain_upper = Vec(2);
  m.domain_upper << d1, d2;
  m.mass_diag = Vec::Ones(2);
  m.A = [alpha](const Vec& y) { return skt_matrix(alpha, y); };
  m.f = [beta](const Vec& y) { return skt_reaction(beta, y); };
  m.certify_matrix = m.A;
  m.entropy = skt_density(alpha[2], alpha[4]);
  m.entropy.comp[0].d = d1;
  m.entropy.comp[1].d = d2;
  m.near_diagonal.push_back([alpha](const Vec& y) { return alpha[0] + alpha[2] * y[1]; });
  m.near_diagonal.push_back([alpha](const Vec& y) { return alpha[3] + alpha[4] * y[0]; });
  return m;
}

CrossDiffusionModel sc_model(double mu1, double mu2, double d1, double d2) {
  sc_matrix(mu1, mu2, Vec::Zero(2));
  CrossDiffusionModel m;
  m.name = "sc";
  m.n = 2;
  m.domain_upper = Vec(2);
  m.domain_upper << d1, d2;
  m.mass_diag = Vec::Ones(2);
  m.A = [mu1, mu2](const Vec& y) { return sc_matrix(mu1, mu2, y); };
  m.f = [](const Vec&) { return Vec::Zero(2); };
  m.certify_matrix = m.A;
  m.entropy = boltzmann_density(2);
  m.entropy.comp[0].d = d1;
  m.entropy.comp[1].d = d2;
  m.near_diagonal.push_back(
      [mu1, mu2](const Vec& y) { return mu1 / (1.0 + mu2 * y[0] + mu1 * y[1]); });
  m.near_diagonal.push_back(
      [mu1, mu2](const Vec& y) { return mu2 / (1.0 + mu2 * y[0] + mu1 * y[1]); });
  return m;
}

CrossDiffusionModel hj_model(double delta, double mu, double beta, double d1, double d2) {
  if (!(delta > 0.0) || !(mu > 0.0) || beta < 0.0)
    throw BadCoefficients("hj_model: need delta > 0, mu > 0, beta >= 0");
  CrossDiffusionModel m;
  m.name = "pks";
  m.n = 2;
  m.domain_upper = Vec(2);
  m.domain_upper << d1, d2;
  m.mass_diag = Vec(2);
  m.mass_diag << 1.0, beta;
  m.A = [delta](const Vec& y) {
    Mat A(2, 2);
    A << 1.0, -y[0], delta, 1.0;
    return A;
  };
  m.f = [mu](const Vec& y) {
    Vec f(2);
    f << 0.0, mu * y[0] - y[1];
    return f;
  };
  m.certify_matrix = m.A;
  m.entropy = pks_density(delta, beta);
  m.entropy.comp[0].d = d1;
  m.entropy.comp[1].d = d2;
  m.near_diagonal.push_back([](const Vec& y) { return y[0] + 1.0; });
  m.near_diagonal.push_back({});  // component 2 is Case2
  m.dim_restriction = 2;
  return m;
}

namespace {

// Comparison functions m_i for the Maxwell-Stefan shaped matrices:
// m_i(y) = (D_i + sum_{j != i} (prod_{k != i,j} D_ik - D_i) y_j) / prod_{j != i} D_ij
// with D_i = min_{j != i} prod_{k != i,j} D_ik.
std::function<double(const Vec&)> ms_comparison(const Mat& D, int i) {
  const int n = static_cast<int>(D.rows());
  auto offdiag_product_skipping = [&D, n, i](int skip) {
    double p = 1.0;
    for (int k = 0; k < n; ++k)
      if (k != i && k != skip) p *= D(i, k);
    return p;
  };
  double Di = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j)
    if (j != i) Di = std::min(Di, offdiag_product_skipping(j));
  double denom = offdiag_product_skipping(i);  // prod over all k != i
  std::vector<double> weight(static_cast<size_t>(n), 0.0);
  for (int j = 0; j < n; ++j)
    if (j != i) weight[static_cast<size_t>(j)] = offdiag_product_skipping(j) - Di;
  return [Di, denom, weight, n, i](const Vec& y) {
    double acc = Di;
    for (int j = 0; j < n; ++j)
      if (j != i) acc += weight[static_cast<size_t>(j)] * y[j];
    return acc / denom;
  };
}

}  // namespace

CrossDiffusionModel ms_model(int n, const Mat& D) {
  check_pair_coefficients(D, "ms_model", true);
  if (D.rows() != n) throw BadCoefficients("ms_model: coefficient size does not match n");
  CrossDiffusionModel m;
  m.name = "ms";
  m.n = n;
  m.domain_upper = Vec::Ones(n);
  m.constraint = Constraint::VolumeFilling;
  m.mass_diag = Vec::Ones(n);
  m.A = [D](const Vec& y) { return ms_effective_A(D, y); };
  m.f = [n](const Vec&) { return Vec::Zero(n); };
  m.certify_matrix = [D](const Vec& y) { return ms_matrix(D, y); };
  m.entropy = boltzmann_density(n);
  for (int i = 0; i < n; ++i) m.near_diagonal.push_back(ms_comparison(D, i));
  m.reduced_solve = true;
  m.A_reduced = [D](const Vec& up) { return invert_reduced(ms_reduced(D, up)); };
  m.f_reduced = [n](const Vec&) { return Vec::Zero(n - 1); };
  return m;
}

CrossDiffusionModel hb_model(int n, const Mat& K, bool full_interaction) {
  check_pair_coefficients(K, "hb_model", false);
  if (K.rows() != n) throw BadCoefficients("hb_model: coefficient size does not match n");
  if (full_interaction)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && !(K(i, j) > 0.0))
          throw BadCoefficients("hb_model: full interaction requires K_ij > 0");
  CrossDiffusionModel m;
  m.name = "hb";
  m.n = n;
  m.domain_upper = Vec::Ones(n);
  m.constraint = Constraint::VolumeFilling;
  m.mass_diag = Vec::Ones(n);
  m.A = [K](const Vec& y) { return hb_matrix(K, y); };
  m.f = [n](const Vec&) { return Vec::Zero(n); };
  m.certify_matrix = m.A;
  m.entropy = boltzmann_density(n);
  if (full_interaction) {
    Mat D = K;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) D(i, j) = 1.0 / K(i, j);
    for (int i = 0; i < n; ++i) m.near_diagonal.push_back(ms_comparison(D, i));
  }
  return m;
}

CrossDiffusionModel toy_negdef_model() {
  CrossDiffusionModel m;
  m.name = "toy_negdef";
  m.n = 2;
  m.domain_upper = Vec::Ones(2);
  m.mass_diag = Vec::Ones(2);
  m.A = [](const Vec&) { return -Mat::Identity(2, 2); };
  m.f = [](const Vec&) { return Vec::Zero(2); };
  m.certify_matrix = m.A;
  m.entropy = boltzmann_density(2);
  return m;
}

CrossDiffusionModel toy_zero_model() {
  CrossDiffusionModel m;
  m.name = "toy_zero";
  m.n = 2;
  m.domain_upper = Vec::Ones(2);
  m.mass_diag = Vec::Ones(2);
  m.A = [](const Vec&) { return Mat::Zero(2, 2); };
  m.f = [](const Vec&) { return Vec::Zero(2); };
  m.certify_matrix = m.A;
  m.entropy = boltzmann_density(2);
  return m;
}

}  // namespace xdiff
