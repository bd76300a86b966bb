#include "xdiff/reports.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "xdiff/errors.hpp"

namespace xdiff {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open report file for writing: " + path);
  return out;
}

const char* kLiminfNote =
    "# liminf over R -> 0 is discretized as the minimum over the configured radii ladder\n";

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_certification_csv(const std::string& path,
                             const std::vector<CertificationReport>& reports) {
  std::ofstream out = open_out(path);
  out << "condition,model,matrix_form,resolution,epsilon,lambda_target,min_margin,"
         "lambda_lo,lambda_hi,near_diag_bound,mu,lipschitz_slack,doubling_c,m_norm_bound,"
         "pass,argmin_state\n";
  for (const CertificationReport& r : reports) {
    out << r.condition << ',' << r.model_name << ',' << r.matrix_form << ',' << r.resolution
        << ',' << format_double(r.epsilon) << ',' << format_double(r.lambda_target) << ','
        << format_double(r.min_margin) << ',' << format_double(r.lambda_lo) << ','
        << format_double(r.lambda_hi) << ',' << format_double(r.near_diag_bound) << ','
        << format_double(r.mu) << ',' << format_double(r.lipschitz_slack) << ','
        << format_double(r.doubling_c) << ',' << format_double(r.m_norm_bound) << ','
        << (r.pass ? "true" : "false") << ',';
    for (int i = 0; i < r.argmin_state.size(); ++i) {
      if (i) out << ' ';
      out << format_double(r.argmin_state[i]);
    }
    out << '\n';
  }
}

void write_entropy_csv(const std::string& path, const std::vector<EntropyReportRow>& rows) {
  std::ofstream out = open_out(path);
  out << "snap,time,entropy,delta,dissipation,reaction\n";
  for (const EntropyReportRow& r : rows)
    out << r.snap << ',' << format_double(r.time) << ',' << format_double(r.entropy) << ','
        << format_double(r.delta) << ',' << format_double(r.dissipation) << ','
        << format_double(r.reaction) << '\n';
}

void write_ratio_csv(const std::string& path, const std::vector<RatioTableRow>& rows, int dim) {
  std::ofstream out = open_out(path);
  out << kLiminfNote;
  out << "x0,y0,t0,R,tilt_excess,gradient_density,gradient_excess,caccioppoli,poincare,"
         "reverse_holder,cacc_degenerate,poin_degenerate\n";
  for (const RatioTableRow& r : rows) {
    out << format_double(r.x0[0]) << ',' << format_double(dim == 2 ? r.x0[1] : 0.0) << ','
        << format_double(r.t0) << ',' << format_double(r.R) << ',' << format_double(r.tilt)
        << ',' << format_double(r.grad_density) << ',' << format_double(r.grad_excess) << ','
        << format_double(r.caccioppoli) << ',' << format_double(r.poincare) << ','
        << format_double(r.reverse_holder) << ',' << (r.cacc_degenerate ? "true" : "false")
        << ',' << (r.poin_degenerate ? "true" : "false") << '\n';
  }
}

void write_candidates_csv(const std::string& path, const std::vector<CandidatePoint>& points,
                          const ProbeConfig& cfg, int dim) {
  std::ofstream out = open_out(path);
  out << kLiminfNote;
  out << "# thresholds are knobs, not paper constants: epsilon0 = " << format_double(cfg.epsilon0)
      << ", epsilon1 = " << format_double(cfg.epsilon1) << '\n';
  out << "cell,x0,y0,t0,min_excess,min_gradient_density,flagged\n";
  for (const CandidatePoint& p : points)
    out << p.cell << ',' << format_double(p.x0[0]) << ','
        << format_double(dim == 2 ? p.x0[1] : 0.0) << ',' << format_double(p.t0) << ','
        << format_double(p.min_excess) << ',' << format_double(p.min_grad_density) << ','
        << (p.flagged ? "true" : "false") << '\n';
}

void write_decay_csv(const std::string& path, const DecayCurve& curve) {
  std::ofstream out = open_out(path);
  out << kLiminfNote;
  out << "R,excess,slope,alpha,flat\n";
  for (const auto& [r, phi] : curve.points)
    out << format_double(r) << ',' << format_double(phi) << ',' << format_double(curve.slope)
        << ',' << format_double(curve.alpha) << ',' << (curve.flat ? "true" : "false") << '\n';
}

void write_convergence_csv(const std::string& path, const std::vector<double>& scales,
                           const std::vector<double>& errors, const std::string& scale_name,
                           double order) {
  if (scales.size() != errors.size()) throw Error("convergence table size mismatch");
  std::ofstream out = open_out(path);
  out << scale_name << ",error,fitted_order\n";
  for (size_t i = 0; i < scales.size(); ++i)
    out << format_double(scales[i]) << ',' << format_double(errors[i]) << ','
        << format_double(order) << '\n';
}

std::string certification_summary(const CertificationReport& r) {
  std::ostringstream out;
  out << "condition " << r.condition << " for model " << r.model_name << " (matrix form "
      << r.matrix_form << ")\n";
  out << "  resolution " << r.resolution << ", lambda_target " << format_double(r.lambda_target)
      << "\n";
  if (std::isfinite(r.epsilon)) out << "  epsilon " << format_double(r.epsilon) << "\n";
  out << "  min margin " << format_double(r.min_margin) << " at state [";
  for (int i = 0; i < r.argmin_state.size(); ++i) {
    if (i) out << ", ";
    out << format_double(r.argmin_state[i]);
  }
  out << "]\n";
  out << "  relative-entropy bounds: lambda' = " << format_double(r.lambda_lo)
      << ", Lambda' = " << format_double(r.lambda_hi) << "\n";
  if (std::isfinite(r.near_diag_bound))
    out << "  near-diagonal bound " << format_double(r.near_diag_bound) << ", mu "
        << format_double(r.mu) << "\n";
  out << "  sampling slack estimate " << format_double(r.lipschitz_slack) << ", doubling C "
      << format_double(r.doubling_c) << ", max matrix norm " << format_double(r.m_norm_bound)
      << "\n";
  out << "  verdict: " << (r.pass ? "PASS" : "FAIL") << "\n";
  return out.str();
}

}  // namespace xdiff
