#ifndef XDIFF_REPORTS_HPP
#define XDIFF_REPORTS_HPP

#include <string>
#include <vector>

#include "xdiff/probe.hpp"
#include "xdiff/solver.hpp"
#include "xdiff/verifier.hpp"

namespace xdiff {

// 17 significant digits: parses back to the identical binary64.
std::string format_double(double v);

// CSV emitters; stable column order, one header row, '#' comment lines
// first where a report needs a methodological note.
void write_certification_csv(const std::string& path,
                             const std::vector<CertificationReport>& reports);
void write_entropy_csv(const std::string& path, const std::vector<EntropyReportRow>& rows);
void write_ratio_csv(const std::string& path, const std::vector<RatioTableRow>& rows, int dim);
void write_candidates_csv(const std::string& path, const std::vector<CandidatePoint>& points,
                          const ProbeConfig& cfg, int dim);
void write_decay_csv(const std::string& path, const DecayCurve& curve);
void write_convergence_csv(const std::string& path, const std::vector<double>& scales,
                           const std::vector<double>& errors, const std::string& scale_name,
                           double order);

std::string certification_summary(const CertificationReport& report);

}  // namespace xdiff

#endif
