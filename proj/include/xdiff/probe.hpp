#ifndef XDIFF_PROBE_HPP
#define XDIFF_PROBE_HPP

#include <vector>

#include "xdiff/grid.hpp"
#include "xdiff/models.hpp"
#include "xdiff/solver.hpp"

namespace xdiff {

// Knobs of the Campanato-style diagnostics. The infimum over vanishing radii
// is replaced by the minimum over the configured ladder (discrete data has a
// smallest scale); every report states this.
struct ProbeConfig {
  std::vector<double> radii;  // descending, largest first
  double epsilon0 = 1e-2;     // excess threshold
  double epsilon1 = 1e-2;     // gradient-density threshold
  double p = 2.5;             // reverse-Hoelder exponent, > 2
  double tau = 1.0 / 16.0;    // inner-radius factor, in (0, 1/16]
  int lattice_stride = 1;     // candidate lattice: every k-th cell center
  double t0 = std::numeric_limits<double>::quiet_NaN();  // default: last snapshot
  int threads = 0;            // 0: resolve via XDIFF_THREADS

  void validate() const;
};

// Mean squared deviation from the cylinder average,
// integral-average over the covered (cell, snapshot) pairs.
double tilt_excess(const Field& trajectory, const ParabolicCylinder& cyl);

// Average squared deviation of the discrete gradient from its cylinder mean
// (Frobenius norm per cell).
double gradient_excess(const Field& trajectory, const ParabolicCylinder& cyl);

// R^{-d} * integral of |grad_h u|^2 over the cylinder.
double gradient_density(const Field& trajectory, const ParabolicCylinder& cyl);

struct DecayCurve {
  std::vector<std::pair<double, double>> points;  // (R, excess)
  double slope = std::numeric_limits<double>::quiet_NaN();  // of log(excess) vs log R
  double alpha = std::numeric_limits<double>::quiet_NaN();  // slope / 2
  bool flat = false;  // every excess at the floor; slope left NaN
};
DecayCurve excess_decay_curve(const Field& trajectory, const Point& x0, double t0,
                              const std::vector<double>& radii);

struct RatioResult {
  double value = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool degenerate = false;  // rhs below 1e-30; value 0 by convention
};

// grad energy on C_R over (1/R^2) oscillation on C_2R plus R^{d+4} sup|f|^2;
// the per-snapshot reference is the cutoff-weighted spatial mean at radius R.
RatioResult caccioppoli_ratio(const Field& trajectory, const CrossDiffusionModel& model,
                              const ParabolicCylinder& cyl);

// Oscillation on C_R over R^2 grad energy on C_2R plus R^{d+6} sup|f|^2; the
// model is optional and only supplies the f term.
RatioResult poincare_ratio(const Field& trajectory, const ParabolicCylinder& cyl,
                           const CrossDiffusionModel* model = nullptr);

// (avg |grad u|^p on C_R)^{1/p} over (avg |grad u|^2 on C_4R)^{1/2} + R.
double reverse_holder_ratio(const Field& trajectory, const ParabolicCylinder& cyl, double p);

struct CandidatePoint {
  int cell = 0;
  Point x0{0.0, 0.0};
  double t0 = 0.0;
  double min_excess = 0.0;        // min over admissible radii
  double min_grad_density = 0.0;  // min over admissible radii
  bool flagged = false;
};

// Evaluate the smallness conditions over a cell-center lattice; a point is a
// singular-set candidate when the excess minimum exceeds epsilon0 or the
// gradient-density minimum exceeds epsilon1. Points where not even the
// smallest radius gives an interior cylinder are skipped.
std::vector<CandidatePoint> singular_candidates(const Field& trajectory,
                                                const ProbeConfig& cfg);

struct FrozenComparison {
  double error_energy = 0.0;     // integral of |grad(ubar - u)|^2 on C_{R/8}
  double solution_energy = 0.0;  // integral of |grad u|^2 on C_{R/8}
  double ratio = 0.0;
  bool degenerate = false;       // solution energy below 1e-30
  double margin = 0.0;           // coercivity margin at the freeze state
};

// Freeze A at the plain mean over C_R(z0), solve the linear companion
// problem on C_{R/8}(z0) with boundary data from the trajectory, and compare
// gradient energies there.
FrozenComparison frozen_comparison(const Field& trajectory, const CrossDiffusionModel& model,
                                   const GluedEntropy& glued, const Point& x0, double t0,
                                   double R);

struct RatioTableRow {
  Point x0{0.0, 0.0};
  double t0 = 0.0;
  double R = 0.0;
  double tilt = 0.0;
  double grad_density = 0.0;
  double grad_excess = 0.0;
  double caccioppoli = 0.0;
  double poincare = 0.0;
  double reverse_holder = 0.0;
  bool cacc_degenerate = false;
  bool poin_degenerate = false;
};

// All ratio diagnostics over a list of cylinders, parallel over rows with
// slot-writes (output independent of the worker count, bit for bit).
std::vector<RatioTableRow> ratio_table(const Field& trajectory, const CrossDiffusionModel& model,
                                       const std::vector<ParabolicCylinder>& cylinders, double p,
                                       int threads = 0);

}  // namespace xdiff

#endif
