#ifndef XDIFF_ERRORS_HPP
#define XDIFF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace xdiff {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// grid-geometry
struct EmptyCylinder : Error { using Error::Error; };
struct ZeroWeight : Error { using Error::Error; };

// entropy-toolkit
struct DomainViolation : Error { using Error::Error; };

// model-zoo
struct BadCoefficients : Error { using Error::Error; };
struct IllConditioned : Error { using Error::Error; };

// structure-verifier
struct NonFiniteMatrix : Error { using Error::Error; };
struct MissingComparisonFunctions : Error { using Error::Error; };
struct NoAdmissibleEpsilon : Error {
  NoAdmissibleEpsilon(const std::string& msg, double margin, double eps)
      : Error(msg), best_margin(margin), best_epsilon(eps) {}
  double best_margin;
  double best_epsilon;
};

// solver
struct NewtonDiverged : Error { using Error::Error; };
struct PositivityLost : Error { using Error::Error; };
struct LinearSolveFailed : Error { using Error::Error; };

// cli-io
struct ConfigError : Error {
  ConfigError(const std::string& msg, int line = 0, const std::string& key = "")
      : Error(msg), line_no(line), key_name(key) {}
  int line_no;
  std::string key_name;
};
struct IoError : Error { using Error::Error; };

}  // namespace xdiff

#endif
