#pragma once

#include <stdexcept>
#include <string>

namespace yamabe {

// Argument outside the domain of a formula or model (bad dimension, radius
// outside the chart, empty input).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// A conformal factor that must be strictly positive was not.
struct PositivityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonPositiveSolution : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Singular profile requested for a dimension pair without a complete
// negatively curved conformal metric.
struct WrongRegime : std::domain_error {
  using std::domain_error::domain_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace yamabe
