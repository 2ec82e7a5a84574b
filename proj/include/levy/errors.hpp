#pragma once

#include <stdexcept>
#include <string>

namespace levy {

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Exact transport solvers refuse instances above their size limits.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedFunctional : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidExperiment : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by the density inverter when the periodic grid cannot hold the law.
struct GridTooSmall : std::runtime_error {
  GridTooSmall(const std::string& what, double suggested_extent)
      : std::runtime_error(what), suggested_extent(suggested_extent) {}
  double suggested_extent;
};

struct ToleranceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ReferenceInconsistency : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& msg);

}  // namespace levy
