#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oscmarket {

/// Raised when a caller breaks an operation's precondition (dimension
/// mismatch, out-of-range parameter, malformed shock list).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The chain has no stationary state: some edge cannot carry the net input
/// (|P / k| >= 1).
class NoStationarySolution : public std::runtime_error {
 public:
  NoStationarySolution(std::size_t edge, double ratio)
      : std::runtime_error("no stationary solution: edge " + std::to_string(edge) +
                           " (|P/k| = " + std::to_string(ratio) + ")"),
        edge_(edge) {}

  std::size_t edge() const noexcept { return edge_; }

 private:
  std::size_t edge_;
};

/// Observed phases cannot be explained by positive couplings on the chain.
/// `pair()` is the index i of the offending consecutive pair (i, i+1).
class CalibrationInfeasible : public std::runtime_error {
 public:
  CalibrationInfeasible(std::size_t pair, const std::string& reason)
      : std::runtime_error("calibration infeasible at pair (" + std::to_string(pair) + ", " +
                           std::to_string(pair + 1) + "): " + reason),
        pair_(pair) {}

  std::size_t pair() const noexcept { return pair_; }

 private:
  std::size_t pair_;
};

class NoClearingPrice : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A non-finite phase or velocity appeared during time stepping.
class IntegrationDiverged : public std::runtime_error {
 public:
  explicit IntegrationDiverged(double time)
      : std::runtime_error("integration diverged at t = " + std::to_string(time)), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Scenario file problems. `line()` is 0 for validation errors that are not
/// tied to a single line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::size_t line = 0)
      : std::runtime_error(line == 0 ? message : "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace oscmarket
