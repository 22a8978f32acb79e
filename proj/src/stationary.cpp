#include "oscmarket/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oscmarket/errors.hpp"

namespace oscmarket {

StationaryProfile StationaryProfile::reanchored(std::size_t index) const {
  if (index >= theta_star.size()) {
    throw ContractViolation("anchor index " + std::to_string(index) + " out of range");
  }
  StationaryProfile shifted{theta_star, index};
  const double offset = theta_star[index];
  for (auto& th : shifted.theta_star) th -= offset;
  return shifted;
}

StationaryProfile chain_stationary(double net_input, std::span<const double> couplings,
                                   std::size_t n) {
  if (n < 2) {
    throw ContractViolation("chain needs at least 2 oscillators");
  }
  if (couplings.size() != n - 1) {
    throw ContractViolation("chain of " + std::to_string(n) + " oscillators needs " +
                            std::to_string(n - 1) + " couplings, got " +
                            std::to_string(couplings.size()));
  }
  if (!std::isfinite(net_input)) {
    throw ContractViolation("net input must be finite");
  }
  for (double k : couplings) {
    if (!(k > 0.0) || !std::isfinite(k)) {
      throw ContractViolation("chain couplings must be finite and > 0");
    }
  }

  // Report the lowest infeasible edge, not the first one met from the anchor.
  for (std::size_t edge = 0; edge + 1 < n; ++edge) {
    const double ratio = net_input / couplings[edge];
    if (std::abs(ratio) >= 1.0) {
      throw NoStationarySolution(edge, std::abs(ratio));
    }
  }

  StationaryProfile profile{std::vector<double>(n, 0.0), n - 1};
  for (std::size_t edge = n - 1; edge-- > 0;) {
    profile.theta_star[edge] = profile.theta_star[edge + 1] + std::asin(net_input / couplings[edge]);
  }
  return profile;
}

std::vector<double> calibrate_couplings(std::span<const double> theta_star, double net_input) {
  if (theta_star.size() < 2) {
    throw ContractViolation("calibration needs at least 2 phases");
  }
  if (net_input == 0.0 || !std::isfinite(net_input)) {
    throw CalibrationInfeasible(0, "net input must be finite and nonzero");
  }
  std::vector<double> k(theta_star.size() - 1);
  for (std::size_t i = 0; i + 1 < theta_star.size(); ++i) {
    const double diff = theta_star[i] - theta_star[i + 1];
    const double s = std::sin(diff);
    if (!std::isfinite(diff) || s == 0.0) {
      throw CalibrationInfeasible(i, "zero phase difference");
    }
    const double coupling = net_input / s;
    if (!(coupling > 0.0) || !std::isfinite(coupling)) {
      throw CalibrationInfeasible(
          i, "phase difference " + std::to_string(diff) + " has the wrong sign for P = " +
                 std::to_string(net_input));
    }
    k[i] = coupling;
  }
  return k;
}

double stationarity_residual(const StationaryProfile& profile, const SystemParams& params,
                             const Topology& topo) {
  const std::size_t n = params.size();
  if (profile.theta_star.size() != n || topo.size() != n) {
    throw ContractViolation("dimension mismatch in stationarity_residual");
  }
  const auto& theta = profile.theta_star;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double balance = params.net_input()[i];
    for (const auto& nb : topo.neighbors(i)) {
      balance += nb.coupling * std::sin(theta[nb.index] - theta[i]);
    }
    worst = std::max(worst, std::abs(balance));
  }
  return worst;
}

}  // namespace oscmarket
