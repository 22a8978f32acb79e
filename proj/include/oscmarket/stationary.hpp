#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "oscmarket/model.hpp"

namespace oscmarket {

/// Equilibrium phases with theta_star[anchor] == 0.
struct StationaryProfile {
  std::vector<double> theta_star;
  std::size_t anchor = 0;

  /// Same phase differences, shifted so that `index` sits at zero.
  StationaryProfile reanchored(std::size_t index) const;
};

/// Closed-form stationary state of a chain driven by the endpoint pattern
/// [P, 0, ..., 0, -P]. Every edge carries the flow P, so walking back from
/// the anchored last sector gives
///
///   theta_i = theta_{i+1} + asin(P / k_i)
///
/// on the principal (stable) branch. Throws NoStationarySolution naming the
/// first edge with |P / k_i| >= 1.
StationaryProfile chain_stationary(double net_input, std::span<const double> couplings,
                                   std::size_t n);

/// Inverse of chain_stationary: k_i = P / sin(theta_i - theta_{i+1}).
/// Throws CalibrationInfeasible when P == 0 or a consecutive difference does
/// not yield a finite positive coupling.
std::vector<double> calibrate_couplings(std::span<const double> theta_star, double net_input);

/// max_i |P_i + sum_j k_ji sin(theta_j - theta_i)|, zero at an exact fixed point.
double stationarity_residual(const StationaryProfile& profile, const SystemParams& params,
                             const Topology& topo);

}  // namespace oscmarket
