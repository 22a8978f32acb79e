#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "oscmarket/model.hpp"
#include "oscmarket/stationary.hpp"

namespace oscmarket {

/// Power-law price elasticities: d/d0 = (p/p0)^epsilon_d, s/s0 = (p/p0)^epsilon_s.
struct MarketParams {
  double epsilon_d = -1.0;
  double epsilon_s = 0.0;
  double p0 = 1.0;

  /// Throws ContractViolation unless epsilon_d <= 0, epsilon_s >= 0, p0 > 0.
  void validate() const;
};

/// Goods market on edge {a, b} at its equilibrated volume d0 == s0.
struct EdgeMarket {
  std::size_t a = 0;
  std::size_t b = 0;
  double d0 = 0.0;
  double s0 = 0.0;
  MarketParams params;
};

/// Step-profile supply fluctuation: from `onset` on, `magnitude` enters
/// sector `to`'s equation through the market shared with `from`.
struct ShockEvent {
  std::size_t from = 0;
  std::size_t to = 0;
  double magnitude = 0.0;
  double onset = 0.0;

  void validate() const;
};

/// d0 = s0 = k |sin(theta_j* - theta_i*)|.
double equilibrated_volume(double coupling, double theta_i_star, double theta_j_star);

/// One market per topology edge, equilibrated at `profile`.
std::vector<EdgeMarket> equilibrate_markets(const Topology& topo, const StationaryProfile& profile,
                                            const MarketParams& params);

/// Demand change of the partner sector in reply to a supply fluctuation:
/// full absorption (-delta_ji) when demand is elastic, none when it is rigid.
double demand_response(double delta_ji, double epsilon_d);

/// Price at which the demand curve meets the supply curve shifted by
/// delta_ji, i.e. d0 (p/p0)^eps_d = s0 (p/p0)^eps_s + delta_ji. Solved by
/// bisection on x = p/p0 to relative tolerance `rel_tol`.
double clear_price(const EdgeMarket& market, double delta_ji, double rel_tol = 1e-12);

/// Ledger of all fluctuations active at time t (onset <= t): the shock itself
/// on (from, to) and, when demand responds, the absorbing entry on (to, from).
FluctuationLedger active_fluctuations(std::span<const ShockEvent> shocks, double t,
                                      const MarketParams& params);

}  // namespace oscmarket
