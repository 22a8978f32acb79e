#include "oscmarket/market.hpp"

#include <cmath>
#include <string>

#include "oscmarket/errors.hpp"

namespace oscmarket {

void MarketParams::validate() const {
  if (!(epsilon_d <= 0.0)) throw ContractViolation("epsilon_d must be <= 0");
  if (!(epsilon_s >= 0.0) || !std::isfinite(epsilon_s)) {
    throw ContractViolation("epsilon_s must be >= 0");
  }
  if (!std::isfinite(epsilon_d)) throw ContractViolation("epsilon_d must be finite");
  if (!(p0 > 0.0) || !std::isfinite(p0)) throw ContractViolation("p0 must be > 0");
}

void ShockEvent::validate() const {
  if (from == to) {
    throw ContractViolation("shock endpoints must differ (" + std::to_string(from) + ")");
  }
  if (!(onset >= 0.0) || !std::isfinite(onset)) {
    throw ContractViolation("shock onset must be finite and >= 0");
  }
  if (!std::isfinite(magnitude)) throw ContractViolation("shock magnitude must be finite");
}

double equilibrated_volume(double coupling, double theta_i_star, double theta_j_star) {
  if (!(coupling > 0.0)) throw ContractViolation("coupling must be > 0");
  return coupling * std::abs(std::sin(theta_j_star - theta_i_star));
}

std::vector<EdgeMarket> equilibrate_markets(const Topology& topo, const StationaryProfile& profile,
                                            const MarketParams& params) {
  params.validate();
  if (profile.theta_star.size() != topo.size()) {
    throw ContractViolation("profile and topology disagree on n");
  }
  std::vector<EdgeMarket> markets;
  markets.reserve(topo.edges().size());
  for (const auto& e : topo.edges()) {
    const double volume =
        equilibrated_volume(e.coupling, profile.theta_star[e.a], profile.theta_star[e.b]);
    markets.push_back({e.a, e.b, volume, volume, params});
  }
  return markets;
}

double demand_response(double delta_ji, double epsilon_d) {
  if (epsilon_d > 0.0 || std::isnan(epsilon_d)) {
    throw ContractViolation("epsilon_d must be <= 0");
  }
  return epsilon_d < 0.0 ? -delta_ji : 0.0;
}

double clear_price(const EdgeMarket& market, double delta_ji, double rel_tol) {
  const auto& mp = market.params;
  mp.validate();
  if (!(market.d0 > 0.0)) throw ContractViolation("clear_price needs d0 > 0");
  if (!(market.s0 >= 0.0)) throw ContractViolation("clear_price needs s0 >= 0");
  if (!(rel_tol > 0.0)) throw ContractViolation("tolerance must be > 0");

  if (mp.epsilon_d == 0.0) {
    // Vertical demand: only the unshifted supply line meets it.
    if (delta_ji != 0.0) {
      throw NoClearingPrice("rigid demand (epsilon_d = 0) cannot absorb a supply shift of " +
                            std::to_string(delta_ji));
    }
    return mp.p0;
  }
  if (delta_ji <= -market.s0) {
    throw NoClearingPrice("shifted supply is nonpositive (delta = " + std::to_string(delta_ji) +
                          ", s0 = " + std::to_string(market.s0) + ")");
  }

  // Excess demand at relative price x = p/p0; strictly decreasing in x.
  auto excess = [&](double log_x) {
    const double x = std::exp(log_x);
    return market.d0 * std::pow(x, mp.epsilon_d) - market.s0 * std::pow(x, mp.epsilon_s) -
           delta_ji;
  };

  double lo = 0.0;
  double hi = 0.0;
  const double at_par = excess(0.0);
  if (at_par == 0.0) return mp.p0;
  constexpr int kMaxExpand = 1100;
  int expand = 0;
  if (at_par > 0.0) {
    hi = 1.0;
    while (excess(hi) > 0.0) {
      lo = hi;
      hi *= 2.0;
      if (++expand > kMaxExpand) throw NoClearingPrice("clearing price above representable range");
    }
  } else {
    lo = -1.0;
    while (excess(lo) < 0.0) {
      hi = lo;
      lo *= 2.0;
      if (++expand > kMaxExpand) throw NoClearingPrice("clearing price below representable range");
    }
  }

  // Bisection in log-price: the width in log space is the relative width in p.
  while (hi - lo > rel_tol) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return mp.p0 * std::exp(0.5 * (lo + hi));
}

FluctuationLedger active_fluctuations(std::span<const ShockEvent> shocks, double t,
                                      const MarketParams& params) {
  params.validate();
  FluctuationLedger ledger;
  for (const auto& shock : shocks) {
    shock.validate();
    if (shock.onset > t) continue;
    ledger.add(shock.from, shock.to, shock.magnitude);
    if (params.epsilon_d < 0.0) {
      ledger.add(shock.to, shock.from, demand_response(shock.magnitude, params.epsilon_d));
    }
  }
  return ledger;
}

}  // namespace oscmarket
