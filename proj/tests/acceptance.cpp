// Acceptance checks. One line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oscmarket/commands.hpp"
#include "oscmarket/market.hpp"
#include "oscmarket/scenario.hpp"
#include "oscmarket/sim.hpp"
#include "oscmarket/stationary.hpp"

using namespace oscmarket;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

ScenarioConfig bundled(const char* name) {
  return load_config(std::filesystem::path(OSCMARKET_SCENARIO_DIR) / name);
}

Trajectory run(const ScenarioConfig& cfg) {
  const auto sc = build_scenario(cfg);
  return simulate(sc.initial, sc.integration, sc.params, sc.topology, sc.shocks, sc.market);
}

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// 1: chain solutions up to 50 sectors are exact and fast.
Outcome chain_solver() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> coupling(1.05, 10.0);
  double worst_res = 0.0, worst_ms = 0.0;
  for (std::size_t n = 2; n <= 50; ++n) {
    std::vector<double> k(n - 1);
    for (auto& v : k) v = coupling(rng);
    const auto t0 = Clock::now();
    const auto prof = chain_stationary(1.0, k, n);
    worst_ms = std::max(worst_ms, ms_since(t0));
    SystemParams params(endpoint_net_input(n, 1.0), 1.0, 60.0);
    worst_res = std::max(worst_res, stationarity_residual(prof, params, Topology::chain(k)));
  }
  return {worst_res < 1e-10 && worst_ms < 1.0,
          fmt("max residual %.2e, slowest solve %.3f ms", worst_res, worst_ms)};
}

// 2: calibration inverts the chain solution. Admissible gaps stay 1e-3 clear
// of a quarter turn: rounding k to a double moves the recovered gap by about
// tan(gap) * 1e-16, so nothing closer can hold 1e-12.
double round_trip_error(double margin, int trials) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> gap(1e-6, kPi / 2 - margin);
  std::uniform_real_distribution<double> base(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<double> theta(21);
    theta[20] = base(rng);
    for (std::size_t i = 20; i-- > 0;) theta[i] = theta[i + 1] + gap(rng);
    const auto prof = chain_stationary(1.0, calibrate_couplings(theta, 1.0), 21);
    for (std::size_t i = 0; i < 21; ++i)
      worst = std::max(worst, std::abs(prof.theta_star[i] - (theta[i] - theta[20])));
  }
  return worst;
}

Outcome round_trip() {
  const double worst = round_trip_error(1e-3, 1000);
  const double edge = round_trip_error(1e-6, 1000);
  return {worst < 1e-12,
          fmt("1000 trials, gaps <= pi/2 - 1e-3: max error %.2e (%.2e with gaps up to pi/2 - 1e-6)",
              worst, edge)};
}

// 3: the calibrated equilibrium is left alone.
Outcome equilibrium_holds() {
  auto cfg = bundled("illustrative_nn.cfg");
  cfg.initial = InitialKind::stationary;
  const auto traj = run(cfg);
  const auto& start = traj.states().front();
  double dev = 0.0, dr = 0.0;
  const double r0 = traj.order_params().front().r;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    for (std::size_t i = 0; i < start.theta.size(); ++i)
      dev = std::max(dev, std::abs(traj.states()[s].theta[i] - start.theta[i]));
    dr = std::max(dr, std::abs(traj.order_params()[s].r - r0));
  }
  return {dev < 1e-9 && dr < 1e-9, fmt("max phase deviation %.2e, r drift %.2e", dev, dr)};
}

// 4: elastic demand absorbs the shock.
Outcome elastic_shock() {
  const auto traj = run(bundled("shock_elastic.cfg"));
  const auto& q = traj.order_params().back();
  const double mv = mean_velocity(traj).back();
  return {std::abs(q.im) < 0.05 && q.re > 0.95 && std::abs(mv) < 1e-3,
          fmt("Im(q) %.4f, Re(q) %.4f, mean velocity %.2e", q.im, q.re, mv)};
}

// 5: rigid demand sets the whole system drifting.
Outcome inelastic_shock() {
  const auto cfg = bundled("shock_inelastic.cfg");
  const auto traj = run(cfg);
  double lo = 1.0, hi = -1.0;
  for (std::size_t s = traj.first_at_or_after(120.0); s < traj.size(); ++s) {
    lo = std::min(lo, traj.order_params()[s].re);
    hi = std::max(hi, traj.order_params()[s].re);
  }
  const double expected = cfg.shocks[0].magnitude / (static_cast<double>(cfg.n) * cfg.alpha);
  const double mv = mean_velocity(traj).back();
  const bool drift_ok = std::abs(mv - expected) <= 0.1 * std::abs(expected);
  return {hi > 0.5 && lo < -0.5 && drift_ok,
          fmt("Re(q) in [%.3f, %.3f], mean velocity %.5f", lo, hi, mv) +
              fmt(" vs %.5f", expected)};
}

// 6: weak coupling breaks off the ends and tightens the core.
Outcome weak_coupling() {
  auto cfg = bundled("weak_coupling.cfg");
  const double window = cfg.cluster_window_fraction * cfg.integration.horizon;
  const auto weak = run(cfg);
  const auto weak_part = detect_clusters(weak, window, cfg.cluster_tolerance);
  cfg.coupling_scale = 1.0;
  const auto full = run(cfg);
  const auto full_part = detect_clusters(full, window, cfg.cluster_tolerance);

  const std::size_t big = weak_part.largest();
  const std::size_t n = weak_part.assignment.size();
  const bool ends_out = weak_part.assignment[0] != big && weak_part.assignment[n - 1] != big;
  const auto weak_members = weak_part.members(big);
  const auto full_members = full_part.members(full_part.largest());
  const double weak_spread = phase_spread(weak, weak_members, window);
  const double full_spread = phase_spread(full, full_members, window);
  return {weak_part.count() >= 2 && ends_out && weak_spread < full_spread &&
              weak_part.count() == 3,
          fmt("%.0f clusters, core spread %.3f vs %.3f unscaled",
              static_cast<double>(weak_part.count()), weak_spread, full_spread)};
}

// 7: RK4 converges at fourth order.
Outcome rk4_order() {
  const auto t0 = Clock::now();
  const std::vector<double> k{2.0, 1.5};
  SystemParams params(endpoint_net_input(3, 1.0), 0.5, 60.0);
  const auto topo = Topology::chain(k);
  const double horizon = 10.0;
  auto integrate = [&](double dt) {
    PhaseState s = PhaseState::at_rest({0.0, 0.0, 0.0});
    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
    for (std::size_t i = 0; i < steps; ++i) s = step_rk4(s, dt, params, topo, {});
    return s.theta;
  };
  const auto ref = integrate(0.001);
  std::vector<double> lx, ly;
  for (double dt : {0.04, 0.02, 0.01}) {
    const auto got = integrate(dt);
    double err = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) err = std::max(err, std::abs(got[i] - ref[i]));
    lx.push_back(std::log(dt));
    ly.push_back(std::log(err));
  }
  const double mx = (lx[0] + lx[1] + lx[2]) / 3.0, my = (ly[0] + ly[1] + ly[2]) / 3.0;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < 3; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double order = sxy / sxx;
  const double ms = ms_since(t0);
  return {order >= 3.7 && order <= 4.3 && ms < 5000.0,
          fmt("observed order %.3f in %.0f ms", order, ms)};
}

// 8: property suites.
Outcome properties() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> phase(-10.0, 10.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int failures = 0;

  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<double> th(1 + trial % 30);
    for (auto& v : th) v = phase(rng);
    const auto q = order_parameter(th);
    if (!(q.r >= 0.0 && q.r <= 1.0)) ++failures;
  }

  const std::size_t n = 7;
  const auto topo = Topology::complete(n, 1.1);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> input(n);
    for (auto& v : input) v = 2.0 * unit(rng) - 1.0;
    const SystemParams params(input, unit(rng), 60.0);
    PhaseState s;
    for (std::size_t i = 0; i < n; ++i) {
      s.theta.push_back(phase(rng));
      s.theta_dot.push_back(2.0 * unit(rng) - 1.0);
    }
    // Coupling forces cancel in pairs, leaving inputs minus damping.
    const auto a = acceleration(s, params, topo, {});
    double sum = 0.0, expected = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += a[i];
      expected += input[i] - params.alpha() * s.theta_dot[i];
    }
    if (std::abs(sum - expected) > 1e-12) ++failures;

    auto shifted = s;
    const double c = phase(rng);
    for (auto& v : shifted.theta) v += c;
    const auto b = acceleration(shifted, params, topo, {});
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(a[i] - b[i]) > 1e-12) ++failures;

    const double d = 4.0 * unit(rng) - 2.0;
    const double e = -5.0 * unit(rng) - 1e-9;
    if (demand_response(demand_response(d, e), e) != d) ++failures;
  }

  const EdgeMarket m{0, 1, 1.0, 1.0, {-1.0, 0.0, 1.0}};
  const double p = clear_price(m, 0.25);
  if (std::abs(p - 0.8) >= 1e-10) ++failures;

  return {failures == 0, fmt("%.0f property violations, clearing price %.12f",
                             static_cast<double>(failures), p)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"chain stationary solve", chain_solver},
      {"calibration round trip", round_trip},
      {"equilibrium persists", equilibrium_holds},
      {"elastic shock stays synchronized", elastic_shock},
      {"inelastic shock drifts", inelastic_shock},
      {"weak coupling clusters", weak_coupling},
      {"RK4 convergence order", rk4_order},
      {"property suites", properties},
  };
  int failed = 0;
  int id = 0;
  for (const auto& [name, check] : criteria) {
    ++id;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
  }
  std::printf("%d of %zu criteria passed\n", id - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
