#include "oscmarket/sim.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <string>

#include "oscmarket/errors.hpp"

namespace oscmarket {

namespace {

// Scratch buffers for one RK4 run; reused across steps.
class Rk4Workspace {
 public:
  explicit Rk4Workspace(std::size_t n)
      : k1v_(n), k2v_(n), k3v_(n), k4v_(n), k2x_(n), k3x_(n), k4x_(n), x_(n), v_(n) {}

  void step(PhaseState& s, double dt, const SystemParams& params, const Topology& topo,
            const FluctuationLedger& fluct) {
    const std::size_t n = s.size();
    const double half = 0.5 * dt;
    auto& th = s.theta;
    auto& vel = s.theta_dot;

    acceleration_into(th, vel, params, topo, fluct, k1v_);

    for (std::size_t i = 0; i < n; ++i) {
      x_[i] = th[i] + half * vel[i];
      v_[i] = vel[i] + half * k1v_[i];
    }
    k2x_ = v_;
    acceleration_into(x_, v_, params, topo, fluct, k2v_);

    for (std::size_t i = 0; i < n; ++i) {
      x_[i] = th[i] + half * k2x_[i];
      v_[i] = vel[i] + half * k2v_[i];
    }
    k3x_ = v_;
    acceleration_into(x_, v_, params, topo, fluct, k3v_);

    for (std::size_t i = 0; i < n; ++i) {
      x_[i] = th[i] + dt * k3x_[i];
      v_[i] = vel[i] + dt * k3v_[i];
    }
    k4x_ = v_;
    acceleration_into(x_, v_, params, topo, fluct, k4v_);

    const double w = dt / 6.0;
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
      th[i] += w * (vel[i] + 2.0 * k2x_[i] + 2.0 * k3x_[i] + k4x_[i]);
      vel[i] += w * (k1v_[i] + 2.0 * k2v_[i] + 2.0 * k3v_[i] + k4v_[i]);
      finite = finite && std::isfinite(th[i]) && std::isfinite(vel[i]);
    }
    if (!finite) throw IntegrationDiverged(s.t);
  }

 private:
  std::vector<double> k1v_, k2v_, k3v_, k4v_;
  std::vector<double> k2x_, k3x_, k4x_;
  std::vector<double> x_, v_;
};

constexpr double kGridSlack = 1e-9;

std::size_t window_start(const Trajectory& traj, double window) {
  if (traj.empty()) throw ContractViolation("empty trajectory");
  const double span = traj.times().back() - traj.times().front();
  if (!(window > 0.0) || window > span * (1.0 + kGridSlack)) {
    throw ContractViolation("window must be in (0, trajectory span]");
  }
  const double t_end = traj.times().back();
  return traj.first_at_or_after(t_end - window - kGridSlack * std::max(1.0, std::abs(t_end)));
}

}  // namespace

OrderParameter order_parameter(std::span<const double> theta) {
  if (theta.empty()) throw ContractViolation("order parameter needs at least one phase");
  double re = 0.0;
  double im = 0.0;
  for (double th : theta) {
    re += std::cos(th);
    im += std::sin(th);
  }
  const auto n = static_cast<double>(theta.size());
  re /= n;
  im /= n;
  // Rounding in the sums can push |q| a hair above one.
  const double r = std::min(1.0, std::hypot(re, im));
  return {re, im, r, std::atan2(im, re)};
}

PhaseState step_rk4(const PhaseState& state, double dt, const SystemParams& params,
                    const Topology& topo, const FluctuationLedger& fluct) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractViolation("dt must be > 0");
  check_consistent(state, params, topo, fluct);
  PhaseState next = state;
  Rk4Workspace ws(state.size());
  ws.step(next, dt, params, topo, fluct);
  next.t = state.t + dt;
  return next;
}

// --- IntegrationOptions -------------------------------------------------------

void IntegrationOptions::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractViolation("dt must be > 0");
  if (!(dt_record >= dt) || !std::isfinite(dt_record)) {
    throw ContractViolation("dt_record must be >= dt");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ContractViolation("horizon must be > 0");
  const double stride = dt_record / dt;
  if (std::abs(stride - std::round(stride)) > 1e-9 * stride) {
    throw ContractViolation("dt_record must be an integer multiple of dt");
  }
  const double steps = horizon / dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * steps) {
    throw ContractViolation("horizon must be an integer multiple of dt");
  }
}

std::size_t IntegrationOptions::record_stride() const {
  return static_cast<std::size_t>(std::llround(dt_record / dt));
}

std::size_t IntegrationOptions::total_steps() const {
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

// --- Trajectory ---------------------------------------------------------------

void Trajectory::append(PhaseState state) {
  if (!states_.empty() && state.size() != states_.front().size()) {
    throw ContractViolation("trajectory samples must share n");
  }
  if (!times_.empty() && !(state.t > times_.back())) {
    throw ContractViolation("trajectory times must be strictly increasing");
  }
  order_.push_back(order_parameter(state.theta));
  times_.push_back(state.t);
  states_.push_back(std::move(state));
}

std::size_t Trajectory::first_at_or_after(double t) const {
  return static_cast<std::size_t>(std::lower_bound(times_.begin(), times_.end(), t) -
                                  times_.begin());
}

Trajectory simulate(const PhaseState& initial, const IntegrationOptions& options,
                    const SystemParams& params, const Topology& topo,
                    std::span<const ShockEvent> shocks, const MarketParams& market) {
  options.validate();
  market.validate();
  check_consistent(initial, params, topo, FluctuationLedger{});

  // Onsets in units of whole steps; the ledger is built against step indices
  // so activation never depends on floating-point time comparisons.
  std::vector<ShockEvent> snapped;
  snapped.reserve(shocks.size());
  for (const auto& shock : shocks) {
    shock.validate();
    if (!topo.has_edge(shock.from, shock.to)) {
      throw ContractViolation("shock on (" + std::to_string(shock.from) + ", " +
                              std::to_string(shock.to) + ") which is not an edge");
    }
    ShockEvent s = shock;
    const double rel = (shock.onset - initial.t) / options.dt;
    s.onset = std::max(0.0, std::round(rel));
    snapped.push_back(s);
  }

  const std::size_t stride = options.record_stride();
  const std::size_t steps = options.total_steps();

  Trajectory traj;
  PhaseState state = initial;
  Rk4Workspace ws(state.size());
  FluctuationLedger ledger = active_fluctuations(snapped, 0.0, market);
  std::size_t active = ledger.size();

  traj.append(state);
  for (std::size_t step = 0; step < steps; ++step) {
    const auto step_index = static_cast<double>(step);
    const auto now_active = static_cast<std::size_t>(
        std::count_if(snapped.begin(), snapped.end(),
                      [&](const ShockEvent& s) { return s.onset <= step_index; }));
    if (now_active != active) {
      ledger = active_fluctuations(snapped, step_index, market);
      active = now_active;
    }
    ws.step(state, options.dt, params, topo, ledger);
    state.t = initial.t + static_cast<double>(step + 1) * options.dt;
    if ((step + 1) % stride == 0) traj.append(state);
  }
  return traj;
}

// --- Diagnostics --------------------------------------------------------------

std::vector<std::size_t> ClusterPartition::members(std::size_t label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == label) out.push_back(i);
  }
  return out;
}

std::size_t ClusterPartition::largest() const {
  std::vector<std::size_t> sizes(count(), 0);
  for (auto label : assignment) ++sizes[label];
  return static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
}

std::vector<double> drift_slopes(const Trajectory& traj, double window) {
  const std::size_t first = window_start(traj, window);
  const std::size_t count = traj.size() - first;
  if (count < 3) {
    throw ContractViolation("cluster window covers " + std::to_string(count) +
                            " samples; need at least 3");
  }
  const auto& times = traj.times();
  double t_mean = 0.0;
  for (std::size_t s = first; s < traj.size(); ++s) t_mean += times[s];
  t_mean /= static_cast<double>(count);
  double t_var = 0.0;
  for (std::size_t s = first; s < traj.size(); ++s) t_var += (times[s] - t_mean) * (times[s] - t_mean);

  const std::size_t n = traj.oscillators();
  std::vector<double> slopes(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double cov = 0.0;
    for (std::size_t s = first; s < traj.size(); ++s) {
      cov += (times[s] - t_mean) * traj.states()[s].theta[i];
    }
    slopes[i] = cov / t_var;
  }
  return slopes;
}

ClusterPartition detect_clusters(const Trajectory& traj, double window, double tolerance) {
  if (!(tolerance > 0.0)) throw ContractViolation("cluster tolerance must be > 0");
  const auto slopes = drift_slopes(traj, window);
  const std::size_t n = slopes.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return slopes[a] < slopes[b]; });

  std::vector<std::size_t> raw(n, 0);
  std::size_t group = 0;
  for (std::size_t k = 1; k < n; ++k) {
    if (slopes[order[k]] - slopes[order[k - 1]] >= tolerance) ++group;
    raw[order[k]] = group;
  }

  ClusterPartition part;
  part.assignment.assign(n, 0);
  std::vector<std::size_t> relabel(group + 1, n);
  std::vector<double> sums;
  std::vector<std::size_t> sizes;
  for (std::size_t i = 0; i < n; ++i) {
    if (relabel[raw[i]] == n) {
      relabel[raw[i]] = sums.size();
      sums.push_back(0.0);
      sizes.push_back(0);
    }
    const std::size_t label = relabel[raw[i]];
    part.assignment[i] = label;
    sums[label] += slopes[i];
    ++sizes[label];
  }
  part.drift_rates.resize(sums.size());
  for (std::size_t c = 0; c < sums.size(); ++c) {
    part.drift_rates[c] = sums[c] / static_cast<double>(sizes[c]);
  }
  return part;
}

std::vector<double> mean_velocity(const Trajectory& traj) {
  if (traj.empty()) throw ContractViolation("empty trajectory");
  std::vector<double> out;
  out.reserve(traj.size());
  for (const auto& s : traj.states()) {
    out.push_back(std::accumulate(s.theta_dot.begin(), s.theta_dot.end(), 0.0) /
                  static_cast<double>(s.size()));
  }
  return out;
}

double phase_spread(const Trajectory& traj, std::span<const std::size_t> members, double window) {
  if (members.empty()) throw ContractViolation("phase spread needs at least one member");
  const std::size_t first = window_start(traj, window);
  double total = 0.0;
  for (std::size_t s = first; s < traj.size(); ++s) {
    const auto& th = traj.states()[s].theta;
    double lo = th.at(members[0]);
    double hi = lo;
    for (auto m : members) {
      lo = std::min(lo, th.at(m));
      hi = std::max(hi, th.at(m));
    }
    total += hi - lo;
  }
  return total / static_cast<double>(traj.size() - first);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t n = traj.oscillators();
  os << "t";
  for (std::size_t i = 0; i < n; ++i) os << ",theta_" << i;
  for (std::size_t i = 0; i < n; ++i) os << ",thetadot_" << i;
  os << ",re_q,im_q,r,phi\n";

  const auto old_precision = os.precision(17);
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const auto& st = traj.states()[s];
    const auto& q = traj.order_params()[s];
    os << traj.times()[s];
    for (double v : st.theta) os << ',' << v;
    for (double v : st.theta_dot) os << ',' << v;
    os << ',' << q.re << ',' << q.im << ',' << q.r << ',' << q.phi << '\n';
  }
  os.precision(old_precision);
}

}  // namespace oscmarket
