#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "oscmarket/market.hpp"
#include "oscmarket/model.hpp"

namespace oscmarket {

/// Complex order parameter q = (1/n) sum_j exp(i theta_j) = r exp(i phi).
struct OrderParameter {
  double re = 0.0;
  double im = 0.0;
  double r = 0.0;
  double phi = 0.0;
};

OrderParameter order_parameter(std::span<const double> theta);

/// One classical RK4 step of (theta' = theta_dot, theta_dot' = acceleration)
/// with the ledger frozen over the step. Throws IntegrationDiverged carrying
/// the step's start time if the result is not finite.
PhaseState step_rk4(const PhaseState& state, double dt, const SystemParams& params,
                    const Topology& topo, const FluctuationLedger& fluct);

struct IntegrationOptions {
  double dt = 0.01;
  double dt_record = 0.5;
  double horizon = 200.0;

  /// Throws ContractViolation unless 0 < dt <= dt_record, dt_record is an
  /// integer multiple of dt, and horizon > 0.
  void validate() const;
  /// Number of integration steps between recorded samples.
  std::size_t record_stride() const;
  std::size_t total_steps() const;
};

/// Uniformly sampled simulation record.
class Trajectory {
 public:
  void append(PhaseState state);

  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  std::size_t oscillators() const noexcept { return states_.empty() ? 0 : states_[0].size(); }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<PhaseState>& states() const noexcept { return states_; }
  const std::vector<OrderParameter>& order_params() const noexcept { return order_; }
  const PhaseState& back() const { return states_.back(); }

  /// Index of the first sample with time >= t (size() if none).
  std::size_t first_at_or_after(double t) const;

 private:
  std::vector<double> times_;
  std::vector<PhaseState> states_;
  std::vector<OrderParameter> order_;
};

/// Integrates from initial.t to initial.t + horizon with fixed-step RK4. The
/// fluctuation ledger is rebuilt from `shocks` at each step start; onsets are
/// snapped to the nearest step boundary.
Trajectory simulate(const PhaseState& initial, const IntegrationOptions& options,
                    const SystemParams& params, const Topology& topo,
                    std::span<const ShockEvent> shocks, const MarketParams& market);

/// Oscillators grouped by asymptotic drift rate.
struct ClusterPartition {
  /// Cluster label per oscillator; labels are numbered by first appearance
  /// in oscillator order, starting at 0.
  std::vector<std::size_t> assignment;
  /// Mean least-squares phase slope of each cluster.
  std::vector<double> drift_rates;

  std::size_t count() const noexcept { return drift_rates.size(); }
  std::vector<std::size_t> members(std::size_t label) const;
  /// Label with most members; ties go to the lower label.
  std::size_t largest() const;
};

/// Per-oscillator least-squares slope of theta_i(t) over samples with
/// t >= t_end - window.
std::vector<double> drift_slopes(const Trajectory& traj, double window);

/// Single-linkage grouping of the drift slopes over the final `window`:
/// sorted slopes closer than `tolerance` join the same cluster.
ClusterPartition detect_clusters(const Trajectory& traj, double window, double tolerance);

/// (1/n) sum_i theta_dot_i at every sample.
std::vector<double> mean_velocity(const Trajectory& traj);

/// Time average over the final `window` of max - min phase among `members`.
double phase_spread(const Trajectory& traj, std::span<const std::size_t> members, double window);

/// CSV with header t,theta_0..,thetadot_0..,re_q,im_q,r,phi and 17
/// significant digits per value.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace oscmarket
