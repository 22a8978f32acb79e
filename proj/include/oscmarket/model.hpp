#pragma once

// Inertial coupled-oscillator model of industry sectors linked by goods
// markets. Each sector i carries a slow phase theta_i (the business-cycle
// phase relative to the common frequency omega) obeying
//
//   theta_i'' = P_i - alpha * theta_i' + sum_{j ~ i} ( k_ji sin(theta_j - theta_i) + delta_ji )
//
// where the sum runs over market edges incident to i and delta_ji is the
// sectoral supply/demand fluctuation entering sector i's equation from the
// market it shares with j.

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace oscmarket {

inline constexpr double kPi = 3.14159265358979323846;

/// Net inputs P_i, dissipation alpha and the common business-cycle period.
class SystemParams {
 public:
  /// Throws ContractViolation unless n >= 2, alpha >= 0, period > 0 and all
  /// inputs are finite.
  SystemParams(std::vector<double> net_input, double alpha, double period);

  std::size_t size() const noexcept { return net_input_.size(); }
  const std::vector<double>& net_input() const noexcept { return net_input_; }
  double alpha() const noexcept { return alpha_; }
  double period() const noexcept { return period_; }
  /// 2 pi / period.
  double omega() const noexcept { return omega_; }

 private:
  std::vector<double> net_input_;
  double alpha_;
  double period_;
  double omega_;
};

/// Net-input pattern with a source at the first sector and a sink at the
/// last: [P, 0, ..., 0, -P].
std::vector<double> endpoint_net_input(std::size_t n, double p);

/// Undirected market edge; `a < b` after normalisation.
struct Edge {
  std::size_t a;
  std::size_t b;
  double coupling;
};

struct Neighbor {
  std::size_t index;
  double coupling;
};

/// Symmetric weighted coupling graph. Adjacency is stored CSR-style so a full
/// force evaluation is O(n + |E|).
class Topology {
 public:
  /// Nearest-neighbour chain; edge i joins (i, i+1) with couplings[i].
  static Topology chain(std::span<const double> couplings);
  static Topology chain_uniform(std::size_t n, double coupling);
  static Topology complete(std::size_t n, double coupling);
  /// Arbitrary edge list. Rejects self-loops, duplicates, out-of-range
  /// endpoints and non-positive couplings.
  static Topology custom(std::size_t n, std::vector<Edge> edges);

  std::size_t size() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::span<const Neighbor> neighbors(std::size_t i) const;
  bool has_edge(std::size_t i, std::size_t j) const;
  /// Coupling of edge {i, j}; throws ContractViolation when absent.
  double coupling(std::size_t i, std::size_t j) const;
  /// True when the edges are exactly (i, i+1) for i < n-1, in order.
  bool is_chain() const;
  /// Chain couplings in edge order; only meaningful when is_chain().
  std::vector<double> chain_couplings() const;

  Topology scaled(double factor) const;

 private:
  Topology(std::size_t n, std::vector<Edge> edges);

  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
};

/// Phases (unwrapped radians) and phase velocities at time t.
struct PhaseState {
  double t = 0.0;
  std::vector<double> theta;
  std::vector<double> theta_dot;

  static PhaseState at_rest(std::vector<double> theta, double t = 0.0);
  std::size_t size() const noexcept { return theta.size(); }
};

/// Directed fluctuation terms. Entry (from, to) holds delta added to sector
/// `to`'s equation from the market it shares with `from`. Absent entries are
/// zero.
class FluctuationLedger {
 public:
  using Key = std::pair<std::size_t, std::size_t>;

  /// Throws ContractViolation if (from, to) is already present.
  void add(std::size_t from, std::size_t to, double value);
  double get(std::size_t from, std::size_t to) const;
  bool contains(std::size_t from, std::size_t to) const;
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  /// Sum of all entries: the shock's contribution to the aggregate momentum.
  double total() const;
  const std::map<Key, double>& entries() const noexcept { return entries_; }

  friend bool operator==(const FluctuationLedger&, const FluctuationLedger&) = default;

 private:
  std::map<Key, double> entries_;
};

/// Throws ContractViolation unless state, params and topology agree on n and
/// every ledger entry lies on an edge.
void check_consistent(const PhaseState& state, const SystemParams& params, const Topology& topo,
                      const FluctuationLedger& fluct);

/// Equation-of-motion right-hand side for the velocity component.
std::vector<double> acceleration(const PhaseState& state, const SystemParams& params,
                                 const Topology& topo, const FluctuationLedger& fluct);

/// Allocation-free variant used by the integrator. Inputs must already have
/// passed check_consistent; `out` must have size n.
void acceleration_into(std::span<const double> theta, std::span<const double> theta_dot,
                       const SystemParams& params, const Topology& topo,
                       const FluctuationLedger& fluct, std::span<double> out);

/// Normalised production growth rate x_i = sin(omega * wall_time + theta_i).
std::vector<double> growth_rate(const PhaseState& state, const SystemParams& params,
                                double wall_time);

}  // namespace oscmarket
