#include "oscmarket/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oscmarket/errors.hpp"

namespace oscmarket {

namespace {

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

SystemParams::SystemParams(std::vector<double> net_input, double alpha, double period)
    : net_input_(std::move(net_input)), alpha_(alpha), period_(period), omega_(0.0) {
  if (net_input_.size() < 2) {
    throw ContractViolation("system needs at least 2 oscillators");
  }
  if (!all_finite(net_input_)) {
    throw ContractViolation("net inputs must be finite");
  }
  if (!(alpha_ >= 0.0) || !std::isfinite(alpha_)) {
    throw ContractViolation("alpha must be >= 0");
  }
  if (!(period_ > 0.0) || !std::isfinite(period_)) {
    throw ContractViolation("period must be > 0");
  }
  omega_ = 2.0 * kPi / period_;
}

std::vector<double> endpoint_net_input(std::size_t n, double p) {
  if (n < 2) {
    throw ContractViolation("endpoint pattern needs at least 2 oscillators");
  }
  std::vector<double> input(n, 0.0);
  input.front() = p;
  input.back() = -p;
  return input;
}

// --- Topology ---------------------------------------------------------------

Topology::Topology(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  if (n_ < 1) {
    throw ContractViolation("topology needs at least one oscillator");
  }
  for (auto& e : edges_) {
    if (e.a >= n_ || e.b >= n_) {
      throw ContractViolation("edge (" + std::to_string(e.a) + ", " + std::to_string(e.b) +
                              ") out of range for n = " + std::to_string(n_));
    }
    if (e.a == e.b) {
      throw ContractViolation("self-loop at oscillator " + std::to_string(e.a));
    }
    if (!(e.coupling > 0.0) || !std::isfinite(e.coupling)) {
      throw ContractViolation("coupling on edge (" + std::to_string(e.a) + ", " +
                              std::to_string(e.b) + ") must be finite and > 0");
    }
    if (e.a > e.b) std::swap(e.a, e.b);
  }

  std::vector<std::size_t> degree(n_, 0);
  for (const auto& e : edges_) {
    ++degree[e.a];
    ++degree[e.b];
  }
  offsets_.assign(n_ + 1, 0);
  for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] = offsets_[i] + degree[i];
  adjacency_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : edges_) {
    adjacency_[fill[e.a]++] = {e.b, e.coupling};
    adjacency_[fill[e.b]++] = {e.a, e.coupling};
  }
  for (std::size_t i = 0; i < n_; ++i) {
    auto first = adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
    auto last = adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
    std::sort(first, last, [](const Neighbor& x, const Neighbor& y) { return x.index < y.index; });
    if (std::adjacent_find(first, last, [](const Neighbor& x, const Neighbor& y) {
          return x.index == y.index;
        }) != last) {
      throw ContractViolation("duplicate edge at oscillator " + std::to_string(i));
    }
  }
}

Topology Topology::chain(std::span<const double> couplings) {
  std::vector<Edge> edges;
  edges.reserve(couplings.size());
  for (std::size_t i = 0; i < couplings.size(); ++i) edges.push_back({i, i + 1, couplings[i]});
  return Topology(couplings.size() + 1, std::move(edges));
}

Topology Topology::chain_uniform(std::size_t n, double coupling) {
  if (n < 2) throw ContractViolation("chain needs at least 2 oscillators");
  std::vector<double> k(n - 1, coupling);
  return chain(k);
}

Topology Topology::complete(std::size_t n, double coupling) {
  if (n < 2) throw ContractViolation("complete graph needs at least 2 oscillators");
  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j, coupling});
  }
  return Topology(n, std::move(edges));
}

Topology Topology::custom(std::size_t n, std::vector<Edge> edges) {
  return Topology(n, std::move(edges));
}

std::span<const Neighbor> Topology::neighbors(std::size_t i) const {
  if (i >= n_) throw ContractViolation("oscillator index out of range");
  return std::span<const Neighbor>(adjacency_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
}

bool Topology::has_edge(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) return false;
  auto nb = neighbors(i);
  return std::any_of(nb.begin(), nb.end(), [j](const Neighbor& x) { return x.index == j; });
}

double Topology::coupling(std::size_t i, std::size_t j) const {
  if (i < n_) {
    for (const auto& x : neighbors(i)) {
      if (x.index == j) return x.coupling;
    }
  }
  throw ContractViolation("no edge between " + std::to_string(i) + " and " + std::to_string(j));
}

bool Topology::is_chain() const {
  if (edges_.size() + 1 != n_) return false;
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (edges_[i].a != i || edges_[i].b != i + 1) return false;
  }
  return true;
}

std::vector<double> Topology::chain_couplings() const {
  std::vector<double> k;
  k.reserve(edges_.size());
  for (const auto& e : edges_) k.push_back(e.coupling);
  return k;
}

Topology Topology::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw ContractViolation("coupling scale must be finite and > 0");
  }
  auto edges = edges_;
  for (auto& e : edges) e.coupling *= factor;
  return Topology(n_, std::move(edges));
}

// --- State and fluctuations ---------------------------------------------------

PhaseState PhaseState::at_rest(std::vector<double> theta, double t) {
  PhaseState s;
  s.t = t;
  s.theta_dot.assign(theta.size(), 0.0);
  s.theta = std::move(theta);
  return s;
}

void FluctuationLedger::add(std::size_t from, std::size_t to, double value) {
  if (!std::isfinite(value)) {
    throw ContractViolation("fluctuation must be finite");
  }
  auto [it, inserted] = entries_.emplace(Key{from, to}, value);
  if (!inserted) {
    throw ContractViolation("overlapping fluctuations on ordered pair (" + std::to_string(from) +
                            ", " + std::to_string(to) + ")");
  }
}

double FluctuationLedger::get(std::size_t from, std::size_t to) const {
  auto it = entries_.find({from, to});
  return it == entries_.end() ? 0.0 : it->second;
}

bool FluctuationLedger::contains(std::size_t from, std::size_t to) const {
  return entries_.count({from, to}) != 0;
}

double FluctuationLedger::total() const {
  double sum = 0.0;
  for (const auto& [key, value] : entries_) sum += value;
  return sum;
}

void check_consistent(const PhaseState& state, const SystemParams& params, const Topology& topo,
                      const FluctuationLedger& fluct) {
  const std::size_t n = params.size();
  if (state.theta.size() != n || state.theta_dot.size() != n || topo.size() != n) {
    throw ContractViolation("dimension mismatch: params n = " + std::to_string(n) +
                            ", topology n = " + std::to_string(topo.size()) +
                            ", state n = " + std::to_string(state.theta.size()) + "/" +
                            std::to_string(state.theta_dot.size()));
  }
  if (!all_finite(state.theta) || !all_finite(state.theta_dot)) {
    throw ContractViolation("state contains non-finite entries");
  }
  for (const auto& [key, value] : fluct.entries()) {
    if (!topo.has_edge(key.first, key.second)) {
      throw ContractViolation("fluctuation on (" + std::to_string(key.first) + ", " +
                              std::to_string(key.second) + ") which is not an edge");
    }
  }
}

void acceleration_into(std::span<const double> theta, std::span<const double> theta_dot,
                       const SystemParams& params, const Topology& topo,
                       const FluctuationLedger& fluct, std::span<double> out) {
  const auto& p = params.net_input();
  const double alpha = params.alpha();
  for (std::size_t i = 0; i < out.size(); ++i) {
    double force = 0.0;
    for (const auto& nb : topo.neighbors(i)) {
      force += nb.coupling * std::sin(theta[nb.index] - theta[i]);
    }
    out[i] = p[i] - alpha * theta_dot[i] + force;
  }
  for (const auto& [key, value] : fluct.entries()) out[key.second] += value;
}

std::vector<double> acceleration(const PhaseState& state, const SystemParams& params,
                                 const Topology& topo, const FluctuationLedger& fluct) {
  check_consistent(state, params, topo, fluct);
  std::vector<double> out(params.size());
  acceleration_into(state.theta, state.theta_dot, params, topo, fluct, out);
  return out;
}

std::vector<double> growth_rate(const PhaseState& state, const SystemParams& params,
                                double wall_time) {
  if (state.theta.size() != params.size()) {
    throw ContractViolation("dimension mismatch between state and params");
  }
  std::vector<double> x(state.theta.size());
  const double carrier = params.omega() * wall_time;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(carrier + state.theta[i]);
  return x;
}

}  // namespace oscmarket
