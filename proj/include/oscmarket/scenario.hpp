#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oscmarket/market.hpp"
#include "oscmarket/model.hpp"
#include "oscmarket/sim.hpp"
#include "oscmarket/stationary.hpp"

namespace oscmarket {

enum class TopologyKind { chain, complete, custom };
enum class CouplingSource { explicit_values, calibrate, uniform };
enum class InitialKind { stationary, zero, explicit_values };

/// Everything needed to reproduce one experiment. Produced by load_config;
/// see docs/config.md for the file format.
struct ScenarioConfig {
  std::size_t n = 0;

  // [system]
  bool endpoint_pattern = true;
  double endpoint_p = 1.0;
  std::vector<double> net_input;  // explicit pattern only
  double alpha = 1.0;
  double period = 60.0;

  // [topology]
  TopologyKind topology = TopologyKind::chain;
  CouplingSource couplings = CouplingSource::uniform;
  std::vector<double> coupling_values;
  double uniform_k = 0.0;
  std::filesystem::path phases_file;
  std::vector<Edge> custom_edges;
  double coupling_scale = 1.0;

  MarketParams market;
  std::vector<ShockEvent> shocks;
  IntegrationOptions integration;

  // [initial]
  InitialKind initial = InitialKind::stationary;
  std::vector<double> initial_theta;
  std::optional<std::size_t> anchor;

  // [clusters]
  double cluster_window_fraction = 0.25;
  double cluster_tolerance = 0.05;

  // [run]
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = ".";
};

/// Reads and validates a scenario file. Relative paths inside the file are
/// resolved against the file's directory. Throws ConfigError.
ScenarioConfig load_config(const std::filesystem::path& path);

/// Parses scenario text; `base_dir` resolves relative paths.
ScenarioConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);

/// Re-checks numeric constraints after programmatic edits (sweeps).
void validate_config(const ScenarioConfig& config);

/// Observed phases from a CSV with columns `index,theta_observed`, returned
/// in index order. Throws ConfigError on malformed input.
std::vector<double> read_phases_csv(const std::filesystem::path& path);

/// Concrete model objects assembled from a config.
struct Scenario {
  SystemParams params;
  Topology base_topology;  // before coupling_scale
  Topology topology;       // couplings actually used for dynamics
  PhaseState initial;
  std::vector<ShockEvent> shocks;
  MarketParams market;
  IntegrationOptions integration;
  /// Stationary profile of the unscaled chain when one exists.
  std::optional<StationaryProfile> profile;
};

/// Throws ConfigError for unbuildable combinations, and propagates
/// CalibrationInfeasible / NoStationarySolution from the stationary module.
Scenario build_scenario(const ScenarioConfig& config);

}  // namespace oscmarket
