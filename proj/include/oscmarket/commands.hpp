#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "oscmarket/scenario.hpp"
#include "oscmarket/sim.hpp"

namespace oscmarket {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitInfeasible = 3,
  kExitDiverged = 4,
};

struct Console {
  std::ostream& out;
  std::ostream& err;
  bool quiet = false;
};

/// Headline numbers of one simulation run.
struct RunSummary {
  double final_time = 0.0;
  OrderParameter final_q;
  double final_mean_velocity = 0.0;
  /// Start of the window for the Re/Im(q) ranges: the first shock onset, or
  /// the start of the run when there are no shocks.
  double window_start = 0.0;
  double re_q_min = 0.0;
  double re_q_max = 0.0;
  double im_q_min = 0.0;
  double im_q_max = 0.0;
  ClusterPartition clusters;
};

RunSummary summarize(const Trajectory& traj, const ScenarioConfig& config);
void write_summary(std::ostream& os, const RunSummary& summary);

/// Runs the configured scenario end to end.
Trajectory run_scenario(const ScenarioConfig& config);

int cmd_stationary(const ScenarioConfig& config, const std::filesystem::path& out_dir,
                   Console& console);

int cmd_calibrate(const std::filesystem::path& phases_csv, double net_input,
                  const std::filesystem::path& out_dir, Console& console);

int cmd_simulate(const ScenarioConfig& config, const std::filesystem::path& out_dir,
                 Console& console);

enum class SweepParameter { coupling_scale, shock_magnitude, epsilon_d };

/// Throws ConfigError for names other than coupling_scale, shock_magnitude
/// and epsilon_d.
SweepParameter parse_sweep_parameter(std::string_view name);

/// One independent simulation per value on a bounded worker pool; writes
/// sweep.csv with `value,final_r,n_clusters,mean_velocity_final,error`.
/// `workers == 0` picks the hardware concurrency.
int cmd_sweep(const ScenarioConfig& config, SweepParameter parameter,
              std::span<const double> values, const std::filesystem::path& out_dir,
              Console& console, unsigned workers = 0);

/// Full command-line entry point (argument parsing included).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace oscmarket
