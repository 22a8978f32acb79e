#include "oscmarket/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "oscmarket/errors.hpp"
#include "oscmarket/stationary.hpp"

namespace oscmarket {

namespace {

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw ConfigError("cannot write " + (dir / name).string());
  out.precision(17);
  return out;
}

// Maps the library's exception types onto process exit codes.
template <typename Fn>
int guarded(Console& console, Fn&& fn) {
  try {
    return fn();
  } catch (const NoStationarySolution& e) {
    console.err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const CalibrationInfeasible& e) {
    console.err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const IntegrationDiverged& e) {
    console.err << "error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const ConfigError& e) {
    console.err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ContractViolation& e) {
    console.err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    console.err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

Trajectory run_scenario(const ScenarioConfig& config) {
  const Scenario sc = build_scenario(config);
  return simulate(sc.initial, sc.integration, sc.params, sc.topology, sc.shocks, sc.market);
}

RunSummary summarize(const Trajectory& traj, const ScenarioConfig& config) {
  RunSummary s;
  s.final_time = traj.times().back();
  s.final_q = traj.order_params().back();
  s.final_mean_velocity = mean_velocity(traj).back();

  s.window_start = traj.times().front();
  if (!config.shocks.empty()) {
    s.window_start = std::min_element(config.shocks.begin(), config.shocks.end(),
                                      [](const ShockEvent& a, const ShockEvent& b) {
                                        return a.onset < b.onset;
                                      })
                         ->onset;
  }
  s.re_q_min = s.im_q_min = std::numeric_limits<double>::infinity();
  s.re_q_max = s.im_q_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = traj.first_at_or_after(s.window_start); i < traj.size(); ++i) {
    const auto& q = traj.order_params()[i];
    s.re_q_min = std::min(s.re_q_min, q.re);
    s.re_q_max = std::max(s.re_q_max, q.re);
    s.im_q_min = std::min(s.im_q_min, q.im);
    s.im_q_max = std::max(s.im_q_max, q.im);
  }

  const double span = traj.times().back() - traj.times().front();
  s.clusters = detect_clusters(traj, config.cluster_window_fraction * span,
                               config.cluster_tolerance);
  return s;
}

void write_summary(std::ostream& os, const RunSummary& s) {
  const auto old = os.precision(17);
  os << "final_time = " << s.final_time << '\n'
     << "final_r = " << s.final_q.r << '\n'
     << "final_re_q = " << s.final_q.re << '\n'
     << "final_im_q = " << s.final_q.im << '\n'
     << "final_phi = " << s.final_q.phi << '\n'
     << "final_mean_velocity = " << s.final_mean_velocity << '\n'
     << "window_start = " << s.window_start << '\n'
     << "re_q_min = " << s.re_q_min << '\n'
     << "re_q_max = " << s.re_q_max << '\n'
     << "im_q_min = " << s.im_q_min << '\n'
     << "im_q_max = " << s.im_q_max << '\n'
     << "n_clusters = " << s.clusters.count() << '\n'
     << "cluster_assignment = ";
  for (std::size_t i = 0; i < s.clusters.assignment.size(); ++i) {
    os << (i ? "," : "") << s.clusters.assignment[i];
  }
  os << "\ncluster_drift = ";
  for (std::size_t c = 0; c < s.clusters.drift_rates.size(); ++c) {
    os << (c ? "," : "") << s.clusters.drift_rates[c];
  }
  os << '\n';
  os.precision(old);
}

int cmd_stationary(const ScenarioConfig& config, const std::filesystem::path& out_dir,
                   Console& console) {
  return guarded(console, [&] {
    if (config.topology != TopologyKind::chain || !config.endpoint_pattern) {
      throw ConfigError("stationary requires a chain with net_input = endpoints");
    }
    ScenarioConfig probe = config;
    probe.initial = InitialKind::zero;
    const Scenario sc = build_scenario(probe);
    const auto k = sc.topology.chain_couplings();
    const auto profile = chain_stationary(config.endpoint_p, k, config.n);
    const double residual = stationarity_residual(profile, sc.params, sc.topology);

    auto csv = open_output(out_dir, "stationary.csv");
    csv << "index,theta_star,coupling_to_next\n";
    for (std::size_t i = 0; i < config.n; ++i) {
      csv << i << ',' << profile.theta_star[i] << ',';
      if (i + 1 < config.n) csv << k[i];
      csv << '\n';
    }
    if (!console.quiet) {
      console.out << "wrote " << (out_dir / "stationary.csv").string() << '\n';
    }
    console.out << "max residual: " << std::setprecision(3) << std::scientific << residual
                << std::defaultfloat << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_calibrate(const std::filesystem::path& phases_csv, double net_input,
                  const std::filesystem::path& out_dir, Console& console) {
  return guarded(console, [&] {
    const auto observed = read_phases_csv(phases_csv);
    const auto k = calibrate_couplings(observed, net_input);
    // Only the principal branch is reproduced by the stationary solution.
    for (std::size_t i = 0; i + 1 < observed.size(); ++i) {
      if (std::abs(observed[i] - observed[i + 1]) >= kPi / 2.0) {
        throw CalibrationInfeasible(i, "phase difference is not below pi/2 (unstable branch)");
      }
    }
    const auto profile = chain_stationary(net_input, k, observed.size());
    const double offset = observed.back();

    auto couplings = open_output(out_dir, "couplings.csv");
    couplings << "index,coupling\n";
    for (std::size_t i = 0; i < k.size(); ++i) couplings << i << ',' << k[i] << '\n';

    auto check = open_output(out_dir, "phases_check.csv");
    check << "index,theta_observed,theta_reconstructed,abs_error\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
      const double rebuilt = profile.theta_star[i] + offset;
      const double err = std::abs(rebuilt - observed[i]);
      worst = std::max(worst, err);
      check << i << ',' << observed[i] << ',' << rebuilt << ',' << err << '\n';
    }
    if (!console.quiet) {
      console.out << "calibrated " << k.size() << " couplings from " << observed.size()
                  << " phases\n";
    }
    console.out << "max reconstruction error: " << std::setprecision(3) << std::scientific
                << worst << std::defaultfloat << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_simulate(const ScenarioConfig& config, const std::filesystem::path& out_dir,
                 Console& console) {
  return guarded(console, [&] {
    const Trajectory traj = run_scenario(config);
    const RunSummary summary = summarize(traj, config);

    auto csv = open_output(out_dir, "trajectory.csv");
    write_trajectory_csv(csv, traj);
    auto txt = open_output(out_dir, "summary.txt");
    write_summary(txt, summary);

    if (!console.quiet) write_summary(console.out, summary);
    return static_cast<int>(kExitOk);
  });
}

SweepParameter parse_sweep_parameter(std::string_view name) {
  if (name == "coupling_scale") return SweepParameter::coupling_scale;
  if (name == "shock_magnitude") return SweepParameter::shock_magnitude;
  if (name == "epsilon_d") return SweepParameter::epsilon_d;
  throw ConfigError("sweep parameter must be coupling_scale, shock_magnitude or epsilon_d, got '" +
                    std::string(name) + "'");
}

int cmd_sweep(const ScenarioConfig& config, SweepParameter parameter,
              std::span<const double> values, const std::filesystem::path& out_dir,
              Console& console, unsigned workers) {
  return guarded(console, [&] {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    for (double v : values) {
      if (!std::isfinite(v)) throw ConfigError("sweep values must be finite");
    }
    if (parameter == SweepParameter::shock_magnitude && config.shocks.empty()) {
      throw ConfigError("shock_magnitude sweep needs at least one [shock.N] section");
    }

    struct Row {
      std::optional<RunSummary> summary;
      std::string error;
    };
    std::vector<Row> rows(values.size());

    auto run_one = [&](std::size_t idx) {
      ScenarioConfig cfg = config;
      const double v = values[idx];
      switch (parameter) {
        case SweepParameter::coupling_scale:
          cfg.coupling_scale = v;
          break;
        case SweepParameter::shock_magnitude:
          for (auto& s : cfg.shocks) s.magnitude = v;
          break;
        case SweepParameter::epsilon_d:
          cfg.market.epsilon_d = v;
          break;
      }
      try {
        rows[idx].summary = summarize(run_scenario(cfg), cfg);
      } catch (const std::exception& e) {
        rows[idx].error = e.what();
      }
    };

    unsigned pool = workers ? workers : std::max(1u, std::thread::hardware_concurrency());
    pool = std::min<unsigned>(pool, static_cast<unsigned>(values.size()));
    std::atomic<std::size_t> next{0};
    {
      std::vector<std::jthread> threads;
      threads.reserve(pool);
      for (unsigned w = 0; w < pool; ++w) {
        threads.emplace_back([&] {
          for (std::size_t idx = next++; idx < values.size(); idx = next++) run_one(idx);
        });
      }
    }

    auto csv = open_output(out_dir, "sweep.csv");
    csv << "value,final_r,n_clusters,mean_velocity_final,error\n";
    std::size_t failures = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      csv << format_number(values[i]) << ',';
      if (rows[i].summary) {
        const auto& s = *rows[i].summary;
        csv << format_number(s.final_q.r) << ',' << s.clusters.count() << ','
            << format_number(s.final_mean_velocity) << ",\n";
      } else {
        ++failures;
        std::string msg = rows[i].error;
        std::replace(msg.begin(), msg.end(), ',', ';');
        csv << ",,," << msg << '\n';
      }
    }
    if (!console.quiet) {
      console.out << "wrote " << (out_dir / "sweep.csv").string() << " (" << values.size()
                  << " runs, " << failures << " failed)\n";
    }
    return static_cast<int>(kExitOk);
  });
}

}  // namespace oscmarket
