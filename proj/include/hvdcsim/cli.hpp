#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "hvdcsim/analysis.hpp"
#include "hvdcsim/config.hpp"
#include "hvdcsim/solver.hpp"

namespace hvdcsim::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kSimulationAbort = 3,
  kIoError = 4,
  kDomainError = 5,
};

/// Fixed trajectory.csv columns, in order.
const std::vector<std::string>& csv_columns();

/// 9 significant digits, one row per output sample.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Metrics plus the scenario fields needed to recompute the requirement channel.
std::string metrics_json(const analysis::Metrics& m, const Scenario& sc);

struct SweepPoint {
  double value = 0.0;
  analysis::Metrics metrics;
};

/// R_dc, D_OWPP, H_OWPP or P_4; ConfigError otherwise.
void apply_sweep_value(RunConfig& config, const std::string& param, double value);
std::vector<double> parse_values(const std::string& list);

/// Worker count for n independent jobs: HVDCSIM_THREADS if set (>= 1), else the
/// hardware concurrency, never more than n.
unsigned worker_count(std::size_t n);

/// Runs jobs 0..n-1 on worker_count(n) threads. The lowest-index exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& job);

/// Entry point; returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hvdcsim::cli
