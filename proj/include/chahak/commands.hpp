#pragma once

// Experiment commands behind the CLI. Each one reads a RunConfig, writes its
// outputs under the configured directory and returns the computed results.

#include <iosfwd>
#include <string>
#include <vector>

#include "chahak/cohort.hpp"
#include "chahak/config.hpp"
#include "chahak/forecaster.hpp"
#include "chahak/sim_engine.hpp"
#include "chahak/slot_bandit.hpp"

namespace chahak::cli {

struct TimeslotResult {
  std::vector<slots::SlotPolicyKind> policies;
  std::vector<std::vector<double>> avg_calls;    // [policy][week - 1]
  std::vector<std::vector<double>> convergence;  // [policy][week], week 0 = fresh
};

// avg_calls.csv, convergence.csv, timeslot_metrics.csv
TimeslotResult cmd_timeslot_bench(const RunConfig& config, std::ostream& log);

struct MarkovRow {
  int h = 1;
  double neg_log_likelihood = 0.0;
  double relative_improvement = 0.0;
};

// markov.csv
std::vector<MarkovRow> cmd_markov(const RunConfig& config, std::ostream& log);

struct ForecastResult {
  forecast::LinearARModel model;
  double mae = 0.0;
  std::size_t train_windows = 0;
  std::size_t test_windows = 0;
};

// model.txt, mae.txt
ForecastResult cmd_forecast(const RunConfig& config, std::ostream& log);

// Synthetic cohort plus a forecaster fitted on the training split of its
// observed prefixes.
struct SimulationSetup {
  SyntheticCohort cohort;
  forecast::LinearARModel model;
};
SimulationSetup prepare_simulation(const CohortConfig& cohort, int h,
                                   forecast::ActionFeatures features, double train_ratio);

// report.json, cumulative_gain.csv, dropouts_prevented.csv,
// index_distribution.csv, allocations_<policy>.csv
sim::SimReport cmd_simulate(const RunConfig& config, std::ostream& log);

// trajectories.csv, pickup_rates.csv
CallLogs cmd_ingest(const RunConfig& config, std::ostream& log);

}  // namespace chahak::cli
