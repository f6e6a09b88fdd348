#pragma once

// Multi-action time-series arm ranking index: weeks until the forecast drops
// below a threshold when acting once (u) versus never acting (v), m = u / v.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "chahak/cohort.hpp"
#include "chahak/forecaster.hpp"

namespace chahak::tari {

struct TariConfig {
  double theta = 0.25;
  int cap = 40;  // censored rollouts report cap + 1

  void validate() const;
};

// Step 1 uses first_action, every later step is passive. Returns the first
// predicted week (counted from 1) whose state is below theta, or cap + 1.
int rollout_weeks_to_threshold(const forecast::ForecastModel& model,
                               const forecast::ForecastWindow& history, ActionKind first_action,
                               const TariConfig& config);

struct IndexRow {
  std::size_t arm = 0;  // position in the cohort
  BeneficiaryId beneficiary_id;
  int u_asha = 1;
  int u_call = 1;
  int v = 1;
  double m_asha = 1.0;
  double m_call = 1.0;

  double m(ActionKind a) const noexcept { return a == ActionKind::CallReminder ? m_call : m_asha; }
};

// Rows are in ascending arm order.
struct IndexTable {
  std::vector<IndexRow> rows;

  std::size_t size() const noexcept { return rows.size(); }
  bool empty() const noexcept { return rows.empty(); }
};

// The last h weeks of a trajectory as a rollout start. Short histories are
// left-padded with the earliest state and passive actions. The final action
// slot is a placeholder the rollout overwrites.
forecast::ForecastWindow history_window(const Trajectory& trajectory, int h);

IndexRow index_row(const forecast::ForecastModel& model, const Trajectory& history,
                   std::size_t arm, const TariConfig& config);

// One row per listed arm. The parallel version splits arms across threads
// against the shared immutable model and returns the same table.
IndexTable compute_indices(const forecast::ForecastModel& model,
                           const std::vector<Trajectory>& histories,
                           const std::vector<std::size_t>& arms, const TariConfig& config);
IndexTable compute_indices_parallel(const forecast::ForecastModel& model,
                                    const std::vector<Trajectory>& histories,
                                    const std::vector<std::size_t>& arms,
                                    const TariConfig& config);
// Every arm in the cohort.
IndexTable compute_indices(const forecast::ForecastModel& model,
                           const std::vector<Trajectory>& histories, const TariConfig& config);

// beneficiary_id,u_asha,u_call,v,m_asha,m_call
void write_index_table(std::ostream& out, const IndexTable& table);

}  // namespace chahak::tari
