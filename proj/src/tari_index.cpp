#include "chahak/tari_index.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <ostream>

#include <omp.h>

#include "chahak/error.hpp"

namespace chahak::tari {

void TariConfig::validate() const {
  if (!(theta > 0.0 && theta < 1.0)) throw ValidationError("tari.theta must be in (0, 1)");
  if (cap < 1) throw ValidationError("tari.cap must be >= 1");
}

int rollout_weeks_to_threshold(const forecast::ForecastModel& model,
                               const forecast::ForecastWindow& history, ActionKind first_action,
                               const TariConfig& config) {
  const int h = model.history_length();
  if (history.size() != h || static_cast<int>(history.actions.size()) != h)
    throw ValidationError("rollout history length does not match the model");
  forecast::ForecastWindow w = history;
  for (int t = 1; t <= config.cap; ++t) {
    w.actions.back() = t == 1 ? first_action : ActionKind::Passive;
    const double next = model.predict(w);
    if (next < config.theta) return t;
    w.states.erase(w.states.begin());
    w.states.push_back(next);
    w.actions.erase(w.actions.begin());
    w.actions.push_back(ActionKind::Passive);
  }
  return config.cap + 1;
}

forecast::ForecastWindow history_window(const Trajectory& trajectory, int h) {
  if (h < 1) throw ValidationError("history length must be >= 1");
  const auto& weeks = trajectory.weeks;
  if (weeks.empty())
    throw ValidationError("beneficiary " + trajectory.beneficiary_id + " has no observed weeks");
  const int n = static_cast<int>(weeks.size());
  forecast::ForecastWindow w;
  w.states.reserve(h);
  w.actions.reserve(h);
  for (int j = 0; j < h; ++j) {
    const int t = n - h + j;  // week index of states[j]
    w.states.push_back(weeks[t < 0 ? 0 : t].state);
    const int next = t + 1;
    w.actions.push_back(next >= 1 && next < n ? weeks[next].action : ActionKind::Passive);
  }
  return w;
}

IndexRow index_row(const forecast::ForecastModel& model, const Trajectory& history,
                   std::size_t arm, const TariConfig& config) {
  const auto w = history_window(history, model.history_length());
  IndexRow r;
  r.arm = arm;
  r.beneficiary_id = history.beneficiary_id;
  r.v = rollout_weeks_to_threshold(model, w, ActionKind::Passive, config);
  r.u_asha = rollout_weeks_to_threshold(model, w, ActionKind::AshaVisit, config);
  r.u_call = rollout_weeks_to_threshold(model, w, ActionKind::CallReminder, config);
  r.m_asha = static_cast<double>(r.u_asha) / r.v;
  r.m_call = static_cast<double>(r.u_call) / r.v;
  return r;
}

namespace {

void check_arms(const std::vector<Trajectory>& histories, const std::vector<std::size_t>& arms) {
  for (std::size_t i = 0; i < arms.size(); ++i) {
    if (arms[i] >= histories.size()) throw ValidationError("arm index out of range");
    if (i > 0 && arms[i] <= arms[i - 1]) throw ValidationError("arms must be strictly ascending");
  }
}

}  // namespace

IndexTable compute_indices(const forecast::ForecastModel& model,
                           const std::vector<Trajectory>& histories,
                           const std::vector<std::size_t>& arms, const TariConfig& config) {
  config.validate();
  check_arms(histories, arms);
  IndexTable table;
  table.rows.reserve(arms.size());
  for (auto a : arms) table.rows.push_back(index_row(model, histories[a], a, config));
  return table;
}

IndexTable compute_indices_parallel(const forecast::ForecastModel& model,
                                    const std::vector<Trajectory>& histories,
                                    const std::vector<std::size_t>& arms,
                                    const TariConfig& config) {
  config.validate();
  check_arms(histories, arms);
  IndexTable table;
  table.rows.resize(arms.size());
  const auto n = static_cast<std::int64_t>(arms.size());
  // Exceptions may not leave an OpenMP region; the first one is rethrown.
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      const auto a = arms[static_cast<std::size_t>(i)];
      table.rows[static_cast<std::size_t>(i)] = index_row(model, histories[a], a, config);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return table;
}

IndexTable compute_indices(const forecast::ForecastModel& model,
                           const std::vector<Trajectory>& histories, const TariConfig& config) {
  std::vector<std::size_t> arms(histories.size());
  std::iota(arms.begin(), arms.end(), std::size_t{0});
  return compute_indices(model, histories, arms, config);
}

void write_index_table(std::ostream& out, const IndexTable& table) {
  out << "beneficiary_id,u_asha,u_call,v,m_asha,m_call\n";
  char buf[128];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g,%.17g", r.u_asha, r.u_call, r.v, r.m_asha,
                  r.m_call);
    out << r.beneficiary_id << ',' << buf << '\n';
  }
}

}  // namespace chahak::tari
