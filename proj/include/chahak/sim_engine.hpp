#pragma once

// Closed-loop weekly simulation: policies allocate interventions, ground-truth
// engagement evolves with multiplicative lifts, and the dropout rule removes
// disengaged beneficiaries.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "chahak/allocator.hpp"
#include "chahak/cohort.hpp"
#include "chahak/forecaster.hpp"
#include "chahak/tari_index.hpp"

namespace chahak::sim {

enum class PolicyKind : std::uint8_t { Ilp, Greedy, Random, Control };

inline constexpr PolicyKind kAllPolicies[] = {PolicyKind::Ilp, PolicyKind::Greedy,
                                              PolicyKind::Random, PolicyKind::Control};

// ilp, greedy, random, control
std::string_view to_string(PolicyKind p) noexcept;
PolicyKind parse_policy(std::string_view s);
std::vector<PolicyKind> parse_policy_list(std::string_view csv);

// clip((alpha * s + (1 - alpha) * mu + sigma * z) * lift, 0, 1) where the lift
// comes from the intervention history ending with this week's action.
double ground_truth_step(double state, const BeneficiaryGroundTruth& truth,
                         std::span<const ActionKind> action_history, const LiftParams& lifts,
                         double z);

// True iff the last `window` states are all strictly below theta.
bool apply_dropout_rule(std::span<const double> tail, double theta = 0.25, int window = 6);

struct SimSettings {
  int weeks = 8;
  // Unset budgets default to ceil(budget_fraction * N) with N the enrolled
  // cohort size.
  std::optional<alloc::Budgets> budgets;
  double budget_fraction = 0.01;
  tari::TariConfig tari;
  alloc::AllocatorOptions allocator;
  double dropout_theta = 0.25;
  int dropout_window = 6;
  double avm_length_s = 120.0;
  LiftParams lifts;
  std::uint64_t seed = 1;
  bool parallel = true;

  void validate() const;
  alloc::Budgets resolved_budgets(std::size_t n) const;
};

struct WeekAllocation {
  std::vector<std::size_t> arms;
  std::vector<ActionKind> actions;
};

struct PolicyRun {
  PolicyKind policy = PolicyKind::Control;
  std::vector<std::vector<double>> states;  // [week][arm], 0 once dropped
  std::vector<double> hours;                // [week]
  std::vector<std::int64_t> dropouts;       // new dropouts per week
  std::vector<WeekAllocation> allocations;  // [week], interventions only
};

struct SimReport {
  SimSettings settings;
  alloc::Budgets budgets;
  std::size_t n_arms = 0;
  std::vector<PolicyRun> runs;

  const PolicyRun* find(PolicyKind p) const noexcept;
};

// One policy over the cohort. Engagement noise for (arm, week) comes from a
// stream shared by all policies, so runs are paired. The model is used only
// by the index policies.
PolicyRun run_policy(const SyntheticCohort& cohort, PolicyKind policy,
                     const forecast::ForecastModel& model, const SimSettings& settings);

SimReport run_simulation(const SyntheticCohort& cohort, const std::vector<PolicyKind>& policies,
                         const forecast::ForecastModel& model, const SimSettings& settings);

// sum over t <= w of (policy hours - control hours).
std::vector<double> metric_cumulative_gain(const PolicyRun& run, const PolicyRun& control);

// (control cumulative dropouts - policy cumulative dropouts) /
// max(control cumulative dropouts, 1) * 100.
std::vector<double> metric_dropouts_prevented(const PolicyRun& run, const PolicyRun& control);

std::vector<std::int64_t> cumulative_dropouts(const PolicyRun& run);

// Summary JSON: settings echo and per-policy weekly series.
void write_report_json(std::ostream& out, const SimReport& report);
// week,policy,cumulative_gain_hours  (requires a control run)
void write_gain_csv(std::ostream& out, const SimReport& report);
// week,policy,dropouts_prevented_pct (requires a control run)
void write_dropouts_csv(std::ostream& out, const SimReport& report);
// week,beneficiary_id,action for one policy.
void write_allocations_csv(std::ostream& out, const PolicyRun& run,
                           const std::vector<Trajectory>& histories);

}  // namespace chahak::sim
