#include "chahak/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <json.hpp>
#include <omp.h>

#include "chahak/error.hpp"
#include "chahak/random.hpp"

namespace chahak::sim {

std::string_view to_string(PolicyKind p) noexcept {
  switch (p) {
    case PolicyKind::Ilp:
      return "ilp";
    case PolicyKind::Greedy:
      return "greedy";
    case PolicyKind::Random:
      return "random";
    case PolicyKind::Control:
      break;
  }
  return "control";
}

PolicyKind parse_policy(std::string_view s) {
  for (auto p : kAllPolicies)
    if (s == to_string(p)) return p;
  throw ValidationError("unknown policy '" + std::string(s) + "' (expected ilp, greedy, random, control)");
}

std::vector<PolicyKind> parse_policy_list(std::string_view csv) {
  std::vector<PolicyKind> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto end = std::min(csv.find(',', start), csv.size());
    const auto item = csv.substr(start, end - start);
    if (item.empty()) throw ValidationError("empty entry in policy list");
    const auto p = parse_policy(item);
    if (std::find(out.begin(), out.end(), p) != out.end())
      throw ValidationError("policy '" + std::string(item) + "' listed twice");
    out.push_back(p);
    start = end + 1;
  }
  return out;
}

double ground_truth_step(double state, const BeneficiaryGroundTruth& truth,
                         std::span<const ActionKind> action_history, const LiftParams& lifts,
                         double z) {
  if (!(state >= 0.0 && state <= 1.0)) throw ValidationError("state must be in [0, 1]");
  return engagement_step(state, truth, active_lift(action_history, lifts), z);
}

bool apply_dropout_rule(std::span<const double> tail, double theta, int window) {
  if (window < 1) throw ValidationError("dropout window must be >= 1");
  const auto w = static_cast<std::size_t>(window);
  if (tail.size() < w) return false;
  return std::all_of(tail.end() - static_cast<std::ptrdiff_t>(w), tail.end(),
                     [theta](double s) { return s < theta; });
}

void SimSettings::validate() const {
  if (weeks < 1) throw ValidationError("sim.weeks must be >= 1");
  if (dropout_window < 1) throw ValidationError("sim.dropout_window must be >= 1");
  if (!(dropout_theta > 0.0 && dropout_theta < 1.0))
    throw ValidationError("sim.dropout_theta must be in (0, 1)");
  if (!(avm_length_s > 0.0)) throw ValidationError("avm length must be > 0");
  if (lifts.asha < 1.0 || lifts.call < 1.0) throw ValidationError("lifts must be >= 1");
  if (lifts.duration_weeks < 1) throw ValidationError("lift duration must be >= 1 week");
  if (budgets && (budgets->asha < 0 || budgets->call < 0))
    throw ValidationError("budgets must be >= 0");
  tari.validate();
}

alloc::Budgets SimSettings::resolved_budgets(std::size_t n) const {
  return budgets ? *budgets : alloc::budgets_from_fraction(n, budget_fraction);
}

const PolicyRun* SimReport::find(PolicyKind p) const noexcept {
  for (const auto& r : runs)
    if (r.policy == p) return &r;
  return nullptr;
}

namespace {

constexpr std::uint64_t kNoiseStream = 0x5E;
constexpr std::uint64_t kRandomPolicyStream = 0x5A;

alloc::Allocation allocate(PolicyKind policy, const std::vector<Trajectory>& histories,
                           const std::vector<std::size_t>& arms,
                           const forecast::ForecastModel& model, const alloc::Budgets& budgets,
                           const SimSettings& s, int week) {
  switch (policy) {
    case PolicyKind::Ilp:
    case PolicyKind::Greedy: {
      const auto table = s.parallel ? tari::compute_indices_parallel(model, histories, arms, s.tari)
                                    : tari::compute_indices(model, histories, arms, s.tari);
      return policy == PolicyKind::Ilp ? alloc::allocate_ilp(table, budgets, s.allocator)
                                       : alloc::allocate_greedy(table, budgets, s.allocator);
    }
    case PolicyKind::Random: {
      // Budgets are fixed at enrollment; once fewer arms remain active the
      // draw is clamped to them, ASHA first.
      const auto n = static_cast<std::int64_t>(arms.size());
      alloc::Budgets b;
      b.asha = std::min(budgets.asha, n);
      b.call = std::min(budgets.call, n - b.asha);
      StreamRng rng(s.seed, kRandomPolicyStream, static_cast<std::uint64_t>(week));
      return alloc::allocate_random(arms.size(), b, rng);
    }
    case PolicyKind::Control:
      break;
  }
  return alloc::allocate_control(arms.size());
}

}  // namespace

PolicyRun run_policy(const SyntheticCohort& cohort, PolicyKind policy,
                     const forecast::ForecastModel& model, const SimSettings& settings) {
  settings.validate();
  const auto n = cohort.histories.size();
  if (cohort.truth.size() != n) throw ValidationError("cohort truth and histories differ in size");
  const auto budgets = settings.resolved_budgets(n);

  PolicyRun run;
  run.policy = policy;
  auto histories = cohort.histories;
  std::vector<char> active(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (histories[i].weeks.empty())
      throw ValidationError("beneficiary " + histories[i].beneficiary_id + " has no history");
    if (histories[i].dropped_at_week) active[i] = 0;
  }

  const int lift_span = settings.lifts.duration_weeks;
  for (int week = 0; week < settings.weeks; ++week) {
    std::vector<std::size_t> arms;
    for (std::size_t i = 0; i < n; ++i)
      if (active[i]) arms.push_back(i);

    const auto allocation = allocate(policy, histories, arms, model, budgets, settings, week);
    std::vector<ActionKind> action(n, ActionKind::Passive);
    WeekAllocation record;
    for (std::size_t r = 0; r < arms.size(); ++r) {
      action[arms[r]] = allocation.actions[r];
      if (allocation.actions[r] != ActionKind::Passive) {
        record.arms.push_back(arms[r]);
        record.actions.push_back(allocation.actions[r]);
      }
    }
    run.allocations.push_back(std::move(record));

    std::vector<double> next(n, 0.0);
    std::vector<char> dropped(n, 0);
    auto step_arm = [&](std::size_t i) {
      if (!active[i]) return;
      auto& hist = histories[i];
      std::vector<ActionKind> recent;
      const auto len = hist.weeks.size();
      for (std::size_t back = std::min<std::size_t>(len, lift_span - 1); back > 0; --back)
        recent.push_back(hist.weeks[len - back].action);
      recent.push_back(action[i]);
      StreamRng rng(settings.seed, kNoiseStream, i, static_cast<std::uint64_t>(week));
      const double s =
          ground_truth_step(hist.weeks.back().state, cohort.truth[i], recent, settings.lifts,
                            rng.normal());
      hist.weeks.push_back({s, action[i], s * settings.avm_length_s});
      next[i] = s;
      const auto w = static_cast<std::size_t>(settings.dropout_window);
      if (hist.weeks.size() >= w) {
        std::vector<double> tail;
        tail.reserve(w);
        for (std::size_t k = hist.weeks.size() - w; k < hist.weeks.size(); ++k)
          tail.push_back(hist.weeks[k].state);
        dropped[i] = apply_dropout_rule(tail, settings.dropout_theta, settings.dropout_window);
      }
    };
    if (settings.parallel) {
      const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
      for (std::int64_t i = 0; i < count; ++i) step_arm(static_cast<std::size_t>(i));
    } else {
      for (std::size_t i = 0; i < n; ++i) step_arm(i);
    }

    double total = 0.0;
    std::int64_t new_dropouts = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      total += next[i];
      if (dropped[i]) {
        active[i] = 0;
        histories[i].dropped_at_week = static_cast<int>(histories[i].weeks.size());
        ++new_dropouts;
      }
    }
    run.states.push_back(std::move(next));
    run.hours.push_back(total * settings.avm_length_s / 3600.0);
    run.dropouts.push_back(new_dropouts);
  }
  return run;
}

SimReport run_simulation(const SyntheticCohort& cohort, const std::vector<PolicyKind>& policies,
                         const forecast::ForecastModel& model, const SimSettings& settings) {
  settings.validate();
  SimReport report;
  report.settings = settings;
  report.n_arms = cohort.histories.size();
  report.budgets = settings.resolved_budgets(report.n_arms);
  for (auto p : policies) report.runs.push_back(run_policy(cohort, p, model, settings));
  return report;
}

namespace {

void check_paired(const PolicyRun& run, const PolicyRun& control) {
  if (run.hours.size() != control.hours.size() || run.states.size() != control.states.size() ||
      (!run.states.empty() && run.states.front().size() != control.states.front().size()))
    throw ValidationError("reports come from different cohorts or horizons");
}

}  // namespace

std::vector<double> metric_cumulative_gain(const PolicyRun& run, const PolicyRun& control) {
  check_paired(run, control);
  std::vector<double> out;
  double acc = 0.0;
  for (std::size_t w = 0; w < run.hours.size(); ++w) {
    acc += run.hours[w] - control.hours[w];
    out.push_back(acc);
  }
  return out;
}

std::vector<std::int64_t> cumulative_dropouts(const PolicyRun& run) {
  std::vector<std::int64_t> out;
  std::int64_t acc = 0;
  for (auto d : run.dropouts) out.push_back(acc += d);
  return out;
}

std::vector<double> metric_dropouts_prevented(const PolicyRun& run, const PolicyRun& control) {
  check_paired(run, control);
  const auto p = cumulative_dropouts(run);
  const auto c = cumulative_dropouts(control);
  std::vector<double> out;
  for (std::size_t w = 0; w < p.size(); ++w)
    out.push_back(static_cast<double>(c[w] - p[w]) /
                  static_cast<double>(std::max<std::int64_t>(c[w], 1)) * 100.0);
  return out;
}

void write_report_json(std::ostream& out, const SimReport& report) {
  const auto& s = report.settings;
  nlohmann::ordered_json j;
  j["seed"] = s.seed;
  j["n_beneficiaries"] = report.n_arms;
  j["weeks"] = s.weeks;
  j["budgets"] = {{"asha", report.budgets.asha}, {"call", report.budgets.call}};
  j["settings"] = {{"budget_fraction", s.budget_fraction},
                   {"tari_theta", s.tari.theta},
                   {"tari_cap", s.tari.cap},
                   {"exclude_nonbeneficial", s.allocator.exclude_nonbeneficial},
                   {"greedy_backfill", s.allocator.greedy_backfill},
                   {"dropout_theta", s.dropout_theta},
                   {"dropout_window", s.dropout_window},
                   {"avm_length_s", s.avm_length_s},
                   {"lift_asha", s.lifts.asha},
                   {"lift_call", s.lifts.call},
                   {"lift_duration_weeks", s.lifts.duration_weeks}};
  const PolicyRun* control = report.find(PolicyKind::Control);
  auto& policies = j["policies"];
  policies = nlohmann::ordered_json::object();
  for (const auto& run : report.runs) {
    nlohmann::ordered_json p;
    p["hours"] = run.hours;
    p["dropouts"] = run.dropouts;
    p["cumulative_dropouts"] = cumulative_dropouts(run);
    if (control) {
      p["cumulative_gain_hours"] = metric_cumulative_gain(run, *control);
      p["dropouts_prevented_pct"] = metric_dropouts_prevented(run, *control);
    }
    policies[std::string(to_string(run.policy))] = std::move(p);
  }
  out << j.dump(2) << '\n';
}

namespace {

const PolicyRun& require_control(const SimReport& report) {
  const PolicyRun* control = report.find(PolicyKind::Control);
  if (!control) throw ValidationError("metrics against control need a control run");
  return *control;
}

void write_series(std::ostream& out, const SimReport& report, const char* header,
                  std::vector<double> (*metric)(const PolicyRun&, const PolicyRun&)) {
  const auto& control = require_control(report);
  out << header << '\n';
  char buf[64];
  for (int w = 0; w < report.settings.weeks; ++w)
    for (const auto& run : report.runs) {
      const auto series = metric(run, control);
      std::snprintf(buf, sizeof buf, "%.17g", series[static_cast<std::size_t>(w)]);
      out << (w + 1) << ',' << to_string(run.policy) << ',' << buf << '\n';
    }
}

}  // namespace

void write_gain_csv(std::ostream& out, const SimReport& report) {
  write_series(out, report, "week,policy,cumulative_gain_hours", metric_cumulative_gain);
}

void write_dropouts_csv(std::ostream& out, const SimReport& report) {
  write_series(out, report, "week,policy,dropouts_prevented_pct", metric_dropouts_prevented);
}

void write_allocations_csv(std::ostream& out, const PolicyRun& run,
                           const std::vector<Trajectory>& histories) {
  alloc::write_allocation_header(out);
  for (std::size_t w = 0; w < run.allocations.size(); ++w) {
    const auto& a = run.allocations[w];
    for (std::size_t k = 0; k < a.arms.size(); ++k)
      out << (w + 1) << ',' << histories.at(a.arms[k]).beneficiary_id << ','
          << chahak::to_string(a.actions[k]) << '\n';
  }
}

}  // namespace chahak::sim
