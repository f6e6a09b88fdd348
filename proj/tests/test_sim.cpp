#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "chahak/commands.hpp"
#include "chahak/error.hpp"
#include "chahak/sim_engine.hpp"

using namespace chahak;
using namespace chahak::sim;

namespace {

const ActionKind kPassive[] = {ActionKind::Passive};
const ActionKind kAsha[] = {ActionKind::AshaVisit};

cli::SimulationSetup small_setup(int n, double noise = 0.01, std::uint64_t seed = 1) {
  CohortConfig c;
  c.n_beneficiaries = n;
  c.noise_sigma = noise;
  c.seed = seed;
  return cli::prepare_simulation(c, 4, forecast::ActionFeatures::LastLag, 0.7);
}

PolicyRun run_with_hours(std::vector<double> hours, std::vector<std::int64_t> dropouts = {}) {
  PolicyRun r;
  r.states.assign(hours.size(), std::vector<double>(1, 0.0));
  r.hours = std::move(hours);
  r.dropouts = dropouts.empty() ? std::vector<std::int64_t>(r.hours.size(), 0) : std::move(dropouts);
  return r;
}

}  // namespace

TEST_CASE("ground_truth_step examples") {
  BeneficiaryGroundTruth t;
  t.persistence = 0.9;
  t.engagement_mean = 0.3;
  t.noise_sigma = 0.0;
  const LiftParams lifts;
  CHECK(ground_truth_step(0.5, t, kPassive, lifts, 0.7) == doctest::Approx(0.48));
  CHECK(ground_truth_step(0.5, t, kAsha, lifts, 0.0) == doctest::Approx(0.5568));
  t.engagement_mean = 0.0;
  CHECK(ground_truth_step(0.0, t, kPassive, lifts, 0.0) == 0.0);
  CHECK_THROWS_AS(ground_truth_step(1.5, t, kPassive, lifts, 0.0), ValidationError);

  t.engagement_mean = 0.95;
  t.noise_sigma = 1.0;
  CHECK(ground_truth_step(0.99, t, kAsha, lifts, 3.0) == 1.0);
  CHECK(ground_truth_step(0.01, t, kPassive, lifts, -3.0) == 0.0);
}

TEST_CASE("apply_dropout_rule examples") {
  CHECK(apply_dropout_rule(std::vector<double>(6, 0.1)));
  CHECK_FALSE(apply_dropout_rule(std::vector<double>{0.1, 0.1, 0.1, 0.1, 0.1, 0.3}));
  CHECK_FALSE(apply_dropout_rule(std::vector<double>{0.1, 0.1, 0.25, 0.1, 0.1, 0.1}));
  CHECK_FALSE(apply_dropout_rule(std::vector<double>(5, 0.1)));
  CHECK(apply_dropout_rule(std::vector<double>{0.9, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1}));
  CHECK(apply_dropout_rule(std::vector<double>{0.1, 0.1}, 0.25, 2));
  CHECK_THROWS_AS(apply_dropout_rule(std::vector<double>{0.1}, 0.25, 0), ValidationError);
}

TEST_CASE("metric examples") {
  const auto control = run_with_hours({0.25 * 120 / 3600, 0.25 * 120 / 3600}, {10, 0});
  const auto policy = run_with_hours({0.5 * 120 / 3600, 0.5 * 120 / 3600}, {7, 0});
  const auto gain = metric_cumulative_gain(policy, control);
  CHECK(gain[0] == doctest::Approx(1.0 / 120));
  CHECK(gain[1] == doctest::Approx(2.0 / 120));
  CHECK(metric_cumulative_gain(control, control) == std::vector<double>{0.0, 0.0});
  CHECK(metric_dropouts_prevented(policy, control) == std::vector<double>{30.0, 30.0});
  CHECK(metric_dropouts_prevented(control, control) == std::vector<double>{0.0, 0.0});

  const auto none = run_with_hours({0.1, 0.1});
  const auto worse = run_with_hours({0.1, 0.1}, {1, 0});
  CHECK(metric_dropouts_prevented(none, none) == std::vector<double>{0.0, 0.0});
  CHECK(metric_dropouts_prevented(worse, none) == std::vector<double>{-100.0, -100.0});
  CHECK_THROWS_AS(metric_cumulative_gain(run_with_hours({0.1}), control), ValidationError);
}

TEST_CASE("policy lists") {
  CHECK(parse_policy_list("ilp,control") == std::vector<PolicyKind>{PolicyKind::Ilp, PolicyKind::Control});
  for (auto p : kAllPolicies) CHECK(parse_policy(to_string(p)) == p);
  CHECK_THROWS_AS(parse_policy_list("ilp,,greedy"), ValidationError);
  CHECK_THROWS_AS(parse_policy_list("ilp,ilp"), ValidationError);
  CHECK_THROWS_AS(parse_policy_list("lp"), ValidationError);
}

TEST_CASE("control allocates nothing; zero budgets reproduce control") {
  const auto setup = small_setup(400);
  SimSettings s;
  const auto control = run_policy(setup.cohort, PolicyKind::Control, setup.model, s);
  for (const auto& a : control.allocations) CHECK(a.arms.empty());
  s.budgets = alloc::Budgets{0, 0};
  for (auto p : kAllPolicies) {
    const auto run = run_policy(setup.cohort, p, setup.model, s);
    CHECK(run.states == control.states);
    CHECK(run.hours == control.hours);
    CHECK(run.dropouts == control.dropouts);
  }
}

TEST_CASE("zero noise and unit lifts make every policy equal control") {
  const auto setup = small_setup(400, 0.0);
  SimSettings s;
  s.lifts.asha = 1.0;
  s.lifts.call = 1.0;
  s.budgets = alloc::Budgets{20, 20};
  const auto control = run_policy(setup.cohort, PolicyKind::Control, setup.model, s);
  for (auto p : kAllPolicies) {
    const auto run = run_policy(setup.cohort, p, setup.model, s);
    CHECK(run.states == control.states);
    CHECK(run.hours == control.hours);
    CHECK(run.dropouts == control.dropouts);
    if (p != PolicyKind::Control) CHECK(run.allocations[0].arms.size() == 40);
  }
}

TEST_CASE("allocations respect budgets and skip dropped arms") {
  const auto setup = small_setup(1000);
  SimSettings s;
  s.weeks = 10;
  const auto budgets = s.resolved_budgets(1000);
  for (auto p : kAllPolicies) {
    const auto run = run_policy(setup.cohort, p, setup.model, s);
    // Independent replay of the dropout rule over prefix + simulated states.
    std::vector<int> drop_week(1000, -1);
    std::int64_t total_drops = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
      auto series = setup.cohort.histories[i].states();
      for (int w = 0; w < s.weeks && drop_week[i] < 0; ++w) {
        series.push_back(run.states[w][i]);
        const std::vector<double> tail(series.end() - 6, series.end());
        if (apply_dropout_rule(tail)) {
          drop_week[i] = w;
          ++total_drops;
        }
      }
    }
    const auto cum = cumulative_dropouts(run);
    CHECK(cum.back() == total_drops);
    for (int w = 0; w < s.weeks; ++w) {
      const auto& a = run.allocations[w];
      alloc::Allocation full{std::vector<ActionKind>(1000, ActionKind::Passive)};
      for (std::size_t k = 0; k < a.arms.size(); ++k) {
        const auto arm = a.arms[k];
        CHECK((drop_week[arm] < 0 || drop_week[arm] >= w));
        full.actions[arm] = a.actions[k];
      }
      validate_allocation(full, budgets, 1000);
      for (std::size_t i = 0; i < 1000; ++i)
        if (drop_week[i] >= 0 && drop_week[i] < w) CHECK(run.states[w][i] == 0.0);
    }
  }
}

TEST_CASE("simulation is deterministic and serial matches parallel") {
  const auto setup = small_setup(600);
  SimSettings s;
  s.parallel = false;
  const auto a = run_simulation(setup.cohort, {kAllPolicies, kAllPolicies + 4}, setup.model, s);
  s.parallel = true;
  const auto b = run_simulation(setup.cohort, {kAllPolicies, kAllPolicies + 4}, setup.model, s);
  std::ostringstream ja, jb;
  write_report_json(ja, a);
  write_report_json(jb, b);
  CHECK(ja.str() == jb.str());
  for (std::size_t k = 0; k < a.runs.size(); ++k) {
    CHECK(a.runs[k].states == b.runs[k].states);
    CHECK(a.runs[k].allocations.size() == b.runs[k].allocations.size());
    for (std::size_t w = 0; w < a.runs[k].allocations.size(); ++w)
      CHECK(a.runs[k].allocations[w].arms == b.runs[k].allocations[w].arms);
  }

  const auto j = nlohmann::json::parse(ja.str());
  CHECK(j["policies"].size() == 4);
  CHECK(j["budgets"]["asha"] == 6);
  CHECK(j["policies"]["control"]["cumulative_gain_hours"][7] == 0.0);
}

TEST_CASE("stronger ASHA lift raises the index policies' gain") {
  const auto setup = small_setup(1500, 0.01, 3);
  double previous = -1.0;
  for (double lift : {1.05, 1.16, 1.3}) {
    SimSettings s;
    s.lifts.asha = lift;
    s.lifts.call = 1.0;
    const auto report = run_simulation(setup.cohort, {PolicyKind::Ilp, PolicyKind::Control}, setup.model, s);
    const double gain = metric_cumulative_gain(*report.find(PolicyKind::Ilp), *report.find(PolicyKind::Control)).back();
    CHECK(gain > previous);
    previous = gain;
  }
}

TEST_CASE("CSV writers") {
  const auto setup = small_setup(200);
  SimSettings s;
  s.weeks = 3;
  const auto report = run_simulation(setup.cohort, {PolicyKind::Greedy, PolicyKind::Control}, setup.model, s);
  std::ostringstream gain, drops, allocs;
  write_gain_csv(gain, report);
  write_dropouts_csv(drops, report);
  write_allocations_csv(allocs, report.runs[0], setup.cohort.histories);
  CHECK(gain.str().rfind("week,policy,cumulative_gain_hours\n1,greedy,", 0) == 0);
  CHECK(drops.str().find("3,control,0\n") != std::string::npos);
  std::istringstream rows(allocs.str());
  std::string line;
  int n = 0;
  while (std::getline(rows, line)) ++n;
  CHECK(n == 1 + 3 * 4);

  const auto no_control = run_simulation(setup.cohort, {PolicyKind::Ilp}, setup.model, s);
  std::ostringstream sink;
  CHECK_THROWS_AS(write_gain_csv(sink, no_control), ValidationError);
}

TEST_CASE("settings validation") {
  SimSettings s;
  s.weeks = 0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = {};
  s.lifts.call = 0.5;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = {};
  s.budgets = alloc::Budgets{-1, 0};
  CHECK_THROWS_AS(s.validate(), ValidationError);
}
