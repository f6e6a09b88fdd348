#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "chahak/cohort.hpp"
#include "chahak/error.hpp"
#include "chahak/random.hpp"
#include "chahak/slot_bandit.hpp"

using namespace chahak;

namespace {

const char* kHeader = "beneficiary_id,week,attempt_index,slot,picked_up,seconds_listened,intervention\n";

CallLogs parse(const std::string& body) {
  std::istringstream in(std::string(kHeader) + body);
  return read_call_logs(in);
}

std::size_t error_row(const std::string& text) {
  std::istringstream in(text);
  try {
    read_call_logs(in);
  } catch (const ParseError& e) {
    return e.row();
  }
  return 0;
}

}  // namespace

TEST_CASE("normalize_listenership examples") {
  CHECK(normalize_listenership(60, 120) == 0.5);
  CHECK(normalize_listenership(300, 120) == 1.0);
  CHECK(normalize_listenership(0, 120) == 0.0);
  CHECK_THROWS_AS(normalize_listenership(-1, 120), ValidationError);
  CHECK_THROWS_AS(normalize_listenership(10, 0), ValidationError);
}

TEST_CASE("estimate_pickup_rates examples") {
  std::vector<CallAttemptRecord> attempts;
  for (int i = 0; i < 10; ++i) {
    CallAttemptRecord r;
    r.slot = 2;
    r.picked_up = i < 3;
    attempts.push_back(r);
  }
  for (int i = 0; i < 4; ++i) {
    CallAttemptRecord r;
    r.slot = 5;
    r.picked_up = true;
    attempts.push_back(r);
  }
  const auto rates = estimate_pickup_rates(attempts, 7);
  REQUIRE(rates.size() == 7);
  CHECK(*rates[2] == doctest::Approx(0.3));
  CHECK(*rates[5] == 1.0);
  CHECK_FALSE(rates[0].has_value());

  attempts.back().slot = 7;
  CHECK_THROWS_AS(estimate_pickup_rates(attempts, 7), ValidationError);
}

TEST_CASE("estimate_pickup_rates matches a brute-force recount") {
  StreamRng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const int S = 1 + static_cast<int>(rng.below(9));
    std::vector<CallAttemptRecord> attempts(rng.below(60));
    for (auto& a : attempts) {
      a.slot = static_cast<int>(rng.below(S));
      a.picked_up = rng.bernoulli(0.4);
    }
    const auto rates = estimate_pickup_rates(attempts, S);
    for (int j = 0; j < S; ++j) {
      int made = 0, picked = 0;
      for (const auto& a : attempts)
        if (a.slot == j) {
          ++made;
          picked += a.picked_up;
        }
      if (made == 0) {
        CHECK_FALSE(rates[j].has_value());
      } else {
        REQUIRE(rates[j].has_value());
        CHECK(*rates[j] == static_cast<double>(picked) / made);
      }
    }
  }
}

TEST_CASE("read_call_logs: two well-formed rows") {
  const auto logs = parse("B1,1,1,3,0,0,NONE\nB1,1,2,4,1,60,NONE\n");
  CHECK(logs.trajectories.size() == 1);
  CHECK(logs.attempts.size() == 2);
  REQUIRE(logs.trajectories[0].weeks.size() == 1);
  CHECK(logs.trajectories[0].weeks[0].state == 0.5);
}

TEST_CASE("read_call_logs: header only gives an empty cohort") {
  const auto logs = parse("");
  CHECK(logs.trajectories.empty());
  CHECK(logs.attempts.empty());
}

TEST_CASE("read_call_logs rejects bad rows with their row number") {
  const std::string h = kHeader;
  CHECK(error_row(h + "B1,1,1,3,0,0,NONE\nB1,1,2,3,0,15,NONE\n") == 3);
  CHECK(error_row("beneficiary_id,week\nB1,1\n") == 1);
  CHECK(error_row("") == 1);
  CHECK(error_row(h + "B1,x,1,3,0,0,NONE\n") == 2);
  CHECK(error_row(h + "B1,1,10,3,0,0,NONE\n") == 2);
  CHECK(error_row(h + "B1,1,1,7,0,0,NONE\n") == 2);
  CHECK(error_row(h + "B1,1,1,3,2,0,NONE\n") == 2);
  CHECK(error_row(h + "B1,1,1,3,1,5\n") == 2);
  CHECK(error_row(h + "B1,1,1,3,1,5,SMS\n") == 2);
  CHECK(error_row(h + "B1,1,1,3,1,5,ASHA\nB1,1,2,3,1,5,CALL\n") == 3);
}

TEST_CASE("read_call_logs sums a week and fills missing weeks") {
  const auto logs = parse(
      "B2,3,1,0,1,30,CALL\n"
      "B1,2,1,0,1,100,NONE\n"
      "B1,2,2,1,1,100,ASHA\n");
  REQUIRE(logs.trajectories.size() == 2);
  const auto& b1 = logs.trajectories[0];
  CHECK(b1.beneficiary_id == "B1");
  REQUIRE(b1.weeks.size() == 2);
  CHECK(b1.weeks[0].state == 0.0);
  CHECK(b1.weeks[0].action == ActionKind::Passive);
  CHECK(b1.weeks[1].state == 1.0);
  CHECK(b1.weeks[1].raw_seconds == 200.0);
  CHECK(b1.weeks[1].action == ActionKind::AshaVisit);
  const auto& b2 = logs.trajectories[1];
  REQUIRE(b2.weeks.size() == 3);
  CHECK(b2.weeks[2].state == 0.25);
  CHECK(b2.weeks[2].action == ActionKind::CallReminder);
}

TEST_CASE("call log and trajectory CSVs round-trip losslessly") {
  StreamRng rng(5);
  std::vector<CallAttemptRecord> attempts;
  for (int b = 0; b < 20; ++b)
    for (int w = 1; w <= 4; ++w)
      for (int a = 1; a <= 1 + static_cast<int>(rng.below(9)); ++a) {
        CallAttemptRecord r;
        r.beneficiary_id = format_beneficiary_id(b);
        r.week = w;
        r.attempt_index = a;
        r.slot = static_cast<int>(rng.below(7));
        r.picked_up = rng.bernoulli(0.5);
        r.seconds_listened = r.picked_up ? rng.uniform() * 70.0 : 0.0;
        r.intervention = ActionKind::Passive;
        attempts.push_back(r);
      }
  std::ostringstream out;
  write_call_logs(out, attempts);
  std::istringstream in(out.str());
  const auto logs = read_call_logs(in);
  REQUIRE(logs.attempts.size() == attempts.size());
  for (std::size_t i = 0; i < attempts.size(); ++i) {
    const auto& x = attempts[i];
    const auto& y = logs.attempts[i];
    CHECK(x.beneficiary_id == y.beneficiary_id);
    CHECK(x.week == y.week);
    CHECK(x.attempt_index == y.attempt_index);
    CHECK(x.slot == y.slot);
    CHECK(x.picked_up == y.picked_up);
    CHECK(x.seconds_listened == y.seconds_listened);
    CHECK(x.intervention == y.intervention);
  }
  for (const auto& t : logs.trajectories)
    for (const auto& e : t.weeks) CHECK((e.state >= 0.0 && e.state <= 1.0));

  auto trajectories = generate_synthetic_cohort([] {
                        CohortConfig c;
                        c.n_beneficiaries = 30;
                        return c;
                      }())
                          .histories;
  trajectories[3].dropped_at_week = static_cast<int>(trajectories[3].weeks.size());
  std::ostringstream tout;
  write_trajectories(tout, trajectories);
  std::istringstream tin(tout.str());
  const auto back = read_trajectories(tin);
  REQUIRE(back.size() == trajectories.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].beneficiary_id == trajectories[i].beneficiary_id);
    CHECK(back[i].dropped_at_week == trajectories[i].dropped_at_week);
    REQUIRE(back[i].weeks.size() == trajectories[i].weeks.size());
    for (std::size_t w = 0; w < back[i].weeks.size(); ++w) {
      CHECK(back[i].weeks[w].state == trajectories[i].weeks[w].state);
      CHECK(back[i].weeks[w].action == trajectories[i].weeks[w].action);
      CHECK(back[i].weeks[w].raw_seconds == trajectories[i].weeks[w].raw_seconds);
    }
  }
}

TEST_CASE("synthetic cohort is deterministic in its config") {
  CohortConfig c;
  c.n_beneficiaries = 200;
  const auto a = generate_synthetic_cohort(c);
  const auto b = generate_synthetic_cohort(c);
  for (std::size_t i = 0; i < a.truth.size(); ++i) {
    CHECK(a.truth[i].true_pickup_rate_per_slot == b.truth[i].true_pickup_rate_per_slot);
    CHECK(a.truth[i].engagement_mean == b.truth[i].engagement_mean);
    CHECK(a.histories[i].states() == b.histories[i].states());
  }
  c.seed = 2;
  const auto d = generate_synthetic_cohort(c);
  CHECK(d.truth[0].true_pickup_rate_per_slot != a.truth[0].true_pickup_rate_per_slot);

  for (const auto& h : a.histories) {
    CHECK(static_cast<int>(h.weeks.size()) == c.prefix_weeks);
    for (const auto& e : h.weeks) CHECK((e.state >= 0.0 && e.state <= 1.0));
  }
}

TEST_CASE("synthetic cohort: preferred slot is uniform and boost 0 makes slots exchangeable") {
  CohortConfig c;
  c.n_beneficiaries = 7000;
  const auto cohort = generate_synthetic_cohort(c);
  std::vector<double> counts(7, 0.0);
  for (const auto& t : cohort.truth) {
    const auto& r = t.true_pickup_rate_per_slot;
    ++counts[std::max_element(r.begin(), r.end()) - r.begin()];
  }
  // Chi-square with 6 degrees of freedom; 22.46 is the 0.999 quantile.
  double chi2 = 0.0;
  for (double k : counts) chi2 += (k - 1000.0) * (k - 1000.0) / 1000.0;
  CHECK(chi2 < 22.46);

  c.preferred_boost_scale = 0.0;
  c.n_beneficiaries = 500;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    c.seed = seed;
    for (const auto& t : generate_synthetic_cohort(c).truth) {
      const auto& r = t.true_pickup_rate_per_slot;
      CHECK(std::count(r.begin(), r.end(), r[0]) == 7);
    }
  }
}

TEST_CASE("default cohort leaves about 23% unreached under random retries") {
  CohortConfig c;
  const auto cohort = generate_synthetic_cohort(c);
  const double expected = expected_unreached_fraction(cohort.truth, c.retries);
  CHECK(std::abs(expected - 0.23) <= 0.05);

  // Monte Carlo oracle: one week of uniform no-update retries per beneficiary.
  int unreached = 0;
  for (std::size_t i = 0; i < cohort.truth.size(); ++i) {
    slots::SlotStats stats(c.n_slots);
    StreamRng rng(11, i);
    const auto week = slots::run_week(stats, cohort.truth[i].true_pickup_rate_per_slot, c.retries,
                                      slots::SlotPolicyKind::UniformNoUpdate, rng);
    unreached += !week.success;
  }
  const double observed = static_cast<double>(unreached) / static_cast<double>(cohort.truth.size());
  CHECK(std::abs(observed - expected) < 0.03);
}

TEST_CASE("train_test_split examples") {
  std::vector<Trajectory> ts(10);
  for (std::size_t i = 0; i < ts.size(); ++i) ts[i].beneficiary_id = format_beneficiary_id(i);
  const auto [train, test] = train_test_split(ts, 0.7, 3);
  CHECK(train.size() == 7);
  CHECK(test.size() == 3);
  std::set<std::string> ids;
  for (const auto& t : train) ids.insert(t.beneficiary_id);
  for (const auto& t : test) ids.insert(t.beneficiary_id);
  CHECK(ids.size() == 10);

  const auto [train2, test2] = train_test_split(ts, 0.7, 3);
  for (std::size_t i = 0; i < train.size(); ++i) CHECK(train[i].beneficiary_id == train2[i].beneficiary_id);

  std::vector<Trajectory> one(1);
  const auto [a, b] = train_test_split(one, 0.5, 1);
  CHECK(a.size() == 0);
  CHECK(b.size() == 1);
  CHECK_THROWS_AS(train_test_split(ts, 1.0, 1), ValidationError);
  CHECK_THROWS_AS(train_test_split(ts, 0.0, 1), ValidationError);
}

TEST_CASE("active_lift picks the most recent intervention inside the duration") {
  LiftParams lifts;
  const std::vector<ActionKind> none{ActionKind::Passive};
  const std::vector<ActionKind> asha{ActionKind::Passive, ActionKind::AshaVisit};
  const std::vector<ActionKind> old{ActionKind::AshaVisit, ActionKind::Passive};
  CHECK(active_lift(none, lifts) == 1.0);
  CHECK(active_lift(asha, lifts) == 1.16);
  CHECK(active_lift(old, lifts) == 1.0);
  lifts.duration_weeks = 2;
  CHECK(active_lift(old, lifts) == 1.16);
}

TEST_CASE("cohort config validation") {
  CohortConfig c;
  c.n_slots = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.lifts.asha = 0.9;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.persistence_max = 1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CHECK_NOTHROW(CohortConfig{}.validate());
}
