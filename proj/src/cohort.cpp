#include "chahak/cohort.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "chahak/error.hpp"
#include "chahak/random.hpp"

namespace chahak {

std::string_view to_string(ActionKind a) noexcept {
  switch (a) {
    case ActionKind::AshaVisit:
      return "ASHA";
    case ActionKind::CallReminder:
      return "CALL";
    case ActionKind::Passive:
      break;
  }
  return "NONE";
}

ActionKind parse_action(std::string_view s) {
  if (s == "ASHA") return ActionKind::AshaVisit;
  if (s == "CALL") return ActionKind::CallReminder;
  if (s == "NONE" || s == "PASSIVE") return ActionKind::Passive;
  throw ValidationError("unknown intervention '" + std::string(s) + "'");
}

std::vector<double> Trajectory::states() const {
  std::vector<double> out;
  out.reserve(weeks.size());
  for (const auto& w : weeks) out.push_back(w.state);
  return out;
}

double LiftParams::of(ActionKind a) const noexcept {
  switch (a) {
    case ActionKind::AshaVisit:
      return asha;
    case ActionKind::CallReminder:
      return call;
    case ActionKind::Passive:
      break;
  }
  return 1.0;
}

void CohortConfig::validate() const {
  auto fail = [](const std::string& m) { throw ValidationError("cohort config: " + m); };
  if (n_beneficiaries < 0) fail("n_beneficiaries must be >= 0");
  if (n_slots < 1) fail("n_slots must be >= 1");
  if (retries < 1) fail("retries must be >= 1");
  if (!(avm_length_s > 0.0)) fail("avm_length_s must be > 0");
  if (weeks_horizon < 1) fail("weeks_horizon must be >= 1");
  if (base_rate_alpha <= 0 || base_rate_beta <= 0 || boost_alpha <= 0 || boost_beta <= 0)
    fail("beta prior parameters must be > 0");
  if (preferred_boost_scale < 0.0 || preferred_boost_scale > 1.0)
    fail("preferred_boost_scale must be in [0, 1]");
  if (engagement_alpha <= 0 || engagement_beta <= 0)
    fail("engagement prior parameters must be > 0");
  if (persistence_min < 0.0 || persistence_max >= 1.0 || persistence_min > persistence_max)
    fail("persistence range must satisfy 0 <= min <= max < 1");
  if (noise_sigma < 0.0 || initial_spread < 0.0) fail("noise parameters must be >= 0");
  if (prefix_weeks < 1) fail("prefix_weeks must be >= 1");
  if (prefix_intervention_rate < 0.0 || prefix_intervention_rate > 1.0)
    fail("prefix_intervention_rate must be in [0, 1]");
  if (lifts.asha < 1.0 || lifts.call < 1.0) fail("lifts must be >= 1");
  if (lifts.duration_weeks < 1) fail("lift duration must be >= 1");
}

double normalize_listenership(double seconds, double avm_length_s) {
  if (!(avm_length_s > 0.0)) throw ValidationError("avm_length_s must be > 0");
  if (seconds < 0.0 || std::isnan(seconds))
    throw ValidationError("seconds listened must be non-negative");
  return std::min(seconds / avm_length_s, 1.0);
}

std::vector<std::optional<double>> estimate_pickup_rates(
    const std::vector<CallAttemptRecord>& attempts, int n_slots) {
  if (n_slots < 1) throw ValidationError("n_slots must be >= 1");
  std::vector<long> made(n_slots, 0), picked(n_slots, 0);
  for (const auto& a : attempts) {
    if (a.slot < 0 || a.slot >= n_slots)
      throw ValidationError("slot index " + std::to_string(a.slot) + " out of range");
    ++made[a.slot];
    if (a.picked_up) ++picked[a.slot];
  }
  std::vector<std::optional<double>> rates(n_slots);
  for (int j = 0; j < n_slots; ++j)
    if (made[j] > 0) rates[j] = static_cast<double>(picked[j]) / static_cast<double>(made[j]);
  return rates;
}

namespace {

constexpr std::string_view kCallLogHeader =
    "beneficiary_id,week,attempt_index,slot,picked_up,seconds_listened,intervention";
constexpr std::string_view kTrajectoryHeader =
    "beneficiary_id,week,state,action,raw_seconds,dropped";

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view s, std::size_t row, const char* field) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
    throw ParseError(row, std::string("non-numeric ") + field + " '" + std::string(s) + "'");
  return v;
}

double parse_double(std::string_view s, std::size_t row, const char* field) {
  // std::from_chars for double is not available in libstdc++ 11 for all targets.
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size() || !std::isfinite(v))
    throw ParseError(row, std::string("non-numeric ") + field + " '" + tmp + "'");
  return v;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

CallLogs read_call_logs(std::istream& in, int retries, int n_slots, double avm_length_s) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kCallLogHeader)
    throw ParseError(1, "missing or malformed header; expected '" + std::string(kCallLogHeader) +
                            "'");
  CallLogs logs;
  struct WeekAgg {
    double seconds = 0.0;
    ActionKind action = ActionKind::Passive;
  };
  std::map<BeneficiaryId, std::map<int, WeekAgg>> weeks;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const auto text = strip_cr(line);
    if (text.empty()) continue;
    const auto f = split_commas(text);
    if (f.size() != 7) throw ParseError(row, "expected 7 fields, got " + std::to_string(f.size()));
    CallAttemptRecord r;
    r.beneficiary_id = std::string(f[0]);
    if (r.beneficiary_id.empty()) throw ParseError(row, "empty beneficiary_id");
    r.week = parse_int(f[1], row, "week");
    r.attempt_index = parse_int(f[2], row, "attempt_index");
    r.slot = parse_int(f[3], row, "slot");
    const int picked = parse_int(f[4], row, "picked_up");
    r.seconds_listened = parse_double(f[5], row, "seconds_listened");
    if (r.week < 1) throw ParseError(row, "week must be >= 1");
    if (r.attempt_index < 1 || r.attempt_index > retries)
      throw ParseError(row, "attempt_index " + std::to_string(r.attempt_index) +
                                " outside [1, " + std::to_string(retries) + "]");
    if (r.slot < 0 || r.slot >= n_slots)
      throw ParseError(row, "slot " + std::to_string(r.slot) + " outside [0, " +
                                std::to_string(n_slots - 1) + "]");
    if (picked != 0 && picked != 1) throw ParseError(row, "picked_up must be 0 or 1");
    r.picked_up = picked == 1;
    if (r.seconds_listened < 0.0) throw ParseError(row, "negative seconds_listened");
    if (r.seconds_listened > 0.0 && !r.picked_up)
      throw ParseError(row, "seconds_listened > 0 on an unanswered call");
    try {
      r.intervention = parse_action(f[6]);
    } catch (const ValidationError& e) {
      throw ParseError(row, e.what());
    }
    auto& agg = weeks[r.beneficiary_id][r.week];
    agg.seconds += r.seconds_listened;
    if (r.intervention != ActionKind::Passive) {
      if (agg.action != ActionKind::Passive && agg.action != r.intervention)
        throw ParseError(row, "conflicting interventions within one week");
      agg.action = r.intervention;
    }
    logs.attempts.push_back(std::move(r));
  }
  for (auto& [id, per_week] : weeks) {
    Trajectory t;
    t.beneficiary_id = id;
    const int last = per_week.rbegin()->first;
    t.weeks.resize(last);
    for (const auto& [w, agg] : per_week) {
      auto& e = t.weeks[w - 1];
      e.raw_seconds = agg.seconds;
      e.state = normalize_listenership(agg.seconds, avm_length_s);
      e.action = agg.action;
    }
    logs.trajectories.push_back(std::move(t));
  }
  return logs;
}

CallLogs load_call_logs(const std::string& path, int retries, int n_slots, double avm_length_s) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open call log '" + path + "'");
  return read_call_logs(in, retries, n_slots, avm_length_s);
}

void write_call_logs(std::ostream& out, const std::vector<CallAttemptRecord>& attempts) {
  out << kCallLogHeader << '\n';
  for (const auto& a : attempts) {
    out << a.beneficiary_id << ',' << a.week << ',' << a.attempt_index << ',' << a.slot << ','
        << (a.picked_up ? 1 : 0) << ',' << format_double(a.seconds_listened) << ','
        << to_string(a.intervention) << '\n';
  }
}

void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajectories) {
  out << kTrajectoryHeader << '\n';
  for (const auto& t : trajectories) {
    for (std::size_t i = 0; i < t.weeks.size(); ++i) {
      const auto& e = t.weeks[i];
      const int week = static_cast<int>(i) + 1;
      out << t.beneficiary_id << ',' << week << ',' << format_double(e.state) << ','
          << to_string(e.action) << ',' << format_double(e.raw_seconds) << ','
          << (t.dropped_at_week == week ? 1 : 0) << '\n';
    }
  }
}

std::vector<Trajectory> read_trajectories(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kTrajectoryHeader)
    throw ParseError(1, "missing or malformed trajectory header");
  std::vector<Trajectory> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const auto text = strip_cr(line);
    if (text.empty()) continue;
    const auto f = split_commas(text);
    if (f.size() != 6) throw ParseError(row, "expected 6 fields");
    const std::string id(f[0]);
    if (out.empty() || out.back().beneficiary_id != id) {
      out.push_back({});
      out.back().beneficiary_id = id;
    }
    auto& t = out.back();
    const int week = parse_int(f[1], row, "week");
    if (week != static_cast<int>(t.weeks.size()) + 1)
      throw ParseError(row, "weeks must be consecutive starting at 1");
    if (t.dropped_at_week) throw ParseError(row, "entry after drop week");
    WeekEntry e;
    e.state = parse_double(f[2], row, "state");
    if (e.state < 0.0 || e.state > 1.0) throw ParseError(row, "state outside [0, 1]");
    try {
      e.action = parse_action(f[3]);
    } catch (const ValidationError& err) {
      throw ParseError(row, err.what());
    }
    e.raw_seconds = parse_double(f[4], row, "raw_seconds");
    const int dropped = parse_int(f[5], row, "dropped");
    t.weeks.push_back(e);
    if (dropped == 1) t.dropped_at_week = week;
  }
  return out;
}

double active_lift(std::span<const ActionKind> actions, const LiftParams& lifts) noexcept {
  const auto n = static_cast<int>(actions.size());
  for (int back = 0; back < lifts.duration_weeks && back < n; ++back) {
    const ActionKind a = actions[static_cast<std::size_t>(n - 1 - back)];
    if (a != ActionKind::Passive) return lifts.of(a);
  }
  return 1.0;
}

double engagement_step(double state, const BeneficiaryGroundTruth& truth, double lift,
                       double z) noexcept {
  const double pre = truth.persistence * state +
                     (1.0 - truth.persistence) * truth.engagement_mean + truth.noise_sigma * z;
  return std::clamp(pre * lift, 0.0, 1.0);
}

std::string format_beneficiary_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "B%06zu", index);
  return buf;
}

namespace {

// Stream tags keep the generator's draws disjoint from other consumers of the
// same seed.
constexpr std::uint64_t kSlotStream = 0x51;
constexpr std::uint64_t kEngagementStream = 0x52;

}  // namespace

SyntheticCohort generate_synthetic_cohort(const CohortConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.n_beneficiaries);
  const int S = config.n_slots;
  SyntheticCohort cohort;
  cohort.truth.resize(n);
  cohort.histories.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& truth = cohort.truth[i];

    StreamRng slot_rng(config.seed, kSlotStream, i);
    const double base = slot_rng.beta(config.base_rate_alpha, config.base_rate_beta);
    const auto preferred = static_cast<int>(slot_rng.below(static_cast<std::uint64_t>(S)));
    const double boost =
        config.preferred_boost_scale * slot_rng.beta(config.boost_alpha, config.boost_beta);
    truth.true_pickup_rate_per_slot.assign(S, base);
    truth.true_pickup_rate_per_slot[preferred] = base + (1.0 - base) * boost;

    StreamRng eng_rng(config.seed, kEngagementStream, i);
    truth.engagement_mean = eng_rng.beta(config.engagement_alpha, config.engagement_beta);
    truth.persistence = config.persistence_min +
                        (config.persistence_max - config.persistence_min) * eng_rng.uniform();
    truth.noise_sigma = config.noise_sigma;

    auto& hist = cohort.histories[i];
    hist.beneficiary_id = format_beneficiary_id(i);
    hist.weeks.reserve(config.prefix_weeks);
    double state =
        std::clamp(truth.engagement_mean + config.initial_spread * eng_rng.normal(), 0.0, 1.0);
    hist.weeks.push_back({state, ActionKind::Passive, state * config.avm_length_s});
    std::vector<ActionKind> actions{ActionKind::Passive};
    for (int w = 1; w < config.prefix_weeks; ++w) {
      const double u = eng_rng.uniform();
      ActionKind a = ActionKind::Passive;
      if (u < 0.5 * config.prefix_intervention_rate)
        a = ActionKind::AshaVisit;
      else if (u < config.prefix_intervention_rate)
        a = ActionKind::CallReminder;
      actions.push_back(a);
      const double lift = active_lift(actions, config.lifts);
      state = engagement_step(state, truth, lift, eng_rng.normal());
      hist.weeks.push_back({state, a, state * config.avm_length_s});
    }
  }
  return cohort;
}

double expected_unreached_fraction(const std::vector<BeneficiaryGroundTruth>& truth, int retries) {
  if (truth.empty()) return 0.0;
  double total = 0.0;
  for (const auto& t : truth) {
    const auto& r = t.true_pickup_rate_per_slot;
    const double mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
    total += std::pow(1.0 - mean, retries);
  }
  return total / static_cast<double>(truth.size());
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> train_test_split_indices(
    std::size_t n, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("split ratio must be in (0, 1)");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  StreamRng rng(seed, 0x5917);
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
  const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
  std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

std::pair<std::vector<Trajectory>, std::vector<Trajectory>> train_test_split(
    const std::vector<Trajectory>& trajectories, double ratio, std::uint64_t seed) {
  const auto [train_idx, test_idx] = train_test_split_indices(trajectories.size(), ratio, seed);
  std::vector<Trajectory> train, test;
  train.reserve(train_idx.size());
  test.reserve(test_idx.size());
  for (auto i : train_idx) train.push_back(trajectories[i]);
  for (auto i : test_idx) test.push_back(trajectories[i]);
  return {std::move(train), std::move(test)};
}

}  // namespace chahak
