#include "chahak/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "chahak/error.hpp"

namespace chahak::cli {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"seed", "1", "global seed for every random stream"},
      {"out", "results", "output directory"},

      {"cohort.n_beneficiaries", "4000", "synthetic cohort size"},
      {"cohort.n_slots", "7", "call time slots per day"},
      {"cohort.retries", "9", "call attempts per week"},
      {"cohort.avm_length_s", "120", "seconds of a full voice message"},
      {"cohort.weeks_horizon", "72", "program length in weeks"},
      {"cohort.base_rate_alpha", "0.5", "Beta prior of the non-preferred slot pickup rate"},
      {"cohort.base_rate_beta", "25", ""},
      {"cohort.boost_alpha", "14", "Beta prior of the preferred slot boost"},
      {"cohort.boost_beta", "0.7", ""},
      {"cohort.preferred_boost_scale", "1", "0 makes all slots exchangeable"},
      {"cohort.engagement_alpha", "6", "Beta prior of long-run engagement"},
      {"cohort.engagement_beta", "14", ""},
      {"cohort.persistence_min", "0.70", "AR(1) persistence ~ U(min, max)"},
      {"cohort.persistence_max", "0.95", ""},
      {"cohort.noise_sigma", "0.01", "weekly engagement noise"},
      {"cohort.initial_spread", "0.1", "spread of the first observed state"},
      {"cohort.prefix_weeks", "10", "observed weeks before planning starts"},
      {"cohort.prefix_intervention_rate", "0.1", "historical intervention rate"},
      {"cohort.lift_asha", "1.16", "multiplicative listenership lift of an ASHA visit"},
      {"cohort.lift_call", "1.05", "multiplicative listenership lift of a call"},
      {"cohort.lift_duration_weeks", "1", "weeks a lift stays in force"},

      {"bandit.weeks", "12", "weeks simulated by timeslot-bench"},
      {"bandit.repetitions", "30", "runs per beneficiary"},
      {"bandit.tolerance", "0.15", "convergence tolerance on the best slot mean"},

      {"markov.source", "chain", "chain | cohort | file"},
      {"markov.input", "", "trajectory CSV for source=file"},
      {"markov.chain_order", "3", "order of the synthetic chain"},
      {"markov.chain_sequences", "2000", "synthetic sequences"},
      {"markov.chain_length", "40", "symbols per synthetic sequence"},
      {"markov.chain_concentration", "0.5", "Dirichlet concentration of chain rows"},
      {"markov.alphabet", "3", "equal-width state bins"},
      {"markov.smoothing", "0.001", "additive smoothing of transition counts"},
      {"markov.h_min", "1", ""},
      {"markov.h_max", "8", ""},
      {"markov.averaging", "per_trajectory", "per_trajectory | per_transition"},
      {"markov.evaluation", "held_out", "held_out | in_sample"},
      {"markov.train_ratio", "0.7", "fraction of sequences used for fitting"},

      {"forecast.source", "ar", "ar | cohort | file"},
      {"forecast.input", "", "trajectory CSV for source=file"},
      {"forecast.h", "4", "history length"},
      {"forecast.features", "last_lag", "last_lag | per_lag action indicators"},
      {"forecast.train_ratio", "0.7", ""},
      {"forecast.n_trajectories", "1000", "synthetic AR trajectories"},
      {"forecast.length", "20", "weeks per synthetic AR trajectory"},
      {"forecast.ar_persistence", "0.5", ""},
      {"forecast.ar_intercept", "0.2", ""},
      {"forecast.ar_asha_effect", "0.2", ""},
      {"forecast.ar_call_effect", "0.1", ""},
      {"forecast.ar_noise_sigma", "0.1", ""},
      {"forecast.ar_intervention_rate", "0.2", ""},

      {"tari.theta", "0.25", "listenership threshold of the rollout"},
      {"tari.cap", "40", "rollout horizon; censored weeks report cap + 1"},

      {"allocator.budget_fraction", "0.01", "per-intervention budget as a share of N"},
      {"allocator.k_asha", "-1", "explicit ASHA budget; -1 uses budget_fraction"},
      {"allocator.k_call", "-1", "explicit CALL budget; -1 uses budget_fraction"},
      {"allocator.exclude_nonbeneficial", "false", "skip pairs with m <= 1"},
      {"allocator.greedy_backfill", "true", "greedy refills budget lost to conflicts"},

      {"sim.weeks", "8", "planning horizon"},
      {"sim.policies", "ilp,greedy,random,control", "policies to run"},
      {"sim.dropout_theta", "0.25", ""},
      {"sim.dropout_window", "6", "consecutive low weeks before dropout"},
      {"sim.parallel", "true", "OpenMP per-arm kernels"},

      {"ingest.input", "", "call-log CSV"},
  };
  return keys;
}

std::string config_help() {
  std::ostringstream out;
  out << "Config keys (key = default):\n";
  for (const auto& k : config_keys()) {
    std::string line = "  " + std::string(k.name) + " = " + std::string(k.default_value);
    if (!k.help.empty()) {
      if (line.size() < 44) line.resize(44, ' ');
      line += "  " + std::string(k.help);
    }
    out << line << '\n';
  }
  return out.str();
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& k : config_keys()) values_.emplace(std::string(k.name), std::string(k.default_value));
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("unknown config key '" + std::string(key) + "'");
  it->second = std::string(value);
}

void RunConfig::set_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ValidationError("expected key=value, got '" + std::string(assignment) + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::load(std::istream& in) {
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      set_assignment(t);
    } catch (const ValidationError& e) {
      throw ParseError(row, e.what());
    }
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  load(in);
}

const std::string& RunConfig::get(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("unknown config key '" + std::string(key) + "'");
  return it->second;
}

std::int64_t RunConfig::get_int(std::string_view key) const {
  const auto& v = get(key);
  char* end = nullptr;
  errno = 0;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE)
    throw ValidationError(std::string(key) + ": expected an integer, got '" + v + "'");
  return x;
}

std::uint64_t RunConfig::get_u64(std::string_view key) const {
  const auto& v = get(key);
  char* end = nullptr;
  errno = 0;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || v.front() == '-' || end != v.c_str() + v.size() || errno == ERANGE)
    throw ValidationError(std::string(key) + ": expected a non-negative integer, got '" + v + "'");
  return x;
}

double RunConfig::get_double(std::string_view key) const {
  const auto& v = get(key);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x))
    throw ValidationError(std::string(key) + ": expected a number, got '" + v + "'");
  return x;
}

bool RunConfig::get_bool(std::string_view key) const {
  const auto& v = get(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValidationError(std::string(key) + ": expected true or false, got '" + v + "'");
}

namespace {

int as_int(std::int64_t v, std::string_view key) {
  if (v < INT32_MIN || v > INT32_MAX) throw ValidationError(std::string(key) + " out of range");
  return static_cast<int>(v);
}

}  // namespace

CohortConfig RunConfig::cohort() const {
  CohortConfig c;
  auto i = [&](std::string_view k) { return as_int(get_int(k), k); };
  c.n_beneficiaries = i("cohort.n_beneficiaries");
  c.n_slots = i("cohort.n_slots");
  c.retries = i("cohort.retries");
  c.avm_length_s = get_double("cohort.avm_length_s");
  c.weeks_horizon = i("cohort.weeks_horizon");
  c.seed = seed();
  c.base_rate_alpha = get_double("cohort.base_rate_alpha");
  c.base_rate_beta = get_double("cohort.base_rate_beta");
  c.boost_alpha = get_double("cohort.boost_alpha");
  c.boost_beta = get_double("cohort.boost_beta");
  c.preferred_boost_scale = get_double("cohort.preferred_boost_scale");
  c.engagement_alpha = get_double("cohort.engagement_alpha");
  c.engagement_beta = get_double("cohort.engagement_beta");
  c.persistence_min = get_double("cohort.persistence_min");
  c.persistence_max = get_double("cohort.persistence_max");
  c.noise_sigma = get_double("cohort.noise_sigma");
  c.initial_spread = get_double("cohort.initial_spread");
  c.prefix_weeks = i("cohort.prefix_weeks");
  c.prefix_intervention_rate = get_double("cohort.prefix_intervention_rate");
  c.lifts.asha = get_double("cohort.lift_asha");
  c.lifts.call = get_double("cohort.lift_call");
  c.lifts.duration_weeks = i("cohort.lift_duration_weeks");
  c.validate();
  return c;
}

slots::BenchSettings RunConfig::bench() const {
  slots::BenchSettings b;
  b.weeks = as_int(get_int("bandit.weeks"), "bandit.weeks");
  b.repetitions = as_int(get_int("bandit.repetitions"), "bandit.repetitions");
  b.retries = as_int(get_int("cohort.retries"), "cohort.retries");
  b.tolerance = get_double("bandit.tolerance");
  b.seed = seed();
  if (b.weeks < 1 || b.repetitions < 1) throw ValidationError("bandit.weeks and bandit.repetitions must be >= 1");
  if (!(b.tolerance >= 0.0)) throw ValidationError("bandit.tolerance must be >= 0");
  return b;
}

sim::SimSettings RunConfig::simulation() const {
  sim::SimSettings s;
  s.weeks = as_int(get_int("sim.weeks"), "sim.weeks");
  s.budget_fraction = get_double("allocator.budget_fraction");
  const auto ka = get_int("allocator.k_asha");
  const auto kc = get_int("allocator.k_call");
  if ((ka < 0) != (kc < 0))
    throw ValidationError("allocator.k_asha and allocator.k_call must both be set or both be -1");
  if (ka >= 0) s.budgets = alloc::Budgets{ka, kc};
  s.tari.theta = get_double("tari.theta");
  s.tari.cap = as_int(get_int("tari.cap"), "tari.cap");
  s.allocator.exclude_nonbeneficial = get_bool("allocator.exclude_nonbeneficial");
  s.allocator.greedy_backfill = get_bool("allocator.greedy_backfill");
  s.dropout_theta = get_double("sim.dropout_theta");
  s.dropout_window = as_int(get_int("sim.dropout_window"), "sim.dropout_window");
  s.avm_length_s = get_double("cohort.avm_length_s");
  s.lifts.asha = get_double("cohort.lift_asha");
  s.lifts.call = get_double("cohort.lift_call");
  s.lifts.duration_weeks = as_int(get_int("cohort.lift_duration_weeks"), "cohort.lift_duration_weeks");
  s.seed = seed();
  s.parallel = get_bool("sim.parallel");
  s.validate();
  return s;
}

std::vector<sim::PolicyKind> RunConfig::policies() const {
  return sim::parse_policy_list(get("sim.policies"));
}

void RunConfig::write(std::ostream& out) const {
  for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
}

}  // namespace chahak::cli
