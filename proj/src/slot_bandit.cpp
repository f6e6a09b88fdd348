#include "chahak/slot_bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

#include "chahak/error.hpp"

namespace chahak::slots {

SlotStats::SlotStats(int n_slots)
    : means(static_cast<std::size_t>(n_slots), 0.0),
      pulls(static_cast<std::size_t>(n_slots), 0),
      successes(static_cast<std::size_t>(n_slots), 0) {
  if (n_slots < 1) throw ValidationError("a slot bandit needs at least one slot");
}

std::string_view to_string(SlotPolicyKind p) noexcept {
  switch (p) {
    case SlotPolicyKind::Ucb:
      return "ucb";
    case SlotPolicyKind::UniformNoUpdate:
      return "uniform_no_update";
    case SlotPolicyKind::UniformUpdate:
      break;
  }
  return "uniform_update";
}

SlotPolicyKind parse_slot_policy(std::string_view s) {
  for (auto p : kAllSlotPolicies)
    if (s == to_string(p)) return p;
  throw ValidationError("unknown slot policy '" + std::string(s) + "'");
}

int ucb_select(const SlotStats& stats) {
  const int S = stats.n_slots();
  int best = -1;
  double best_bound = -std::numeric_limits<double>::infinity();
  const double log_tau = stats.total_pulls > 0 ? std::log(static_cast<double>(stats.total_pulls)) : 0.0;
  for (int j = 0; j < S; ++j) {
    const auto pulls = stats.pulls[j];
    const double bound = pulls == 0 ? std::numeric_limits<double>::infinity()
                                    : stats.means[j] + std::sqrt(2.0 * log_tau / pulls);
    if (best < 0 || bound > best_bound ||
        (bound == best_bound && pulls < stats.pulls[best])) {
      best = j;
      best_bound = bound;
    }
  }
  return best;
}

void update(SlotStats& stats, int slot, bool success) {
  if (slot < 0 || slot >= stats.n_slots()) throw ValidationError("slot index out of range");
  auto& n = stats.pulls[slot];
  ++n;
  ++stats.total_pulls;
  if (success) ++stats.successes[slot];
  stats.means[slot] = static_cast<double>(stats.successes[slot]) / static_cast<double>(n);
}

WeekOutcome run_week(SlotStats& stats, std::span<const double> true_rates, int retries,
                     SlotPolicyKind policy, StreamRng& rng) {
  if (retries < 1) throw ValidationError("retries must be >= 1");
  const int S = stats.n_slots();
  WeekOutcome out;
  while (out.attempts_used < retries) {
    int slot = 0;
    // The uniform draw is consumed for every policy so all three see the same
    // pickup draws on a given stream.
    const auto uniform_slot = static_cast<int>(rng.below(static_cast<std::uint64_t>(S)));
    if (policy == SlotPolicyKind::Ucb)
      slot = ucb_select(stats);
    else
      slot = uniform_slot;
    const bool picked = rng.bernoulli(true_rates[slot]);
    ++out.attempts_used;
    if (policy != SlotPolicyKind::UniformNoUpdate) update(stats, slot, picked);
    if (picked) {
      out.success = true;
      break;
    }
  }
  return out;
}

bool is_converged(const SlotStats& stats, std::span<const double> true_rates, double tolerance) {
  const auto best = static_cast<int>(std::max_element(true_rates.begin(), true_rates.end()) -
                                     true_rates.begin());
  if (stats.pulls[best] == 0) return false;
  return std::abs(stats.means[best] - true_rates[best]) <= tolerance;
}

namespace {

constexpr std::uint64_t kBenchStream = 0x7153;

void run_one(const BeneficiaryGroundTruth& truth, std::size_t beneficiary, int rep,
             SlotPolicyKind policy, const BenchSettings& s, std::int64_t* attempts,
             std::int64_t* converged) {
  const auto& rates = truth.true_pickup_rate_per_slot;
  SlotStats stats(static_cast<int>(rates.size()));
  StreamRng rng(s.seed, kBenchStream, beneficiary, static_cast<std::uint64_t>(rep));
  for (int w = 0; w < s.weeks; ++w) {
    const auto o = run_week(stats, rates, s.retries, policy, rng);
    attempts[w] += o.attempts_used;
    if (is_converged(stats, rates, s.tolerance)) ++converged[w + 1];
  }
}

void check(const BenchSettings& s) {
  if (s.weeks < 1 || s.repetitions < 1 || s.retries < 1)
    throw ValidationError("bench needs weeks, repetitions and retries >= 1");
}

}  // namespace

BenchTotals run_cohort_serial(const std::vector<BeneficiaryGroundTruth>& truth,
                              SlotPolicyKind policy, const BenchSettings& settings) {
  check(settings);
  BenchTotals t;
  t.attempts.assign(settings.weeks, 0);
  t.converged.assign(settings.weeks + 1, 0);
  for (std::size_t i = 0; i < truth.size(); ++i)
    for (int r = 0; r < settings.repetitions; ++r)
      run_one(truth[i], i, r, policy, settings, t.attempts.data(), t.converged.data());
  t.runs = static_cast<std::int64_t>(truth.size()) * settings.repetitions;
  return t;
}

BenchTotals run_cohort_parallel(const std::vector<BeneficiaryGroundTruth>& truth,
                                SlotPolicyKind policy, const BenchSettings& settings) {
  check(settings);
  const int W = settings.weeks;
  BenchTotals t;
  t.attempts.assign(W, 0);
  t.converged.assign(W + 1, 0);
  const auto n = static_cast<std::int64_t>(truth.size());
#pragma omp parallel
  {
    std::vector<std::int64_t> attempts(W, 0), converged(W + 1, 0);
#pragma omp for schedule(dynamic, 16) nowait
    for (std::int64_t i = 0; i < n; ++i)
      for (int r = 0; r < settings.repetitions; ++r)
        run_one(truth[static_cast<std::size_t>(i)], static_cast<std::size_t>(i), r, policy,
                settings, attempts.data(), converged.data());
#pragma omp critical
    {
      for (int w = 0; w < W; ++w) t.attempts[w] += attempts[w];
      for (int w = 0; w <= W; ++w) t.converged[w] += converged[w];
    }
  }
  t.runs = n * settings.repetitions;
  return t;
}

std::vector<double> metric_avg_calls(const BenchTotals& totals) {
  if (totals.runs < 1) throw ValidationError("need at least one run");
  std::vector<double> out;
  out.reserve(totals.attempts.size());
  for (auto a : totals.attempts)
    out.push_back(static_cast<double>(a) / static_cast<double>(totals.runs));
  return out;
}

std::vector<double> metric_convergence_fraction(const BenchTotals& totals) {
  if (totals.runs < 1) throw ValidationError("need at least one run");
  std::vector<double> out;
  out.reserve(totals.converged.size());
  for (auto c : totals.converged)
    out.push_back(static_cast<double>(c) / static_cast<double>(totals.runs));
  return out;
}

int first_week_reaching(const std::vector<double>& convergence, double level) {
  for (std::size_t w = 1; w < convergence.size(); ++w)
    if (convergence[w] >= level) return static_cast<int>(w);
  return -1;
}

}  // namespace chahak::slots
