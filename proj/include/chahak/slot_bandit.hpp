#pragma once

// Per-beneficiary UCB time-slot learner under a weekly retry budget, the two
// uniform baselines, and the weekly timing metrics.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "chahak/cohort.hpp"
#include "chahak/random.hpp"

namespace chahak::slots {

// Sufficient statistics of one beneficiary's slot bandit. `successes` is kept
// as an integer count so the running mean is exact.
struct SlotStats {
  std::vector<double> means;
  std::vector<std::int64_t> pulls;
  std::vector<std::int64_t> successes;
  std::int64_t total_pulls = 0;

  explicit SlotStats(int n_slots = 7);
  int n_slots() const noexcept { return static_cast<int>(means.size()); }
};

enum class SlotPolicyKind : std::uint8_t { Ucb, UniformNoUpdate, UniformUpdate };

inline constexpr SlotPolicyKind kAllSlotPolicies[] = {
    SlotPolicyKind::Ucb, SlotPolicyKind::UniformNoUpdate, SlotPolicyKind::UniformUpdate};

std::string_view to_string(SlotPolicyKind p) noexcept;
SlotPolicyKind parse_slot_policy(std::string_view s);

// argmax_j mean_j + sqrt(2 ln tau / pulls_j). Untried slots come first; ties go
// to fewer pulls, then to the lower slot index.
int ucb_select(const SlotStats& stats);

void update(SlotStats& stats, int slot, bool success);

struct WeekOutcome {
  int attempts_used = 0;
  bool success = false;
};

// Up to `retries` attempts until one is answered.
WeekOutcome run_week(SlotStats& stats, std::span<const double> true_rates, int retries,
                     SlotPolicyKind policy, StreamRng& rng);

// |mean of the true-best slot - its true rate| <= tolerance, with at least one
// pull on that slot. Best slot: argmax of true rates, lowest index on ties.
bool is_converged(const SlotStats& stats, std::span<const double> true_rates,
                  double tolerance = 0.15);

// Per-week totals of one policy over beneficiaries x repetitions. Index 0 of
// `converged` is the fresh state before week 1.
struct BenchTotals {
  std::vector<std::int64_t> attempts;   // [weeks]
  std::vector<std::int64_t> converged;  // [weeks + 1]
  std::int64_t runs = 0;                // beneficiaries x repetitions
};

struct BenchSettings {
  int weeks = 12;
  int repetitions = 30;
  int retries = 9;
  double tolerance = 0.15;
  std::uint64_t seed = 1;
};

// Serial reference and OpenMP version. Each (beneficiary, repetition) run draws
// from its own stream, shared by all policies, so both versions agree exactly.
BenchTotals run_cohort_serial(const std::vector<BeneficiaryGroundTruth>& truth,
                              SlotPolicyKind policy, const BenchSettings& settings);
BenchTotals run_cohort_parallel(const std::vector<BeneficiaryGroundTruth>& truth,
                                SlotPolicyKind policy, const BenchSettings& settings);

// Mean attempts per week.
std::vector<double> metric_avg_calls(const BenchTotals& totals);
// Fraction converged, weeks 0..W.
std::vector<double> metric_convergence_fraction(const BenchTotals& totals);

// First week (>= 1) at which the converged fraction reaches `level`, or -1.
int first_week_reaching(const std::vector<double>& convergence, double level);

}  // namespace chahak::slots
