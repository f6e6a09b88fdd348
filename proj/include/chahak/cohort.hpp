#pragma once

// Beneficiary data model: actions, call attempts, weekly trajectories, the
// synthetic ground truth used by experiments, and call-log CSV ingestion.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chahak {

enum class ActionKind : std::uint8_t { Passive = 0, AshaVisit = 1, CallReminder = 2 };

inline constexpr ActionKind kInterventions[] = {ActionKind::AshaVisit,
                                                ActionKind::CallReminder};

// CSV / CLI spelling: ASHA, CALL, NONE.
std::string_view to_string(ActionKind a) noexcept;
ActionKind parse_action(std::string_view s);

using BeneficiaryId = std::string;

struct CallAttemptRecord {
  BeneficiaryId beneficiary_id;
  int week = 1;           // >= 1
  int attempt_index = 1;  // in [1, R]
  int slot = 0;           // in [0, S-1]
  bool picked_up = false;
  double seconds_listened = 0.0;
  ActionKind intervention = ActionKind::Passive;
};

struct WeekEntry {
  double state = 0.0;  // normalized listenership in [0, 1]
  ActionKind action = ActionKind::Passive;  // intervention delivered this week
  double raw_seconds = 0.0;
};

// weeks[i] is week i + 1.
struct Trajectory {
  BeneficiaryId beneficiary_id;
  std::vector<WeekEntry> weeks;
  std::optional<int> dropped_at_week;

  std::vector<double> states() const;
};

// Multiplicative one-off listenership lifts of the two interventions.
struct LiftParams {
  double asha = 1.16;
  double call = 1.05;
  int duration_weeks = 1;

  double of(ActionKind a) const noexcept;
};

struct BeneficiaryGroundTruth {
  std::vector<double> true_pickup_rate_per_slot;
  double engagement_mean = 0.3;  // long-run listenership level
  double persistence = 0.8;      // AR(1) coefficient, in [0, 1)
  double noise_sigma = 0.01;
};

struct CohortConfig {
  int n_beneficiaries = 4000;
  int n_slots = 7;
  int retries = 9;
  double avm_length_s = 120.0;
  int weeks_horizon = 72;
  std::uint64_t seed = 1;

  // Pickup rates: every slot shares a per-beneficiary base rate ~ Beta; one
  // uniformly chosen preferred slot is raised to base + (1 - base) * boost,
  // boost ~ preferred_boost_scale * Beta.
  double base_rate_alpha = 0.5;
  double base_rate_beta = 25.0;
  double boost_alpha = 14.0;
  double boost_beta = 0.7;
  double preferred_boost_scale = 1.0;

  // Engagement dynamics.
  double engagement_alpha = 6.0;  // engagement_mean ~ Beta(alpha, beta)
  double engagement_beta = 14.0;
  double persistence_min = 0.70;  // persistence ~ U(min, max)
  double persistence_max = 0.95;
  double noise_sigma = 0.01;
  double initial_spread = 0.1;  // week-1 state = mean + spread * N(0,1), clipped
  int prefix_weeks = 10;
  double prefix_intervention_rate = 0.1;  // split evenly between ASHA and CALL
  LiftParams lifts;

  void validate() const;
};

struct SyntheticCohort {
  std::vector<BeneficiaryGroundTruth> truth;
  std::vector<Trajectory> histories;  // prefix_weeks observed weeks each
};

double normalize_listenership(double seconds, double avm_length_s);

// Per-slot pickup ratio; nullopt for slots with no attempts.
std::vector<std::optional<double>> estimate_pickup_rates(
    const std::vector<CallAttemptRecord>& attempts, int n_slots);

struct CallLogs {
  std::vector<Trajectory> trajectories;
  std::vector<CallAttemptRecord> attempts;
};

// Weekly states are summed seconds over the week's attempts, normalized by the
// AVM length. Weeks without rows are filled with zero-listenership passive
// weeks so each trajectory covers weeks 1..max_week.
CallLogs read_call_logs(std::istream& in, int retries = 9, int n_slots = 7,
                        double avm_length_s = 120.0);
CallLogs load_call_logs(const std::string& path, int retries = 9, int n_slots = 7,
                        double avm_length_s = 120.0);
void write_call_logs(std::ostream& out, const std::vector<CallAttemptRecord>& attempts);

// Trajectory store: beneficiary_id,week,state,action,raw_seconds,dropped
void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajectories);
std::vector<Trajectory> read_trajectories(std::istream& in);

// Lift in force for the last week of `actions` (most recent intervention within
// the lift duration), or 1.
double active_lift(std::span<const ActionKind> actions, const LiftParams& lifts) noexcept;

// Engagement step shared by the synthetic generator and the simulator.
double engagement_step(double state, const BeneficiaryGroundTruth& truth, double lift,
                       double z) noexcept;

// Draws ground truth and observed prefix histories. Deterministic in the config
// (including its seed).
SyntheticCohort generate_synthetic_cohort(const CohortConfig& config);

// Expected fraction of beneficiaries with no pickup in a week of `retries`
// uniformly random slot attempts.
double expected_unreached_fraction(const std::vector<BeneficiaryGroundTruth>& truth,
                                   int retries);

// Partition by beneficiary: floor(ratio * n) go to train.
std::pair<std::vector<Trajectory>, std::vector<Trajectory>> train_test_split(
    const std::vector<Trajectory>& trajectories, double ratio, std::uint64_t seed);

// Indices into the input instead of copies.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> train_test_split_indices(
    std::size_t n, double ratio, std::uint64_t seed);

std::string format_beneficiary_id(std::size_t index);

}  // namespace chahak
