#pragma once

// One-step listenership forecasting: a pluggable model interface and a
// least-squares linear autoregressive baseline.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "chahak/cohort.hpp"

namespace chahak::forecast {

// The last h weeks, oldest first. actions[j] is the action taken after
// observing states[j], so actions.back() is the action for the predicted week.
struct ForecastWindow {
  std::vector<double> states;
  std::vector<ActionKind> actions;

  int size() const noexcept { return static_cast<int>(states.size()); }
};

class ForecastModel {
 public:
  virtual ~ForecastModel() = default;
  virtual int history_length() const = 0;
  // Next-week state in [0, 1]; a pure function of the window.
  virtual double predict(const ForecastWindow& window) const = 0;
};

enum class ActionFeatures : std::uint8_t {
  LastLag,  // ASHA / CALL indicators for the predicted week only
  PerLag,   // indicators for every lag
};

class LinearARModel final : public ForecastModel {
 public:
  LinearARModel(std::vector<double> state_weights, std::vector<double> action_weights,
                double intercept);

  int history_length() const override { return static_cast<int>(state_weights_.size()); }
  double predict(const ForecastWindow& window) const override;
  // Unclipped linear combination.
  double raw_predict(const ForecastWindow& window) const;

  const std::vector<double>& state_weights() const noexcept { return state_weights_; }
  // [asha, call] per lag, oldest lag first; one pair for LastLag models.
  const std::vector<double>& action_weights() const noexcept { return action_weights_; }
  double intercept() const noexcept { return intercept_; }
  ActionFeatures features() const noexcept;

  bool ridge_applied = false;

 private:
  std::vector<double> state_weights_;
  std::vector<double> action_weights_;
  double intercept_;
};

struct Sample {
  ForecastWindow window;
  double target = 0.0;
};

// Sliding windows over a trajectory; empty when it has h weeks or fewer.
std::vector<Sample> make_windows(const Trajectory& trajectory, int h);
std::vector<Sample> make_windows(const std::vector<Trajectory>& trajectories, int h);

// Least squares on lagged states, action indicators and an intercept. Falls
// back to a 1e-6 ridge when the design matrix is rank deficient.
LinearARModel fit_linear_ar(const std::vector<Sample>& samples, int h,
                            ActionFeatures features = ActionFeatures::LastLag);

double predict_next(const ForecastModel& model, const ForecastWindow& window);

double evaluate_mae(const ForecastModel& model, const std::vector<Trajectory>& test);
double mean_absolute_error(const ForecastModel& model, const std::vector<Sample>& samples);

// One value per line: h, state weights, action weights, intercept.
void save_model(std::ostream& out, const LinearARModel& model);
LinearARModel load_model(std::istream& in);

// Copy with negative action weights set to zero.
LinearARModel with_nonnegative_action_weights(const LinearARModel& model);

// s_t = clip(persistence * s_{t-1} + intercept + effect(a_t) + sigma * N(0,1)).
struct ArProcess {
  double persistence = 0.5;
  double intercept = 0.2;
  double asha_effect = 0.2;
  double call_effect = 0.1;
  double noise_sigma = 0.0;
  double intervention_rate = 0.2;
};
std::vector<Trajectory> generate_ar_trajectories(const ArProcess& process, int n, int length,
                                                 std::uint64_t seed);

}  // namespace chahak::forecast
