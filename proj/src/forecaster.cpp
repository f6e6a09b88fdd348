#include "chahak/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "chahak/error.hpp"
#include "chahak/random.hpp"

namespace chahak::forecast {

LinearARModel::LinearARModel(std::vector<double> state_weights, std::vector<double> action_weights,
                             double intercept)
    : state_weights_(std::move(state_weights)),
      action_weights_(std::move(action_weights)),
      intercept_(intercept) {
  const auto h = state_weights_.size();
  if (h < 1) throw ValidationError("model needs at least one lag");
  if (action_weights_.size() != 2 && action_weights_.size() != 2 * h)
    throw ValidationError("action weights must have 2 or 2h entries");
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(state_weights_.begin(), state_weights_.end(), finite) ||
      !std::all_of(action_weights_.begin(), action_weights_.end(), finite) ||
      !std::isfinite(intercept_))
    throw ValidationError("model weights must be finite");
}

ActionFeatures LinearARModel::features() const noexcept {
  return action_weights_.size() == 2 ? ActionFeatures::LastLag : ActionFeatures::PerLag;
}

namespace {

double indicator(ActionKind a, ActionKind want) { return a == want ? 1.0 : 0.0; }

// Feature row without the trailing intercept column.
void fill_features(const ForecastWindow& w, ActionFeatures f, double* row) {
  const int h = w.size();
  for (int j = 0; j < h; ++j) row[j] = w.states[j];
  if (f == ActionFeatures::LastLag) {
    row[h] = indicator(w.actions.back(), ActionKind::AshaVisit);
    row[h + 1] = indicator(w.actions.back(), ActionKind::CallReminder);
  } else {
    for (int j = 0; j < h; ++j) {
      row[h + 2 * j] = indicator(w.actions[j], ActionKind::AshaVisit);
      row[h + 2 * j + 1] = indicator(w.actions[j], ActionKind::CallReminder);
    }
  }
}

int n_action_columns(ActionFeatures f, int h) { return f == ActionFeatures::LastLag ? 2 : 2 * h; }

void check_window(const ForecastWindow& w, int h) {
  if (w.size() != h || static_cast<int>(w.actions.size()) != h)
    throw ValidationError("window length " + std::to_string(w.size()) +
                          " does not match model history " + std::to_string(h));
}

}  // namespace

double LinearARModel::raw_predict(const ForecastWindow& window) const {
  const int h = history_length();
  check_window(window, h);
  double y = intercept_;
  for (int j = 0; j < h; ++j) y += state_weights_[j] * window.states[j];
  if (action_weights_.size() == 2) {
    y += action_weights_[0] * indicator(window.actions.back(), ActionKind::AshaVisit);
    y += action_weights_[1] * indicator(window.actions.back(), ActionKind::CallReminder);
  } else {
    for (int j = 0; j < h; ++j) {
      y += action_weights_[2 * j] * indicator(window.actions[j], ActionKind::AshaVisit);
      y += action_weights_[2 * j + 1] * indicator(window.actions[j], ActionKind::CallReminder);
    }
  }
  return y;
}

double LinearARModel::predict(const ForecastWindow& window) const {
  return std::clamp(raw_predict(window), 0.0, 1.0);
}

std::vector<Sample> make_windows(const Trajectory& trajectory, int h) {
  if (h < 1) throw ValidationError("history length must be >= 1");
  std::vector<Sample> out;
  const auto& weeks = trajectory.weeks;
  const auto n = static_cast<int>(weeks.size());
  for (int t = h; t < n; ++t) {
    Sample s;
    s.window.states.reserve(h);
    s.window.actions.reserve(h);
    for (int j = t - h; j < t; ++j) {
      s.window.states.push_back(weeks[j].state);
      s.window.actions.push_back(weeks[j + 1].action);
    }
    s.target = weeks[t].state;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sample> make_windows(const std::vector<Trajectory>& trajectories, int h) {
  std::vector<Sample> out;
  for (const auto& t : trajectories) {
    auto w = make_windows(t, h);
    out.insert(out.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
  }
  return out;
}

LinearARModel fit_linear_ar(const std::vector<Sample>& samples, int h, ActionFeatures features) {
  if (h < 1) throw ValidationError("history length must be >= 1");
  if (samples.empty()) throw ValidationError("cannot fit a forecaster on zero samples");
  const int n_act = n_action_columns(features, h);
  const int p = h + n_act + 1;
  const auto n = static_cast<Eigen::Index>(samples.size());
  if (n < p)
    throw ValidationError("forecaster underdetermined: " + std::to_string(n) + " samples for " +
                          std::to_string(p) + " parameters; use a larger cohort or longer histories");

  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  std::vector<double> row(static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    check_window(s.window, h);
    fill_features(s.window, features, row.data());
    row[p - 1] = 1.0;
    for (int c = 0; c < p; ++c) X(i, c) = row[c];
    y(i) = s.target;
  }

  Eigen::VectorXd w;
  bool ridge = false;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() == p) {
    w = qr.solve(y);
  } else {
    ridge = true;
    Eigen::MatrixXd A = X.transpose() * X;
    A.diagonal().array() += 1e-6;
    w = A.ldlt().solve(X.transpose() * y);
  }

  std::vector<double> sw(w.data(), w.data() + h);
  std::vector<double> aw(w.data() + h, w.data() + h + n_act);
  LinearARModel model(std::move(sw), std::move(aw), w(p - 1));
  model.ridge_applied = ridge;
  return model;
}

double predict_next(const ForecastModel& model, const ForecastWindow& window) {
  if (window.size() != model.history_length())
    throw ValidationError("window length does not match model history");
  return model.predict(window);
}

double mean_absolute_error(const ForecastModel& model, const std::vector<Sample>& samples) {
  if (samples.empty()) throw ValidationError("no evaluation windows");
  double total = 0.0;
  for (const auto& s : samples) total += std::abs(predict_next(model, s.window) - s.target);
  return total / static_cast<double>(samples.size());
}

double evaluate_mae(const ForecastModel& model, const std::vector<Trajectory>& test) {
  return mean_absolute_error(model, make_windows(test, model.history_length()));
}

void save_model(std::ostream& out, const LinearARModel& model) {
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << '\n';
  };
  out << model.history_length() << '\n';
  for (double v : model.state_weights()) put(v);
  for (double v : model.action_weights()) put(v);
  put(model.intercept());
}

LinearARModel load_model(std::istream& in) {
  std::vector<double> values;
  std::string line;
  int h = -1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    char* end = nullptr;
    if (h < 0) {
      const long v = std::strtol(line.c_str(), &end, 10);
      if (end != line.c_str() + line.size() || v < 1) throw ParseError(1, "bad history length");
      h = static_cast<int>(v);
      continue;
    }
    const double v = std::strtod(line.c_str(), &end);
    if (end != line.c_str() + line.size())
      throw ParseError(values.size() + 2, "non-numeric weight '" + line + "'");
    values.push_back(v);
  }
  if (h < 0) throw ValidationError("empty model file");
  const auto total = values.size();
  const auto hs = static_cast<std::size_t>(h);
  std::size_t n_act = 0;
  if (total == hs + 3)
    n_act = 2;
  else if (total == hs + 2 * hs + 1)
    n_act = 2 * hs;
  else
    throw ValidationError("model file has " + std::to_string(total) +
                          " weights, inconsistent with h = " + std::to_string(h));
  std::vector<double> sw(values.begin(), values.begin() + h);
  std::vector<double> aw(values.begin() + h, values.begin() + h + static_cast<std::ptrdiff_t>(n_act));
  return LinearARModel(std::move(sw), std::move(aw), values.back());
}

LinearARModel with_nonnegative_action_weights(const LinearARModel& model) {
  auto aw = model.action_weights();
  for (auto& w : aw) w = std::max(w, 0.0);
  return LinearARModel(model.state_weights(), std::move(aw), model.intercept());
}

std::vector<Trajectory> generate_ar_trajectories(const ArProcess& process, int n, int length,
                                                 std::uint64_t seed) {
  if (n < 0 || length < 1) throw ValidationError("invalid AR sample size");
  std::vector<Trajectory> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    StreamRng rng(seed, 0xA12, static_cast<std::uint64_t>(i));
    auto& t = out[i];
    t.beneficiary_id = format_beneficiary_id(static_cast<std::size_t>(i));
    double s = rng.uniform();
    t.weeks.push_back({s, ActionKind::Passive, 0.0});
    for (int w = 1; w < length; ++w) {
      const double u = rng.uniform();
      ActionKind a = ActionKind::Passive;
      double effect = 0.0;
      if (u < 0.5 * process.intervention_rate) {
        a = ActionKind::AshaVisit;
        effect = process.asha_effect;
      } else if (u < process.intervention_rate) {
        a = ActionKind::CallReminder;
        effect = process.call_effect;
      }
      const double z = rng.normal();
      s = std::clamp(process.persistence * s + process.intercept + effect + process.noise_sigma * z,
                     0.0, 1.0);
      t.weeks.push_back({s, a, 0.0});
    }
  }
  return out;
}

}  // namespace chahak::forecast
