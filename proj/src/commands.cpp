#include "chahak/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include "chahak/error.hpp"
#include "chahak/markov_order.hpp"
#include "chahak/tari_index.hpp"

namespace chahak::cli {

namespace fs = std::filesystem;

namespace {

fs::path prepare_out_dir(const RunConfig& config) {
  const fs::path dir = config.out_dir();
  if (dir.empty()) throw ValidationError("out must not be empty");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw IoError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<Trajectory> read_trajectory_file(const std::string& path) {
  if (path.empty()) throw ValidationError("source=file needs an input path");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory file '" + path + "'");
  return read_trajectories(in);
}

}  // namespace

TimeslotResult cmd_timeslot_bench(const RunConfig& config, std::ostream& log) {
  const auto cohort_cfg = config.cohort();
  const auto settings = config.bench();
  const auto dir = prepare_out_dir(config);
  const auto cohort = generate_synthetic_cohort(cohort_cfg);

  TimeslotResult result;
  for (auto p : slots::kAllSlotPolicies) {
    const auto totals = slots::run_cohort_parallel(cohort.truth, p, settings);
    result.policies.push_back(p);
    result.avg_calls.push_back(slots::metric_avg_calls(totals));
    result.convergence.push_back(slots::metric_convergence_fraction(totals));
  }

  const int W = settings.weeks;
  auto calls_path = dir / "avg_calls.csv";
  auto conv_path = dir / "convergence.csv";
  auto combined_path = dir / "timeslot_metrics.csv";
  auto calls = open_out(calls_path);
  auto conv = open_out(conv_path);
  auto combined = open_out(combined_path);
  calls << "week,policy,avg_calls\n";
  conv << "week,policy,converged_fraction\n";
  combined << "week,policy,avg_calls,converged_fraction\n";
  for (int w = 0; w <= W; ++w)
    for (std::size_t k = 0; k < result.policies.size(); ++k) {
      const auto name = slots::to_string(result.policies[k]);
      conv << w << ',' << name << ',' << fmt(result.convergence[k][w]) << '\n';
      if (w == 0) continue;
      calls << w << ',' << name << ',' << fmt(result.avg_calls[k][w - 1]) << '\n';
      combined << w << ',' << name << ',' << fmt(result.avg_calls[k][w - 1]) << ','
               << fmt(result.convergence[k][w]) << '\n';
    }
  finish(calls, calls_path);
  finish(conv, conv_path);
  finish(combined, combined_path);

  log << "timeslot-bench: " << cohort.truth.size() << " beneficiaries x " << settings.repetitions
      << " repetitions, R = " << settings.retries << "\n";
  log << "week";
  for (auto p : result.policies) log << "  " << slots::to_string(p) << " calls/conv";
  log << '\n';
  for (int w = 1; w <= W; ++w) {
    log << w;
    for (std::size_t k = 0; k < result.policies.size(); ++k)
      log << "  " << fixed(result.avg_calls[k][w - 1], 3) << '/' << fixed(result.convergence[k][w], 3);
    log << '\n';
  }
  for (std::size_t k = 0; k < result.policies.size(); ++k)
    log << slots::to_string(result.policies[k]) << " first week with 75% converged: "
        << slots::first_week_reaching(result.convergence[k], 0.75) << '\n';
  return result;
}

std::vector<MarkovRow> cmd_markov(const RunConfig& config, std::ostream& log) {
  const auto source = config.get("markov.source");
  const int B = static_cast<int>(config.get_int("markov.alphabet"));
  const double eps = config.get_double("markov.smoothing");
  const int h_min = static_cast<int>(config.get_int("markov.h_min"));
  const int h_max = static_cast<int>(config.get_int("markov.h_max"));
  const auto averaging_name = config.get("markov.averaging");
  const auto evaluation = config.get("markov.evaluation");
  if (h_min < 1 || h_max < h_min) throw ValidationError("need 1 <= markov.h_min <= markov.h_max");
  markov::Averaging averaging;
  if (averaging_name == "per_trajectory")
    averaging = markov::Averaging::PerTrajectory;
  else if (averaging_name == "per_transition")
    averaging = markov::Averaging::PerTransition;
  else
    throw ValidationError("markov.averaging must be per_trajectory or per_transition");
  if (evaluation != "held_out" && evaluation != "in_sample")
    throw ValidationError("markov.evaluation must be held_out or in_sample");

  std::vector<markov::SymbolSequence> seqs;
  std::vector<std::string> names;
  if (source == "chain") {
    markov::ChainSpec spec;
    spec.order = static_cast<int>(config.get_int("markov.chain_order"));
    spec.alphabet = B;
    spec.concentration = config.get_double("markov.chain_concentration");
    spec.seed = config.seed();
    const auto n = config.get_int("markov.chain_sequences");
    const auto len = config.get_int("markov.chain_length");
    if (n < 1 || len < 1) throw ValidationError("chain sequences and length must be >= 1");
    seqs = markov::sample_order_k_sequences(spec, static_cast<int>(n), static_cast<int>(len));
    for (std::size_t i = 0; i < seqs.size(); ++i) names.push_back("seq" + std::to_string(i));
  } else {
    std::vector<Trajectory> trajectories;
    if (source == "cohort")
      trajectories = generate_synthetic_cohort(config.cohort()).histories;
    else if (source == "file")
      trajectories = read_trajectory_file(config.get("markov.input"));
    else
      throw ValidationError("markov.source must be chain, cohort or file");
    for (const auto& t : trajectories) {
      seqs.push_back(markov::discretize(t, B));
      names.push_back(t.beneficiary_id);
    }
  }
  if (seqs.empty()) throw ValidationError("no sequences to analyse");

  std::vector<std::string> short_ones;
  for (std::size_t i = 0; i < seqs.size(); ++i)
    if (seqs[i].size() <= static_cast<std::size_t>(h_max)) short_ones.push_back(names[i]);
  if (!short_ones.empty()) {
    std::string msg = std::to_string(short_ones.size()) + " sequence(s) have at most h_max = " +
                      std::to_string(h_max) + " symbols:";
    for (std::size_t i = 0; i < short_ones.size() && i < 10; ++i) msg += " " + short_ones[i];
    if (short_ones.size() > 10) msg += " ...";
    throw ValidationError(msg);
  }

  std::vector<markov::SymbolSequence> train, test;
  if (evaluation == "held_out") {
    const auto [tr, te] =
        train_test_split_indices(seqs.size(), config.get_double("markov.train_ratio"), config.seed());
    for (auto i : tr) train.push_back(seqs[i]);
    for (auto i : te) test.push_back(seqs[i]);
    if (train.empty() || test.empty())
      throw ValidationError("held-out evaluation needs both splits non-empty");
  } else {
    train = seqs;
    test = seqs;
  }

  std::map<int, double> nll;
  auto eval = [&](int h) {
    const auto model = markov::fit_empirical_transitions_parallel(train, h, B, eps);
    nll[h] = markov::neg_log_likelihood(test, model, averaging);
  };
  eval(1);
  for (int h = std::max(h_min, 2); h <= h_max; ++h) eval(h);
  const auto improvement = markov::relative_improvement(nll);

  std::vector<MarkovRow> rows;
  for (int h = h_min; h <= h_max; ++h) rows.push_back({h, nll.at(h), improvement.at(h)});

  const auto dir = prepare_out_dir(config);
  const auto path = dir / "markov.csv";
  auto out = open_out(path);
  out << "# averaging=" << averaging_name << " evaluation=" << evaluation << " alphabet=" << B
      << " smoothing=" << fmt(eps) << '\n';
  out << "h,neg_log_likelihood,relative_improvement\n";
  for (const auto& r : rows)
    out << r.h << ',' << fmt(r.neg_log_likelihood) << ',' << fmt(r.relative_improvement) << '\n';
  finish(out, path);

  log << "markov: " << seqs.size() << " sequences, source " << source << ", " << averaging_name
      << ", " << evaluation << "\n";
  for (const auto& r : rows)
    log << "h=" << r.h << "  nll " << fixed(r.neg_log_likelihood, 4) << "  improvement "
        << fixed(100.0 * r.relative_improvement, 2) << "%\n";
  return rows;
}

ForecastResult cmd_forecast(const RunConfig& config, std::ostream& log) {
  const int h = static_cast<int>(config.get_int("forecast.h"));
  if (h < 1) throw ValidationError("forecast.h must be >= 1");
  const auto feature_name = config.get("forecast.features");
  forecast::ActionFeatures features;
  if (feature_name == "last_lag")
    features = forecast::ActionFeatures::LastLag;
  else if (feature_name == "per_lag")
    features = forecast::ActionFeatures::PerLag;
  else
    throw ValidationError("forecast.features must be last_lag or per_lag");

  const auto source = config.get("forecast.source");
  std::vector<Trajectory> trajectories;
  if (source == "ar") {
    forecast::ArProcess p;
    p.persistence = config.get_double("forecast.ar_persistence");
    p.intercept = config.get_double("forecast.ar_intercept");
    p.asha_effect = config.get_double("forecast.ar_asha_effect");
    p.call_effect = config.get_double("forecast.ar_call_effect");
    p.noise_sigma = config.get_double("forecast.ar_noise_sigma");
    p.intervention_rate = config.get_double("forecast.ar_intervention_rate");
    trajectories = forecast::generate_ar_trajectories(
        p, static_cast<int>(config.get_int("forecast.n_trajectories")),
        static_cast<int>(config.get_int("forecast.length")), config.seed());
  } else if (source == "cohort") {
    trajectories = generate_synthetic_cohort(config.cohort()).histories;
  } else if (source == "file") {
    trajectories = read_trajectory_file(config.get("forecast.input"));
  } else {
    throw ValidationError("forecast.source must be ar, cohort or file");
  }

  const auto [train, test] =
      train_test_split(trajectories, config.get_double("forecast.train_ratio"), config.seed());
  const auto train_windows = forecast::make_windows(train, h);
  const auto test_windows = forecast::make_windows(test, h);
  if (test_windows.empty())
    throw ValidationError("too few windows: the test split has no trajectory longer than h = " +
                          std::to_string(h));
  auto model = forecast::fit_linear_ar(train_windows, h, features);
  const double mae = forecast::mean_absolute_error(model, test_windows);

  const auto dir = prepare_out_dir(config);
  const auto model_path = dir / "model.txt";
  auto mout = open_out(model_path);
  forecast::save_model(mout, model);
  finish(mout, model_path);
  const auto mae_path = dir / "mae.txt";
  auto aout = open_out(mae_path);
  aout << fmt(mae) << '\n';
  finish(aout, mae_path);

  log << "forecast: " << train_windows.size() << " training windows, " << test_windows.size()
      << " test windows, h = " << h << (model.ridge_applied ? " (ridge fallback)" : "") << '\n';
  log << "held-out MAE " << fixed(mae, 6) << '\n';
  return {std::move(model), mae, train_windows.size(), test_windows.size()};
}

SimulationSetup prepare_simulation(const CohortConfig& cohort_cfg, int h,
                                   forecast::ActionFeatures features, double train_ratio) {
  auto cohort = generate_synthetic_cohort(cohort_cfg);
  const auto split = train_test_split_indices(cohort.histories.size(), train_ratio, cohort_cfg.seed);
  std::vector<forecast::Sample> windows;
  for (auto i : split.first) {
    auto w = forecast::make_windows(cohort.histories[i], h);
    windows.insert(windows.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
  }
  auto model = forecast::fit_linear_ar(windows, h, features);
  return {std::move(cohort), std::move(model)};
}

sim::SimReport cmd_simulate(const RunConfig& config, std::ostream& log) {
  const auto cohort_cfg = config.cohort();
  const auto settings = config.simulation();
  auto policies = config.policies();
  if (cohort_cfg.prefix_weeks + settings.weeks > cohort_cfg.weeks_horizon)
    throw ValidationError("prefix weeks plus sim.weeks exceed cohort.weeks_horizon");
  if (std::find(policies.begin(), policies.end(), sim::PolicyKind::Control) == policies.end()) {
    policies.push_back(sim::PolicyKind::Control);
    log << "control added as the metric baseline\n";
  }
  const auto feature_name = config.get("forecast.features");
  if (feature_name != "last_lag" && feature_name != "per_lag")
    throw ValidationError("forecast.features must be last_lag or per_lag");
  const auto features = feature_name == "per_lag" ? forecast::ActionFeatures::PerLag
                                                  : forecast::ActionFeatures::LastLag;
  const int h = static_cast<int>(config.get_int("forecast.h"));
  if (h < 1) throw ValidationError("forecast.h must be >= 1");
  const auto dir = prepare_out_dir(config);

  const auto setup =
      prepare_simulation(cohort_cfg, h, features, config.get_double("forecast.train_ratio"));
  const auto report = sim::run_simulation(setup.cohort, policies, setup.model, settings);

  auto write = [&](const char* name, auto&& fn) {
    const auto path = dir / name;
    auto out = open_out(path);
    fn(out);
    finish(out, path);
  };
  write("report.json", [&](std::ostream& o) { sim::write_report_json(o, report); });
  write("cumulative_gain.csv", [&](std::ostream& o) { sim::write_gain_csv(o, report); });
  write("dropouts_prevented.csv", [&](std::ostream& o) { sim::write_dropouts_csv(o, report); });
  write("index_distribution.csv", [&](std::ostream& o) {
    const auto table = tari::compute_indices_parallel(
        setup.model, setup.cohort.histories,
        [&] {
          std::vector<std::size_t> arms(setup.cohort.histories.size());
          for (std::size_t i = 0; i < arms.size(); ++i) arms[i] = i;
          return arms;
        }(),
        settings.tari);
    tari::write_index_table(o, table);
  });
  for (const auto& run : report.runs) {
    const auto name = "allocations_" + std::string(sim::to_string(run.policy)) + ".csv";
    write(name.c_str(), [&](std::ostream& o) { sim::write_allocations_csv(o, run, setup.cohort.histories); });
  }

  const auto& control = *report.find(sim::PolicyKind::Control);
  log << "simulate: N = " << report.n_arms << ", " << settings.weeks << " weeks, budgets ASHA "
      << report.budgets.asha << " / CALL " << report.budgets.call << '\n';
  log << "policy   gain_hours(week " << settings.weeks << ")  dropouts  prevented%\n";
  for (const auto& run : report.runs) {
    const auto gain = sim::metric_cumulative_gain(run, control);
    const auto prevented = sim::metric_dropouts_prevented(run, control);
    log << sim::to_string(run.policy) << "  " << fixed(gain.back(), 3) << "  "
        << sim::cumulative_dropouts(run).back() << "  " << fixed(prevented.back(), 1) << '\n';
  }
  return report;
}

CallLogs cmd_ingest(const RunConfig& config, std::ostream& log) {
  const auto input = config.get("ingest.input");
  if (input.empty()) throw ValidationError("ingest needs an input call-log CSV");
  const auto cohort_cfg = config.cohort();
  auto logs = load_call_logs(input, cohort_cfg.retries, cohort_cfg.n_slots, cohort_cfg.avm_length_s);
  const auto dir = prepare_out_dir(config);

  const auto traj_path = dir / "trajectories.csv";
  auto tout = open_out(traj_path);
  write_trajectories(tout, logs.trajectories);
  finish(tout, traj_path);

  const auto rates = estimate_pickup_rates(logs.attempts, cohort_cfg.n_slots);
  const auto rate_path = dir / "pickup_rates.csv";
  auto rout = open_out(rate_path);
  rout << "slot,pickup_rate\n";
  for (std::size_t s = 0; s < rates.size(); ++s) {
    rout << s << ',';
    if (rates[s]) rout << fmt(*rates[s]);
    rout << '\n';
  }
  finish(rout, rate_path);

  log << "ingest: " << logs.attempts.size() << " attempts, " << logs.trajectories.size()
      << " beneficiaries\n";
  return logs;
}

}  // namespace chahak::cli
