#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chahak/commands.hpp"
#include "chahak/config.hpp"
#include "chahak/error.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::string seed;
  std::string out;
  std::string input;
  std::string policies;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "key=value config file");
  cmd->add_option("--seed", f.seed, "global seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--set", f.sets, "override a config key (key=value), repeatable");
}

chahak::cli::RunConfig build_config(const Flags& f, const std::string& input_key,
                                    const std::string& source_key) {
  chahak::cli::RunConfig config;
  if (!f.config_path.empty()) config.load_file(f.config_path);
  for (const auto& s : f.sets) config.set_assignment(s);
  if (!f.seed.empty()) config.set("seed", f.seed);
  if (!f.out.empty()) config.set("out", f.out);
  if (!f.input.empty()) {
    config.set(input_key, f.input);
    if (!source_key.empty()) config.set(source_key, "file");
  }
  if (!f.policies.empty()) config.set("sim.policies", f.policies);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-slot scheduling and intervention planning experiments"};
  app.footer(chahak::cli::config_help());
  app.require_subcommand(1);

  Flags flags;
  auto* bench = app.add_subcommand("timeslot-bench", "UCB versus uniform slot scheduling");
  auto* markov = app.add_subcommand("markov", "order-h likelihood sweep");
  auto* forecast = app.add_subcommand("forecast", "fit and evaluate the linear forecaster");
  auto* simulate = app.add_subcommand("simulate", "closed-loop policy comparison");
  auto* ingest = app.add_subcommand("ingest", "call-log CSV to trajectory store");
  for (auto* cmd : {bench, markov, forecast, simulate, ingest}) add_common(cmd, flags);
  markov->add_option("--input", flags.input, "trajectory CSV (sets markov.source=file)");
  forecast->add_option("--input", flags.input, "trajectory CSV (sets forecast.source=file)");
  ingest->add_option("--input", flags.input, "call-log CSV")->required();
  simulate->add_option("--policies", flags.policies, "comma-separated: ilp,greedy,random,control");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (bench->parsed()) {
      chahak::cli::cmd_timeslot_bench(build_config(flags, "", ""), std::cout);
    } else if (markov->parsed()) {
      chahak::cli::cmd_markov(build_config(flags, "markov.input", "markov.source"), std::cout);
    } else if (forecast->parsed()) {
      chahak::cli::cmd_forecast(build_config(flags, "forecast.input", "forecast.source"), std::cout);
    } else if (simulate->parsed()) {
      chahak::cli::cmd_simulate(build_config(flags, "", ""), std::cout);
    } else if (ingest->parsed()) {
      chahak::cli::cmd_ingest(build_config(flags, "ingest.input", ""), std::cout);
    }
  } catch (const chahak::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
