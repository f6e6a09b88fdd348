#pragma once

// Flat key=value run configuration. Every key has a default; unknown keys are
// rejected. Later sources override earlier ones (defaults, file, command line).

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "chahak/cohort.hpp"
#include "chahak/forecaster.hpp"
#include "chahak/markov_order.hpp"
#include "chahak/sim_engine.hpp"
#include "chahak/slot_bandit.hpp"

namespace chahak::cli {

struct ConfigKey {
  std::string_view name;
  std::string_view default_value;
  std::string_view help;
};

const std::vector<ConfigKey>& config_keys();

// "  key = default   help" for every key.
std::string config_help();

class RunConfig {
 public:
  RunConfig();

  void set(std::string_view key, std::string_view value);
  // "key=value"
  void set_assignment(std::string_view assignment);
  // Lines are key = value; blank lines and lines starting with # are skipped.
  void load(std::istream& in);
  void load_file(const std::string& path);

  const std::string& get(std::string_view key) const;
  std::int64_t get_int(std::string_view key) const;
  std::uint64_t get_u64(std::string_view key) const;
  double get_double(std::string_view key) const;
  bool get_bool(std::string_view key) const;

  std::uint64_t seed() const { return get_u64("seed"); }
  std::string out_dir() const { return get("out"); }

  CohortConfig cohort() const;
  slots::BenchSettings bench() const;
  sim::SimSettings simulation() const;
  std::vector<sim::PolicyKind> policies() const;

  // Sorted key=value lines.
  void write(std::ostream& out) const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace chahak::cli
