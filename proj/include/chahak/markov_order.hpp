#pragma once

// Order-h Markov likelihood analysis of discretized listenership: empirical
// transition fitting, negative log-likelihood, relative improvement over h = 1.

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "chahak/cohort.hpp"

namespace chahak::markov {

using Symbol = int;
using SymbolSequence = std::vector<Symbol>;

// Equal-width bins over [0, 1]; 1.0 falls in the top bin.
SymbolSequence discretize(std::span<const double> states, int alphabet);
SymbolSequence discretize(const Trajectory& trajectory, int alphabet);

// Contexts are the previous h symbols packed oldest-first in base B.
class TransitionModel {
 public:
  TransitionModel(int order, int alphabet, double smoothing);

  int order() const noexcept { return order_; }
  int alphabet() const noexcept { return alphabet_; }
  double smoothing() const noexcept { return smoothing_; }

  void add_counts(const TransitionModel& other);
  void count(std::uint64_t context, Symbol next, std::int64_t times = 1);

  // P(next | context); unseen contexts are uniform.
  double probability(std::uint64_t context, Symbol next) const;
  std::vector<double> distribution(std::uint64_t context) const;
  std::uint64_t encode(std::span<const Symbol> context) const;

  const std::unordered_map<std::uint64_t, std::vector<std::int64_t>>& counts() const noexcept {
    return counts_;
  }

 private:
  int order_;
  int alphabet_;
  double smoothing_;
  std::unordered_map<std::uint64_t, std::vector<std::int64_t>> counts_;
};

// Counting runs per sequence; the parallel version merges per-thread tables.
TransitionModel fit_empirical_transitions(const std::vector<SymbolSequence>& sequences, int order,
                                          int alphabet, double smoothing);
TransitionModel fit_empirical_transitions_parallel(const std::vector<SymbolSequence>& sequences,
                                                   int order, int alphabet, double smoothing);

enum class Averaging : std::uint8_t { PerTrajectory, PerTransition };

// Mean over trajectories of -sum ln P over transitions after the first h
// symbols (PerTrajectory), or total NLL over total transitions (PerTransition).
// Sequences no longer than h contribute nothing. Throws NumericError on a
// zero-probability transition.
double neg_log_likelihood(const std::vector<SymbolSequence>& sequences,
                          const TransitionModel& model,
                          Averaging averaging = Averaging::PerTrajectory);

// -(l(h) - l(1)) / l(1) for every h.
std::map<int, double> relative_improvement(const std::map<int, double>& nll_by_order);

// Random order-k chain over `alphabet` symbols with Dirichlet(concentration)
// rows; used to produce data of known order.
struct ChainSpec {
  int order = 1;
  int alphabet = 3;
  double concentration = 0.5;
  std::uint64_t seed = 1;
};
std::vector<SymbolSequence> sample_order_k_sequences(const ChainSpec& spec, int n_sequences,
                                                     int length);

}  // namespace chahak::markov
