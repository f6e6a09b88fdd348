#include "chahak/markov_order.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <omp.h>

#include "chahak/error.hpp"
#include "chahak/random.hpp"

namespace chahak::markov {

SymbolSequence discretize(std::span<const double> states, int alphabet) {
  if (alphabet < 2) throw ValidationError("alphabet size must be >= 2");
  SymbolSequence out;
  out.reserve(states.size());
  for (double s : states) {
    const auto bin = static_cast<int>(std::floor(std::clamp(s, 0.0, 1.0) * alphabet));
    out.push_back(std::min(bin, alphabet - 1));
  }
  return out;
}

SymbolSequence discretize(const Trajectory& trajectory, int alphabet) {
  const auto states = trajectory.states();
  return discretize(states, alphabet);
}

TransitionModel::TransitionModel(int order, int alphabet, double smoothing)
    : order_(order), alphabet_(alphabet), smoothing_(smoothing) {
  if (order < 1) throw ValidationError("Markov order must be >= 1");
  if (alphabet < 2) throw ValidationError("alphabet size must be >= 2");
  if (smoothing < 0.0) throw ValidationError("smoothing must be >= 0");
  if (std::pow(static_cast<double>(alphabet), order) > 1e15)
    throw ValidationError("context space too large for order " + std::to_string(order));
}

std::uint64_t TransitionModel::encode(std::span<const Symbol> context) const {
  std::uint64_t code = 0;
  for (Symbol s : context) code = code * static_cast<std::uint64_t>(alphabet_) + static_cast<std::uint64_t>(s);
  return code;
}

void TransitionModel::count(std::uint64_t context, Symbol next, std::int64_t times) {
  auto& row = counts_[context];
  if (row.empty()) row.assign(static_cast<std::size_t>(alphabet_), 0);
  row[static_cast<std::size_t>(next)] += times;
}

void TransitionModel::add_counts(const TransitionModel& other) {
  for (const auto& [ctx, row] : other.counts_)
    for (int s = 0; s < alphabet_; ++s)
      if (row[s] != 0) count(ctx, s, row[s]);
}

double TransitionModel::probability(std::uint64_t context, Symbol next) const {
  const auto it = counts_.find(context);
  if (it == counts_.end()) return 1.0 / alphabet_;
  const auto& row = it->second;
  std::int64_t total = 0;
  for (auto c : row) total += c;
  return (static_cast<double>(row[static_cast<std::size_t>(next)]) + smoothing_) /
         (static_cast<double>(total) + smoothing_ * alphabet_);
}

std::vector<double> TransitionModel::distribution(std::uint64_t context) const {
  std::vector<double> p(static_cast<std::size_t>(alphabet_));
  for (int s = 0; s < alphabet_; ++s) p[s] = probability(context, s);
  return p;
}

namespace {

void check_symbols(const SymbolSequence& seq, int alphabet) {
  for (Symbol s : seq)
    if (s < 0 || s >= alphabet) throw ValidationError("symbol outside the model alphabet");
}

void count_sequence(TransitionModel& model, const SymbolSequence& seq) {
  const auto h = static_cast<std::size_t>(model.order());
  for (std::size_t t = h; t < seq.size(); ++t)
    model.count(model.encode(std::span(seq).subspan(t - h, h)), seq[t]);
}

void require_usable(const std::vector<SymbolSequence>& sequences, int order, int alphabet) {
  bool any = false;
  for (const auto& seq : sequences) {
    check_symbols(seq, alphabet);
    any = any || seq.size() > static_cast<std::size_t>(order);
  }
  if (!any)
    throw ValidationError("every sequence is too short for order " + std::to_string(order));
}

}  // namespace

TransitionModel fit_empirical_transitions(const std::vector<SymbolSequence>& sequences, int order,
                                          int alphabet, double smoothing) {
  TransitionModel model(order, alphabet, smoothing);
  require_usable(sequences, order, alphabet);
  for (const auto& seq : sequences) count_sequence(model, seq);
  return model;
}

TransitionModel fit_empirical_transitions_parallel(const std::vector<SymbolSequence>& sequences,
                                                   int order, int alphabet, double smoothing) {
  TransitionModel model(order, alphabet, smoothing);
  require_usable(sequences, order, alphabet);
  const auto n = static_cast<std::int64_t>(sequences.size());
#pragma omp parallel
  {
    TransitionModel local(order, alphabet, smoothing);
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < n; ++i) count_sequence(local, sequences[static_cast<std::size_t>(i)]);
    // Integer counts: merge order does not matter.
#pragma omp critical
    model.add_counts(local);
  }
  return model;
}

double neg_log_likelihood(const std::vector<SymbolSequence>& sequences,
                          const TransitionModel& model, Averaging averaging) {
  const auto h = static_cast<std::size_t>(model.order());
  double total = 0.0;
  std::size_t trajectories = 0, transitions = 0;
  for (const auto& seq : sequences) {
    check_symbols(seq, model.alphabet());
    if (seq.size() <= h) continue;
    double nll = 0.0;
    for (std::size_t t = h; t < seq.size(); ++t) {
      const double p = model.probability(model.encode(std::span(seq).subspan(t - h, h)), seq[t]);
      if (!(p > 0.0))
        throw NumericError("non-finite likelihood: zero-probability transition at order " +
                           std::to_string(model.order()) + " (use smoothing > 0)");
      nll -= std::log(p);
    }
    total += nll;
    ++trajectories;
    transitions += seq.size() - h;
  }
  if (trajectories == 0)
    throw ValidationError("no sequence is longer than the model order");
  return averaging == Averaging::PerTrajectory ? total / static_cast<double>(trajectories)
                                               : total / static_cast<double>(transitions);
}

std::map<int, double> relative_improvement(const std::map<int, double>& nll_by_order) {
  const auto base = nll_by_order.find(1);
  if (base == nll_by_order.end()) throw ValidationError("l(1) is required");
  if (!(base->second > 0.0))
    throw ValidationError("relative improvement is undefined when l(1) = 0");
  std::map<int, double> out;
  for (const auto& [h, l] : nll_by_order) out[h] = -(l - base->second) / base->second;
  return out;
}

std::vector<SymbolSequence> sample_order_k_sequences(const ChainSpec& spec, int n_sequences,
                                                     int length) {
  if (spec.order < 1 || spec.alphabet < 2 || spec.concentration <= 0.0)
    throw ValidationError("invalid chain specification");
  const int B = spec.alphabet;
  std::uint64_t n_contexts = 1;
  for (int i = 0; i < spec.order; ++i) n_contexts *= static_cast<std::uint64_t>(B);

  StreamRng table_rng(spec.seed, 0xC4A1);
  std::gamma_distribution<double> gamma(spec.concentration, 1.0);
  std::vector<double> table(n_contexts * static_cast<std::uint64_t>(B));
  for (std::uint64_t c = 0; c < n_contexts; ++c) {
    double sum = 0.0;
    for (int s = 0; s < B; ++s) sum += table[c * B + s] = gamma(table_rng) + 1e-12;
    for (int s = 0; s < B; ++s) table[c * B + s] /= sum;
  }

  std::vector<SymbolSequence> out(static_cast<std::size_t>(n_sequences));
  for (int i = 0; i < n_sequences; ++i) {
    StreamRng rng(spec.seed, 0xC4A2, static_cast<std::uint64_t>(i));
    auto& seq = out[i];
    seq.reserve(static_cast<std::size_t>(length));
    std::uint64_t ctx = 0;
    for (int t = 0; t < length; ++t) {
      Symbol s;
      if (t < spec.order) {
        s = static_cast<Symbol>(rng.below(static_cast<std::uint64_t>(B)));
      } else {
        const double u = rng.uniform();
        double acc = 0.0;
        s = B - 1;
        for (int k = 0; k < B; ++k) {
          acc += table[ctx * B + k];
          if (u < acc) {
            s = k;
            break;
          }
        }
      }
      seq.push_back(s);
      ctx = (ctx * B + static_cast<std::uint64_t>(s)) % n_contexts;
    }
  }
  return out;
}

}  // namespace chahak::markov
