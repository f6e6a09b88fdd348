#include <doctest.h>

#include <cmath>
#include <map>

#include "chahak/error.hpp"
#include "chahak/markov_order.hpp"
#include "chahak/random.hpp"

using namespace chahak;
using namespace chahak::markov;

namespace {

// Independent recount: NLL of `eval` under counts taken from `fit`, computed
// with plain maps keyed on the context vector.
double oracle_nll(const std::vector<SymbolSequence>& fit, const std::vector<SymbolSequence>& eval,
                  int h, int B, double eps, bool per_transition) {
  std::map<std::vector<int>, std::vector<double>> counts;
  for (const auto& s : fit)
    for (std::size_t t = h; t < s.size(); ++t) {
      auto& row = counts[std::vector<int>(s.begin() + (t - h), s.begin() + t)];
      row.resize(B, 0.0);
      row[s[t]] += 1.0;
    }
  double total = 0.0;
  int n_traj = 0, n_trans = 0;
  for (const auto& s : eval) {
    if (s.size() <= static_cast<std::size_t>(h)) continue;
    ++n_traj;
    for (std::size_t t = h; t < s.size(); ++t) {
      ++n_trans;
      const auto it = counts.find(std::vector<int>(s.begin() + (t - h), s.begin() + t));
      double p = 1.0 / B;
      if (it != counts.end()) {
        double sum = 0.0;
        for (double c : it->second) sum += c;
        p = (it->second[s[t]] + eps) / (sum + eps * B);
      }
      total -= std::log(p);
    }
  }
  return per_transition ? total / n_trans : total / n_traj;
}

}  // namespace

TEST_CASE("discretize examples") {
  CHECK(discretize(std::vector<double>{0.0, 0.5, 1.0}, 2) == SymbolSequence{0, 1, 1});
  CHECK(discretize(std::vector<double>{0.1, 0.4, 0.9}, 3) == SymbolSequence{0, 1, 2});
  CHECK(discretize(std::vector<double>(6, 0.42), 4) == SymbolSequence(6, 1));
  CHECK_THROWS_AS(discretize(std::vector<double>{0.1}, 1), ValidationError);
}

TEST_CASE("fit_empirical_transitions examples") {
  const auto m = fit_empirical_transitions({{0, 0, 1, 0, 1}}, 1, 2, 0.0);
  CHECK(m.probability(0, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(m.probability(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(m.probability(1, 0) == 1.0);

  const SymbolSequence alt{0, 1, 0, 1, 0, 1, 0};
  const auto a = fit_empirical_transitions({alt}, 1, 2, 0.0);
  CHECK(a.probability(0, 1) == 1.0);
  CHECK(a.probability(1, 0) == 1.0);

  const auto s = fit_empirical_transitions({{0, 1}}, 1, 2, 1.0);
  CHECK(s.probability(0, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(s.probability(1, 0) == 0.5);  // unseen context is uniform

  CHECK_THROWS_AS(fit_empirical_transitions({{0, 1}}, 2, 2, 0.0), ValidationError);
  CHECK_THROWS_AS(fit_empirical_transitions({{0, 3}}, 1, 2, 0.0), ValidationError);
}

TEST_CASE("neg_log_likelihood examples") {
  const SymbolSequence alt{0, 1, 0, 1, 0, 1, 0};
  CHECK(neg_log_likelihood({alt}, fit_empirical_transitions({alt}, 1, 2, 0.0)) == 0.0);

  const SymbolSequence x{0, 0, 1, 0, 1};
  const double nll = neg_log_likelihood({x}, fit_empirical_transitions({x}, 1, 2, 0.0));
  const double hand = -(std::log(1.0 / 3) + std::log(2.0 / 3) + std::log(1.0) + std::log(2.0 / 3));
  CHECK(nll == doctest::Approx(hand).epsilon(1e-12));
  CHECK(nll == doctest::Approx(1.9095).epsilon(1e-4));

  const auto smooth = fit_empirical_transitions({alt}, 1, 2, 0.5);
  CHECK(std::isfinite(neg_log_likelihood({{0, 0, 0, 1, 1, 1}}, smooth)));

  const auto hard = fit_empirical_transitions({alt}, 1, 2, 0.0);
  CHECK_THROWS_AS(neg_log_likelihood({{0, 0}}, hard), NumericError);
  CHECK_THROWS_AS(neg_log_likelihood({{0}}, hard), ValidationError);
}

TEST_CASE("neg_log_likelihood matches an independent recount") {
  ChainSpec spec;
  spec.order = 2;
  spec.seed = 7;
  const auto all = sample_order_k_sequences(spec, 100, 25);
  const std::vector<SymbolSequence> train(all.begin(), all.begin() + 60);
  const std::vector<SymbolSequence> test(all.begin() + 60, all.end());
  for (int h = 1; h <= 4; ++h) {
    const auto m = fit_empirical_transitions(train, h, 3, 1e-3);
    CHECK(neg_log_likelihood(test, m, Averaging::PerTrajectory) ==
          doctest::Approx(oracle_nll(train, test, h, 3, 1e-3, false)).epsilon(1e-10));
    CHECK(neg_log_likelihood(test, m, Averaging::PerTransition) ==
          doctest::Approx(oracle_nll(train, test, h, 3, 1e-3, true)).epsilon(1e-10));
  }
}

TEST_CASE("relative_improvement examples") {
  auto r = relative_improvement({{1, 10.0}, {2, 10.0}, {6, 8.5}});
  CHECK(r[1] == 0.0);
  CHECK(r[2] == 0.0);
  CHECK(r[6] == doctest::Approx(0.15));
  CHECK_THROWS_AS(relative_improvement({{1, 0.0}, {2, 1.0}}), ValidationError);
  CHECK_THROWS_AS(relative_improvement({{2, 1.0}}), ValidationError);
}

TEST_CASE("probability rows sum to one") {
  ChainSpec spec;
  spec.order = 3;
  spec.alphabet = 4;
  const auto seqs = sample_order_k_sequences(spec, 30, 20);
  for (double eps : {0.0, 1e-3, 1.0}) {
    const auto m = fit_empirical_transitions(seqs, 2, 4, eps);
    for (std::uint64_t ctx = 0; ctx < 16; ++ctx) {
      double sum = 0.0;
      for (double p : m.distribution(ctx)) sum += p;
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("in-sample NLL is non-increasing in h without smoothing") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ChainSpec spec;
    spec.order = 2;
    spec.seed = seed;
    const auto seqs = sample_order_k_sequences(spec, 50, 30);
    // Score the same suffix for every order so the transition sets coincide.
    std::vector<SymbolSequence> fit;
    double prev = 1e300;
    for (int h = 1; h <= 6; ++h) {
      std::vector<SymbolSequence> trimmed;
      for (const auto& s : seqs) trimmed.emplace_back(s.begin() + (6 - h), s.end());
      const double l = neg_log_likelihood(trimmed, fit_empirical_transitions(trimmed, h, 3, 0.0));
      CHECK(l <= prev + 1e-9);
      prev = l;
    }
  }
}

TEST_CASE("known-order chains plateau at their order") {
  auto curve = [](int order) {
    ChainSpec spec;
    spec.order = order;
    spec.seed = 21;
    const auto all = sample_order_k_sequences(spec, 3000, 40);
    const std::vector<SymbolSequence> train(all.begin(), all.begin() + 2000);
    const std::vector<SymbolSequence> test(all.begin() + 2000, all.end());
    std::map<int, double> nll;
    for (int h = 1; h <= 5; ++h)
      nll[h] = neg_log_likelihood(test, fit_empirical_transitions(train, h, 3, 1e-3),
                                  Averaging::PerTransition);
    return relative_improvement(nll);
  };
  const auto three = curve(3);
  CHECK(three.at(2) > three.at(1));
  CHECK(three.at(3) > three.at(2));
  CHECK(three.at(4) - three.at(3) < 0.01);
  CHECK(three.at(5) - three.at(3) < 0.01);
  for (const auto& [h, r] : curve(1)) CHECK(r <= 0.01);
}

TEST_CASE("serial and parallel counting agree") {
  ChainSpec spec;
  spec.order = 3;
  const auto seqs = sample_order_k_sequences(spec, 500, 30);
  for (int h = 1; h <= 6; ++h) {
    const auto a = fit_empirical_transitions(seqs, h, 3, 1e-3);
    const auto b = fit_empirical_transitions_parallel(seqs, h, 3, 1e-3);
    CHECK(a.counts() == b.counts());
    CHECK(neg_log_likelihood(seqs, a) == neg_log_likelihood(seqs, b));
  }
}

TEST_CASE("sampled chains are deterministic and within the alphabet") {
  ChainSpec spec;
  spec.order = 2;
  spec.alphabet = 4;
  const auto a = sample_order_k_sequences(spec, 20, 15);
  const auto b = sample_order_k_sequences(spec, 20, 15);
  CHECK(a == b);
  for (const auto& s : a) {
    CHECK(s.size() == 15);
    for (int x : s) CHECK((x >= 0 && x < 4));
  }
}
