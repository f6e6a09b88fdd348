// Serial versus OpenMP timings of the per-beneficiary kernels. Each pair is
// also checked for identical output.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <numeric>

#include <omp.h>

#include "chahak/commands.hpp"
#include "chahak/markov_order.hpp"
#include "chahak/slot_bandit.hpp"
#include "chahak/tari_index.hpp"

using namespace chahak;

template <class F>
static double time_ms(F&& f, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

static void report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-22s serial %9.2f ms  parallel %9.2f ms  speedup %5.2fx  %s\n", name, serial,
              parallel, serial / parallel, same ? "match" : "MISMATCH");
}

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 4000;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 3;
  std::printf("threads %d, N %d, best of %d\n", omp_get_max_threads(), n, reps);
  bool all_same = true;

  CohortConfig cfg;
  cfg.n_beneficiaries = n;
  const auto setup = cli::prepare_simulation(cfg, 4, forecast::ActionFeatures::LastLag, 0.7);

  {
    slots::BenchSettings s;
    s.repetitions = 10;
    slots::BenchTotals a, b;
    const double ts = time_ms([&] { a = slots::run_cohort_serial(setup.cohort.truth, slots::SlotPolicyKind::Ucb, s); }, reps);
    const double tp = time_ms([&] { b = slots::run_cohort_parallel(setup.cohort.truth, slots::SlotPolicyKind::Ucb, s); }, reps);
    const bool same = a.attempts == b.attempts && a.converged == b.converged;
    all_same = all_same && same;
    report("ucb cohort", ts, tp, same);
  }
  {
    std::vector<std::size_t> arms(setup.cohort.histories.size());
    std::iota(arms.begin(), arms.end(), std::size_t{0});
    tari::TariConfig t;
    tari::IndexTable a, b;
    const double ts = time_ms([&] { a = tari::compute_indices(setup.model, setup.cohort.histories, arms, t); }, reps);
    const double tp = time_ms([&] { b = tari::compute_indices_parallel(setup.model, setup.cohort.histories, arms, t); }, reps);
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i)
      same = a.rows[i].u_asha == b.rows[i].u_asha && a.rows[i].u_call == b.rows[i].u_call &&
             a.rows[i].v == b.rows[i].v;
    all_same = all_same && same;
    report("tari indices", ts, tp, same);
  }
  {
    markov::ChainSpec spec;
    spec.order = 3;
    const auto seqs = markov::sample_order_k_sequences(spec, n, 72);
    markov::TransitionModel a(6, 3, 0.0), b(6, 3, 0.0);
    const double ts = time_ms([&] { a = markov::fit_empirical_transitions(seqs, 6, 3, 1e-3); }, reps);
    const double tp = time_ms([&] { b = markov::fit_empirical_transitions_parallel(seqs, 6, 3, 1e-3); }, reps);
    const bool same = a.counts() == b.counts();
    all_same = all_same && same;
    report("markov counts h=6", ts, tp, same);
  }
  {
    sim::SimSettings s;
    sim::PolicyRun a, b;
    s.parallel = false;
    const double ts = time_ms([&] { a = sim::run_policy(setup.cohort, sim::PolicyKind::Ilp, setup.model, s); }, reps);
    s.parallel = true;
    const double tp = time_ms([&] { b = sim::run_policy(setup.cohort, sim::PolicyKind::Ilp, setup.model, s); }, reps);
    const bool same = a.states == b.states && a.dropouts == b.dropouts;
    all_same = all_same && same;
    report("simulate ilp 8 weeks", ts, tp, same);
  }
  return all_same ? 0 : 1;
}
