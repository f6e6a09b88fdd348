#pragma once

// Weekly budgeted allocation of interventions from an index table: exact ILP
// via min-cost flow, greedy with conflict resolution, random, and control.

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <utility>
#include <vector>

#include "chahak/cohort.hpp"
#include "chahak/random.hpp"
#include "chahak/tari_index.hpp"

namespace chahak::alloc {

struct Budgets {
  std::int64_t asha = 0;
  std::int64_t call = 0;

  std::int64_t of(ActionKind a) const noexcept {
    return a == ActionKind::AshaVisit ? asha : a == ActionKind::CallReminder ? call : 0;
  }
  std::int64_t total() const noexcept { return asha + call; }
};

// ceil(fraction * n) per intervention.
Budgets budgets_from_fraction(std::size_t n, double fraction);

// actions[r] is the action of table row r (or of candidate r for random).
struct Allocation {
  std::vector<ActionKind> actions;

  std::int64_t count(ActionKind a) const noexcept;
};

// Throws ValidationError unless the allocation covers n arms, stays within
// both budgets, and holds one action per arm.
void validate_allocation(const Allocation& allocation, const Budgets& budgets, std::size_t n);

// Sum of m over assigned rows, accumulated in row order.
double objective(const tari::IndexTable& table, const Allocation& allocation);

struct AllocatorOptions {
  bool exclude_nonbeneficial = false;  // drop (arm, action) pairs with m <= 1
  bool greedy_backfill = true;
};

// Exact maximizer of sum m[n][i] y[n][i] subject to per-intervention budgets
// and one intervention per arm. Among optima, lower row indices are preferred
// for ASHA, then for CALL.
Allocation allocate_ilp(const tari::IndexTable& table, const Budgets& budgets,
                        const AllocatorOptions& options = {});

// Top-k per intervention by m (ties to the lower row), conflicts to the higher
// index (ties to ASHA), then the loser backfills from its ranked list.
Allocation allocate_greedy(const tari::IndexTable& table, const Budgets& budgets,
                           const AllocatorOptions& options = {});

// Joint sample without replacement of budgets.asha + budgets.call arms.
Allocation allocate_random(std::size_t n, const Budgets& budgets, StreamRng& rng);

Allocation allocate_control(std::size_t n);

// Exhaustive search over 3^N assignments, N <= 12.
std::pair<double, Allocation> brute_force_oracle(const tari::IndexTable& table,
                                                 const Budgets& budgets,
                                                 const AllocatorOptions& options = {});

// week,beneficiary_id,action with passive rows omitted.
void write_allocation_header(std::ostream& out);
void write_allocation_rows(std::ostream& out, int week, const std::vector<BeneficiaryId>& ids,
                           const Allocation& allocation);

}  // namespace chahak::alloc
