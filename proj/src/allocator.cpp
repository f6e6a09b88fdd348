#include "chahak/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "chahak/error.hpp"
#include "chahak/min_cost_flow.hpp"

namespace chahak::alloc {

Budgets budgets_from_fraction(std::size_t n, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ValidationError("budget fraction must be in [0, 1]");
  // The small slack keeps exact products such as 0.01 * 4000 from rounding up.
  const auto k = static_cast<std::int64_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  return {k, k};
}

std::int64_t Allocation::count(ActionKind a) const noexcept {
  return std::count(actions.begin(), actions.end(), a);
}

void validate_allocation(const Allocation& allocation, const Budgets& budgets, std::size_t n) {
  if (budgets.asha < 0 || budgets.call < 0) throw ValidationError("budgets must be >= 0");
  if (allocation.actions.size() != n)
    throw ValidationError("allocation covers " + std::to_string(allocation.actions.size()) +
                          " arms, expected " + std::to_string(n));
  for (auto a : allocation.actions)
    if (a != ActionKind::Passive && a != ActionKind::AshaVisit && a != ActionKind::CallReminder)
      throw ValidationError("allocation holds an unknown action");
  for (auto a : kInterventions)
    if (allocation.count(a) > budgets.of(a))
      throw ValidationError(std::string(to_string(a)) + " budget exceeded");
}

double objective(const tari::IndexTable& table, const Allocation& allocation) {
  if (allocation.actions.size() != table.size())
    throw ValidationError("allocation does not match the index table");
  double total = 0.0;
  for (std::size_t r = 0; r < table.size(); ++r)
    if (allocation.actions[r] != ActionKind::Passive) total += table.rows[r].m(allocation.actions[r]);
  return total;
}

namespace {

bool eligible(const tari::IndexRow& row, ActionKind a, const AllocatorOptions& options) {
  return !options.exclude_nonbeneficial || row.m(a) > 1.0;
}

// Power-of-two fixed-point scale for the flow costs, as fine as int64 allows
// while any residual path sum of up to 2n + 8 edges stays representable.
double cost_scale(const tari::IndexTable& table) {
  double max_m = 0.0;
  for (const auto& r : table.rows) {
    if (!std::isfinite(r.m_asha) || !std::isfinite(r.m_call))
      throw ValidationError("index values must be finite");
    max_m = std::max({max_m, std::abs(r.m_asha), std::abs(r.m_call)});
  }
  if (max_m == 0.0) return 1.0;
  const double room = std::ldexp(1.0, 61) / (max_m * (2.0 * static_cast<double>(table.size()) + 8.0));
  return std::ldexp(1.0, std::min(std::ilogb(room), 60));
}

void check_budgets(const Budgets& b) {
  if (b.asha < 0 || b.call < 0) throw ValidationError("budgets must be >= 0");
}

}  // namespace

Allocation allocate_ilp(const tari::IndexTable& table, const Budgets& budgets,
                        const AllocatorOptions& options) {
  check_budgets(budgets);
  const auto n = static_cast<int>(table.size());
  Allocation out{std::vector<ActionKind>(table.size(), ActionKind::Passive)};
  if (n == 0 || budgets.total() == 0) return out;

  // source -> arm (1) -> intervention node (budget) -> sink
  const int source = 0, asha = n + 1, call = n + 2, sink = n + 3;
  const double scale = cost_scale(table);
  auto fixed_point = [scale](double m) { return static_cast<std::int64_t>(std::llround(m * scale)); };
  flow::MinCostFlow net(n + 4);
  std::vector<int> asha_edge(table.size(), -1), call_edge(table.size(), -1);
  for (int r = 0; r < n; ++r) net.add_edge(source, r + 1, 1, {});
  for (int r = 0; r < n; ++r) {
    const auto& row = table.rows[static_cast<std::size_t>(r)];
    if (budgets.asha > 0 && eligible(row, ActionKind::AshaVisit, options))
      asha_edge[r] = net.add_edge(r + 1, asha, 1, {-fixed_point(row.m_asha), r, 0});
    if (budgets.call > 0 && eligible(row, ActionKind::CallReminder, options))
      call_edge[r] = net.add_edge(r + 1, call, 1, {-fixed_point(row.m_call), 0, r});
  }
  net.add_edge(asha, sink, budgets.asha, {});
  net.add_edge(call, sink, budgets.call, {});
  net.solve(source, sink, budgets.total(), true);

  for (int r = 0; r < n; ++r) {
    if (asha_edge[r] >= 0 && net.flow_on(asha_edge[r]) > 0)
      out.actions[static_cast<std::size_t>(r)] = ActionKind::AshaVisit;
    else if (call_edge[r] >= 0 && net.flow_on(call_edge[r]) > 0)
      out.actions[static_cast<std::size_t>(r)] = ActionKind::CallReminder;
  }
  return out;
}

Allocation allocate_greedy(const tari::IndexTable& table, const Budgets& budgets,
                           const AllocatorOptions& options) {
  check_budgets(budgets);
  const auto n = table.size();
  Allocation out{std::vector<ActionKind>(n, ActionKind::Passive)};

  auto ranked = [&](ActionKind a) {
    std::vector<std::size_t> order;
    for (std::size_t r = 0; r < n; ++r)
      if (eligible(table.rows[r], a, options)) order.push_back(r);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return table.rows[x].m(a) > table.rows[y].m(a);
    });
    return order;
  };
  const auto by_asha = ranked(ActionKind::AshaVisit);
  const auto by_call = ranked(ActionKind::CallReminder);
  const auto top_asha = std::min<std::size_t>(by_asha.size(), static_cast<std::size_t>(budgets.asha));
  const auto top_call = std::min<std::size_t>(by_call.size(), static_cast<std::size_t>(budgets.call));

  std::vector<bool> claim_asha(n, false), claim_call(n, false);
  for (std::size_t i = 0; i < top_asha; ++i) claim_asha[by_asha[i]] = true;
  for (std::size_t i = 0; i < top_call; ++i) claim_call[by_call[i]] = true;
  for (std::size_t r = 0; r < n; ++r) {
    if (claim_asha[r] && claim_call[r]) {
      if (table.rows[r].m_asha >= table.rows[r].m_call)
        claim_call[r] = false;
      else
        claim_asha[r] = false;
    }
    if (claim_asha[r]) out.actions[r] = ActionKind::AshaVisit;
    if (claim_call[r]) out.actions[r] = ActionKind::CallReminder;
  }

  if (options.greedy_backfill) {
    auto backfill = [&](ActionKind a, const std::vector<std::size_t>& order) {
      auto have = out.count(a);
      for (std::size_t i = 0; i < order.size() && have < budgets.of(a); ++i) {
        if (out.actions[order[i]] != ActionKind::Passive) continue;
        out.actions[order[i]] = a;
        ++have;
      }
    };
    backfill(ActionKind::AshaVisit, by_asha);
    backfill(ActionKind::CallReminder, by_call);
  }
  return out;
}

Allocation allocate_random(std::size_t n, const Budgets& budgets, StreamRng& rng) {
  check_budgets(budgets);
  const auto k = static_cast<std::size_t>(budgets.total());
  if (k > n)
    throw ValidationError("random allocation needs asha + call budgets <= N (" +
                          std::to_string(k) + " > " + std::to_string(n) + ")");
  Allocation out{std::vector<ActionKind>(n, ActionKind::Passive)};
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: the first k positions form the sample.
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
  for (std::size_t i = 0; i < k; ++i)
    out.actions[idx[i]] = i < static_cast<std::size_t>(budgets.asha) ? ActionKind::AshaVisit
                                                                     : ActionKind::CallReminder;
  return out;
}

Allocation allocate_control(std::size_t n) {
  return Allocation{std::vector<ActionKind>(n, ActionKind::Passive)};
}

std::pair<double, Allocation> brute_force_oracle(const tari::IndexTable& table,
                                                 const Budgets& budgets,
                                                 const AllocatorOptions& options) {
  check_budgets(budgets);
  const auto n = table.size();
  if (n > 12) throw ValidationError("brute-force oracle is limited to N <= 12");
  Allocation current = allocate_control(n);
  Allocation best = current;
  double best_value = 0.0;
  constexpr ActionKind kChoices[] = {ActionKind::Passive, ActionKind::AshaVisit,
                                     ActionKind::CallReminder};

  auto visit = [&](auto&& self, std::size_t r, std::int64_t left_asha, std::int64_t left_call) -> void {
    if (r == n) {
      const double v = objective(table, current);
      if (v > best_value) {
        best_value = v;
        best = current;
      }
      return;
    }
    for (auto a : kChoices) {
      if (a == ActionKind::AshaVisit && (left_asha == 0 || !eligible(table.rows[r], a, options))) continue;
      if (a == ActionKind::CallReminder && (left_call == 0 || !eligible(table.rows[r], a, options))) continue;
      current.actions[r] = a;
      self(self, r + 1, left_asha - (a == ActionKind::AshaVisit),
           left_call - (a == ActionKind::CallReminder));
    }
    current.actions[r] = ActionKind::Passive;
  };
  visit(visit, 0, budgets.asha, budgets.call);
  return {best_value, best};
}

void write_allocation_header(std::ostream& out) { out << "week,beneficiary_id,action\n"; }

void write_allocation_rows(std::ostream& out, int week, const std::vector<BeneficiaryId>& ids,
                           const Allocation& allocation) {
  if (ids.size() != allocation.actions.size())
    throw ValidationError("allocation does not match the beneficiary list");
  for (std::size_t r = 0; r < ids.size(); ++r)
    if (allocation.actions[r] != ActionKind::Passive)
      out << week << ',' << ids[r] << ',' << to_string(allocation.actions[r]) << '\n';
}

}  // namespace chahak::alloc
