#pragma once

// Successive-shortest-path min-cost flow with lexicographic integer edge costs.
// Integer arithmetic keeps reduced costs exact, so Dijkstra with potentials
// never sees a spurious negative edge.

#include <cstdint>
#include <vector>

namespace chahak::flow {

// Compared lexicographically; the later components only break exact ties of
// the earlier ones.
struct LexCost {
  std::int64_t primary = 0;
  std::int64_t secondary = 0;
  std::int64_t tertiary = 0;

  friend LexCost operator*(LexCost a, std::int64_t k) noexcept {
    return {a.primary * k, a.secondary * k, a.tertiary * k};
  }
  friend LexCost operator+(LexCost a, LexCost b) noexcept {
    return {a.primary + b.primary, a.secondary + b.secondary, a.tertiary + b.tertiary};
  }
  friend LexCost operator-(LexCost a, LexCost b) noexcept {
    return {a.primary - b.primary, a.secondary - b.secondary, a.tertiary - b.tertiary};
  }
  friend LexCost operator-(LexCost a) noexcept { return {-a.primary, -a.secondary, -a.tertiary}; }
  friend bool operator<(LexCost a, LexCost b) noexcept {
    if (a.primary != b.primary) return a.primary < b.primary;
    if (a.secondary != b.secondary) return a.secondary < b.secondary;
    return a.tertiary < b.tertiary;
  }
  friend bool operator==(LexCost a, LexCost b) noexcept = default;
};

class MinCostFlow {
 public:
  explicit MinCostFlow(int n_nodes);

  // Returns the edge id.
  int add_edge(int from, int to, std::int64_t capacity, LexCost cost);

  struct Result {
    std::int64_t flow = 0;
    LexCost cost;
  };

  // Augments along cheapest paths until max_flow is reached or, when
  // stop_when_nonnegative is set, the cheapest path no longer lowers the cost.
  // The graph must have no negative-cost cycle.
  Result solve(int source, int sink, std::int64_t max_flow, bool stop_when_nonnegative);

  std::int64_t flow_on(int edge) const;
  int n_nodes() const noexcept { return static_cast<int>(adj_.size()); }

 private:
  struct Edge {
    int to;
    int rev;
    std::int64_t cap;
    LexCost cost;
  };
  std::vector<std::vector<Edge>> adj_;
  std::vector<std::pair<int, int>> edge_index_;  // edge id -> (node, slot)
  std::vector<std::int64_t> capacity_;

  std::vector<LexCost> initial_potentials(int source) const;
};

}  // namespace chahak::flow
