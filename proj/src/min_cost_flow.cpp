#include "chahak/min_cost_flow.hpp"

#include <algorithm>
#include <limits>
#include <queue>

#include "chahak/error.hpp"

namespace chahak::flow {

namespace {

constexpr LexCost kInf{std::numeric_limits<std::int64_t>::max(), 0, 0};

bool reachable(const LexCost& c) noexcept { return c.primary != kInf.primary; }

}  // namespace

MinCostFlow::MinCostFlow(int n_nodes) : adj_(static_cast<std::size_t>(n_nodes)) {
  if (n_nodes < 2) throw ValidationError("flow network needs at least two nodes");
}

int MinCostFlow::add_edge(int from, int to, std::int64_t capacity, LexCost cost) {
  if (from < 0 || to < 0 || from >= n_nodes() || to >= n_nodes())
    throw ValidationError("flow edge endpoint out of range");
  if (capacity < 0) throw ValidationError("flow edge capacity must be >= 0");
  auto& fwd = adj_[from];
  auto& bwd = adj_[to];
  const int fi = static_cast<int>(fwd.size());
  const int bi = static_cast<int>(bwd.size()) + (from == to ? 1 : 0);
  fwd.push_back({to, bi, capacity, cost});
  adj_[to].push_back({from, fi, 0, -cost});
  edge_index_.emplace_back(from, fi);
  capacity_.push_back(capacity);
  return static_cast<int>(edge_index_.size()) - 1;
}

std::int64_t MinCostFlow::flow_on(int edge) const {
  const auto [node, slot] = edge_index_.at(static_cast<std::size_t>(edge));
  return capacity_[static_cast<std::size_t>(edge)] - adj_[node][slot].cap;
}

// Bellman-Ford over edges with residual capacity.
std::vector<LexCost> MinCostFlow::initial_potentials(int source) const {
  const int n = n_nodes();
  std::vector<LexCost> dist(static_cast<std::size_t>(n), kInf);
  dist[source] = {};
  for (int pass = 0; pass < n; ++pass) {
    bool changed = false;
    for (int u = 0; u < n; ++u) {
      if (!reachable(dist[u])) continue;
      for (const auto& e : adj_[u]) {
        if (e.cap <= 0) continue;
        const LexCost d = dist[u] + e.cost;
        if (d < dist[e.to]) {
          dist[e.to] = d;
          changed = true;
        }
      }
    }
    if (!changed) return dist;
  }
  throw NumericError("flow network has a negative-cost cycle");
}

MinCostFlow::Result MinCostFlow::solve(int source, int sink, std::int64_t max_flow,
                                       bool stop_when_nonnegative) {
  const int n = n_nodes();
  std::vector<LexCost> pot = initial_potentials(source);
  for (auto& p : pot)
    if (!reachable(p)) p = {};

  Result result;
  std::vector<LexCost> dist(static_cast<std::size_t>(n));
  std::vector<int> prev_node(static_cast<std::size_t>(n)), prev_slot(static_cast<std::size_t>(n));
  using Item = std::pair<LexCost, int>;
  auto greater = [](const Item& a, const Item& b) {
    if (b.first < a.first) return true;
    if (a.first < b.first) return false;
    return a.second > b.second;
  };

  while (result.flow < max_flow) {
    std::fill(dist.begin(), dist.end(), kInf);
    dist[source] = {};
    std::priority_queue<Item, std::vector<Item>, decltype(greater)> heap(greater);
    heap.push({dist[source], source});
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (dist[u] < d) continue;
      for (int k = 0; k < static_cast<int>(adj_[u].size()); ++k) {
        const auto& e = adj_[u][k];
        if (e.cap <= 0) continue;
        const LexCost nd = d + e.cost + pot[u] - pot[e.to];
        if (nd < dist[e.to]) {
          dist[e.to] = nd;
          prev_node[e.to] = u;
          prev_slot[e.to] = k;
          heap.push({nd, e.to});
        }
      }
    }
    if (!reachable(dist[sink])) break;
    for (int v = 0; v < n; ++v)
      if (reachable(dist[v])) pot[v] = pot[v] + dist[v];

    const LexCost path_cost = pot[sink] - pot[source];
    if (stop_when_nonnegative && !(path_cost < LexCost{})) break;

    std::int64_t push = max_flow - result.flow;
    for (int v = sink; v != source; v = prev_node[v])
      push = std::min(push, adj_[prev_node[v]][prev_slot[v]].cap);
    for (int v = sink; v != source; v = prev_node[v]) {
      auto& e = adj_[prev_node[v]][prev_slot[v]];
      e.cap -= push;
      adj_[v][e.rev].cap += push;
    }
    result.flow += push;
    result.cost = result.cost + path_cost * push;
  }
  return result;
}

}  // namespace chahak::flow
