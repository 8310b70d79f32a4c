#include "wgs/flow.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace wgs {

namespace {
constexpr double kFlowEps = 1e-13;
}

MaxFlow::MaxFlow(std::size_t nodes) : adj_(nodes), level_(nodes), it_(nodes) {}

std::size_t MaxFlow::add_edge(std::size_t from, std::size_t to, double capacity) {
  const std::size_t id = edges_.size();
  edges_.push_back({to, capacity, capacity});
  adj_[from].push_back(id);
  edges_.push_back({from, 0.0, 0.0});
  adj_[to].push_back(id + 1);
  return id;
}

bool MaxFlow::bfs(std::size_t s, std::size_t t) {
  std::fill(level_.begin(), level_.end(), -1);
  std::queue<std::size_t> q;
  level_[s] = 0;
  q.push(s);
  while (!q.empty()) {
    const std::size_t v = q.front();
    q.pop();
    for (std::size_t id : adj_[v]) {
      const auto& e = edges_[id];
      if (e.cap > kFlowEps && level_[e.to] < 0) {
        level_[e.to] = level_[v] + 1;
        q.push(e.to);
      }
    }
  }
  return level_[t] >= 0;
}

double MaxFlow::dfs(std::size_t v, std::size_t t, double pushed) {
  if (v == t) return pushed;
  for (; it_[v] < adj_[v].size(); ++it_[v]) {
    const std::size_t id = adj_[v][it_[v]];
    auto& e = edges_[id];
    if (e.cap <= kFlowEps || level_[e.to] != level_[v] + 1) continue;
    const double got = dfs(e.to, t, std::min(pushed, e.cap));
    if (got > 0.0) {
      e.cap -= got;
      edges_[id ^ 1].cap += got;
      return got;
    }
  }
  return 0.0;
}

double MaxFlow::solve(std::size_t source, std::size_t sink) {
  source_ = source;
  double total = 0.0;
  while (bfs(source, sink)) {
    std::fill(it_.begin(), it_.end(), 0);
    while (const double f = dfs(source, sink, std::numeric_limits<double>::infinity())) total += f;
  }
  return total;
}

double MaxFlow::flow(std::size_t edge) const { return edges_[edge].initial - edges_[edge].cap; }

std::vector<bool> MaxFlow::source_side() const {
  std::vector<bool> seen(adj_.size(), false);
  std::queue<std::size_t> q;
  seen[source_] = true;
  q.push(source_);
  while (!q.empty()) {
    const std::size_t v = q.front();
    q.pop();
    for (std::size_t id : adj_[v]) {
      const auto& e = edges_[id];
      if (e.cap > kFlowEps && !seen[e.to]) {
        seen[e.to] = true;
        q.push(e.to);
      }
    }
  }
  return seen;
}

}  // namespace wgs
