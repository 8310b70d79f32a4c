#pragma once

#include <cstddef>
#include <vector>

namespace wgs {

// Dinic max-flow on real capacities; small graphs only.
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t nodes);
  std::size_t add_edge(std::size_t from, std::size_t to, double capacity);
  double solve(std::size_t source, std::size_t sink);
  double flow(std::size_t edge) const;
  // Nodes reachable from the source in the residual graph after solve().
  std::vector<bool> source_side() const;

 private:
  struct Edge {
    std::size_t to;
    double cap;
    double initial;
  };
  bool bfs(std::size_t s, std::size_t t);
  double dfs(std::size_t v, std::size_t t, double pushed);

  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<int> level_;
  std::vector<std::size_t> it_;
  std::size_t source_ = 0;
};

}  // namespace wgs
