#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace stm::graph {

class FlowNetwork {
 public:
  struct Arc {
    int from;
    int to;
    std::int64_t capacity;
  };

  FlowNetwork(int vertices, int source, int sink);
  int add_arc(int from, int to, std::int64_t capacity);

  int vertex_count() const { return n_; }
  int source() const { return s_; }
  int sink() const { return t_; }
  const std::vector<Arc>& arcs() const { return arcs_; }

 private:
  int n_, s_, t_;
  std::vector<Arc> arcs_;
};

struct FlowResult {
  std::int64_t value = 0;
  std::vector<std::int64_t> flow;    // per arc
  std::vector<bool> source_side;     // min cut certificate
  std::int64_t cut_capacity = 0;
};

// Dinic's algorithm. The residual-reachability cut is always computed and
// compared against the flow value; a mismatch throws std::logic_error.
FlowResult max_flow(const FlowNetwork& net);

// Checks conservation, capacities and the cut certificate of a result.
bool verify_flow(const FlowNetwork& net, const FlowResult& r);

class SimpleGraph {
 public:
  explicit SimpleGraph(int vertices) : adj_(vertices) {}
  void add_edge(int u, int v);
  bool has_edge(int u, int v) const;
  int vertex_count() const { return static_cast<int>(adj_.size()); }
  const std::vector<int>& neighbours(int v) const { return adj_[v]; }
  std::vector<std::pair<int, int>> edges() const;

 private:
  std::vector<std::vector<int>> adj_;
};

// Edmonds' blossom algorithm; mate[v] = -1 when v is unmatched.
std::vector<int> max_matching(const SimpleGraph& g);
int matching_cardinality(const std::vector<int>& mate);
bool has_perfect_matching(const SimpleGraph& g);

}  // namespace stm::graph
