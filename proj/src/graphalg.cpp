#include "stm/graphalg.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <string>

namespace stm::graph {

FlowNetwork::FlowNetwork(int vertices, int source, int sink) : n_(vertices), s_(source), t_(sink) {
  if (source < 0 || sink < 0 || source >= vertices || sink >= vertices || source == sink)
    throw std::invalid_argument("bad source/sink");
}

int FlowNetwork::add_arc(int from, int to, std::int64_t capacity) {
  if (from < 0 || to < 0 || from >= n_ || to >= n_) throw std::invalid_argument("arc endpoint out of range");
  if (capacity < 0) throw std::invalid_argument("negative capacity");
  if (to == s_ || from == t_) throw std::invalid_argument("arcs may not enter the source or leave the sink");
  arcs_.push_back({from, to, capacity});
  return static_cast<int>(arcs_.size()) - 1;
}

namespace {

class Dinic {
 public:
  explicit Dinic(const FlowNetwork& net) : n_(net.vertex_count()), head_(n_), level_(n_), it_(n_) {
    for (const auto& a : net.arcs()) {
      head_[a.from].push_back(static_cast<int>(edges_.size()));
      edges_.push_back({a.to, a.capacity});
      head_[a.to].push_back(static_cast<int>(edges_.size()));
      edges_.push_back({a.from, 0});
    }
  }

  std::int64_t run(int s, int t) {
    std::int64_t total = 0;
    while (bfs(s, t)) {
      std::fill(it_.begin(), it_.end(), 0);
      while (std::int64_t f = dfs(s, t, std::numeric_limits<std::int64_t>::max())) total += f;
    }
    return total;
  }

  std::int64_t flow_on(int arc) const { return edges_[2 * arc + 1].cap; }

  std::vector<bool> reachable(int s) const {
    std::vector<bool> seen(n_, false);
    std::queue<int> q;
    q.push(s);
    seen[s] = true;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int e : head_[u])
        if (edges_[e].cap > 0 && !seen[edges_[e].to]) {
          seen[edges_[e].to] = true;
          q.push(edges_[e].to);
        }
    }
    return seen;
  }

 private:
  struct Edge {
    int to;
    std::int64_t cap;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int e : head_[u])
        if (edges_[e].cap > 0 && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[u] + 1;
          q.push(edges_[e].to);
        }
    }
    return level_[t] >= 0;
  }

  std::int64_t dfs(int u, int t, std::int64_t pushed) {
    if (u == t) return pushed;
    for (size_t& i = it_[u]; i < head_[u].size(); ++i) {
      int e = head_[u][i];
      int v = edges_[e].to;
      if (edges_[e].cap <= 0 || level_[v] != level_[u] + 1) continue;
      if (std::int64_t f = dfs(v, t, std::min(pushed, edges_[e].cap))) {
        edges_[e].cap -= f;
        edges_[e ^ 1].cap += f;
        return f;
      }
    }
    return 0;
  }

  int n_;
  std::vector<std::vector<int>> head_;
  std::vector<Edge> edges_;
  std::vector<int> level_;
  std::vector<size_t> it_;
};

}  // namespace

FlowResult max_flow(const FlowNetwork& net) {
  Dinic d(net);
  FlowResult r;
  r.value = d.run(net.source(), net.sink());
  for (int a = 0; a < static_cast<int>(net.arcs().size()); ++a) r.flow.push_back(d.flow_on(a));
  r.source_side = d.reachable(net.source());
  for (const auto& a : net.arcs())
    if (r.source_side[a.from] && !r.source_side[a.to]) r.cut_capacity += a.capacity;
  if (!verify_flow(net, r)) throw std::logic_error("max-flow certificate check failed");
  return r;
}

bool verify_flow(const FlowNetwork& net, const FlowResult& r) {
  const auto& arcs = net.arcs();
  if (r.flow.size() != arcs.size()) return false;
  std::vector<std::int64_t> excess(net.vertex_count(), 0);
  for (size_t a = 0; a < arcs.size(); ++a) {
    if (r.flow[a] < 0 || r.flow[a] > arcs[a].capacity) return false;
    excess[arcs[a].from] -= r.flow[a];
    excess[arcs[a].to] += r.flow[a];
  }
  for (int v = 0; v < net.vertex_count(); ++v)
    if (v != net.source() && v != net.sink() && excess[v] != 0) return false;
  if (excess[net.sink()] != r.value) return false;
  if (!r.source_side[net.source()] || r.source_side[net.sink()]) return false;
  std::int64_t cut = 0;
  for (const auto& a : arcs)
    if (r.source_side[a.from] && !r.source_side[a.to]) cut += a.capacity;
  return cut == r.value && cut == r.cut_capacity;
}

void SimpleGraph::add_edge(int u, int v) {
  if (u == v) throw std::invalid_argument("self-loop");
  if (u < 0 || v < 0 || u >= vertex_count() || v >= vertex_count()) throw std::invalid_argument("vertex out of range");
  if (has_edge(u, v)) throw std::invalid_argument("parallel edge");
  adj_[u].push_back(v);
  adj_[v].push_back(u);
}

bool SimpleGraph::has_edge(int u, int v) const {
  return std::find(adj_[u].begin(), adj_[u].end(), v) != adj_[u].end();
}

std::vector<std::pair<int, int>> SimpleGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int u = 0; u < vertex_count(); ++u)
    for (int v : adj_[u])
      if (u < v) out.emplace_back(u, v);
  return out;
}

namespace {

// Classic O(V^3) blossom search from each free vertex.
class Blossom {
 public:
  explicit Blossom(const SimpleGraph& g)
      : g_(g), n_(g.vertex_count()), mate_(n_, -1), parent_(n_), base_(n_), used_(n_), blossom_(n_) {}

  std::vector<int> run() {
    // Greedy start keeps the augmentation count low.
    for (int u = 0; u < n_; ++u)
      if (mate_[u] < 0)
        for (int v : g_.neighbours(u))
          if (mate_[v] < 0) {
            mate_[u] = v;
            mate_[v] = u;
            break;
          }
    for (int u = 0; u < n_; ++u) {
      if (mate_[u] >= 0) continue;
      int v = find_path(u);
      while (v >= 0) {
        int pv = parent_[v], ppv = mate_[pv];
        mate_[v] = pv;
        mate_[pv] = v;
        v = ppv;
      }
    }
    return mate_;
  }

 private:
  int lca(int a, int b) {
    std::vector<bool> seen(n_, false);
    while (true) {
      a = base_[a];
      seen[a] = true;
      if (mate_[a] < 0) break;
      a = parent_[mate_[a]];
    }
    while (true) {
      b = base_[b];
      if (seen[b]) return b;
      b = parent_[mate_[b]];
    }
  }

  void mark_path(int v, int b, int child) {
    while (base_[v] != b) {
      blossom_[base_[v]] = blossom_[base_[mate_[v]]] = true;
      parent_[v] = child;
      child = mate_[v];
      v = parent_[mate_[v]];
    }
  }

  int find_path(int root) {
    std::fill(used_.begin(), used_.end(), false);
    std::fill(parent_.begin(), parent_.end(), -1);
    for (int i = 0; i < n_; ++i) base_[i] = i;
    used_[root] = true;
    std::queue<int> q;
    q.push(root);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int to : g_.neighbours(v)) {
        if (base_[v] == base_[to] || mate_[v] == to) continue;
        if (to == root || (mate_[to] >= 0 && parent_[mate_[to]] >= 0)) {
          int cur = lca(v, to);
          std::fill(blossom_.begin(), blossom_.end(), false);
          mark_path(v, cur, to);
          mark_path(to, cur, v);
          for (int i = 0; i < n_; ++i)
            if (blossom_[base_[i]]) {
              base_[i] = cur;
              if (!used_[i]) {
                used_[i] = true;
                q.push(i);
              }
            }
        } else if (parent_[to] < 0) {
          parent_[to] = v;
          if (mate_[to] < 0) return to;
          used_[mate_[to]] = true;
          q.push(mate_[to]);
        }
      }
    }
    return -1;
  }

  const SimpleGraph& g_;
  int n_;
  std::vector<int> mate_, parent_, base_;
  std::vector<bool> used_, blossom_;
};

}  // namespace

std::vector<int> max_matching(const SimpleGraph& g) { return Blossom(g).run(); }

int matching_cardinality(const std::vector<int>& mate) {
  int c = 0;
  for (size_t v = 0; v < mate.size(); ++v)
    if (mate[v] > static_cast<int>(v)) ++c;
  return c;
}

bool has_perfect_matching(const SimpleGraph& g) {
  if (g.vertex_count() % 2) return false;
  return 2 * matching_cardinality(max_matching(g)) == g.vertex_count();
}

}  // namespace stm::graph
