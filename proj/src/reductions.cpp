#include "stm/reductions.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "stm/oracle.hpp"

namespace stm::reductions {

UndirectedGraph parse_graph(const std::string& text) {
  std::istringstream in(text);
  UndirectedGraph g;
  int m = 0;
  if (!(in >> g.n >> m) || g.n < 0 || m < 0) throw SyntaxError(1, "graph header must be 'n m'");
  std::set<std::pair<int, int>> seen;
  for (int e = 0; e < m; ++e) {
    int u, v;
    if (!(in >> u >> v)) throw SyntaxError(e + 2, "expected an edge 'u v'");
    if (u < 0 || v < 0 || u >= g.n || v >= g.n) throw SemanticError("edge endpoint out of range");
    if (u == v) throw SemanticError("self-loop in graph");
    if (u > v) std::swap(u, v);
    if (!seen.insert({u, v}).second) throw SemanticError("parallel edge in graph");
    g.edges.emplace_back(u, v);
  }
  std::string extra;
  if (in >> extra) throw SyntaxError(m + 2, "trailing data after the edge list");
  return g;
}

UndirectedGraph load_graph(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_graph(ss.str());
}

namespace {

TypeSpec make_type(Side side, int count, std::vector<std::vector<TypeId>> groups, const std::string& prefix) {
  TypeSpec t;
  t.side = side;
  t.count = count;
  t.pref.groups = std::move(groups);
  for (int c = 0; c < count; ++c) t.names.push_back(prefix + std::to_string(c));
  return t;
}

}  // namespace

Gadget clique_to_com_smti(const UndirectedGraph& g, int r) {
  if (r < 0 || r > g.n) throw SemanticError("clique size must lie in [0, |V|]");
  const int m = static_cast<int>(g.edges.size());
  const int pairs = r * (r - 1) / 2;
  Gadget out;
  TypedInstance& inst = out.instance;
  inst.kind = ProblemKind::smti;
  if (m < pairs) {
    out.trivial_no = true;
    inst.types.push_back(make_type(Side::man, 1, {{1}}, "x"));
    inst.types.push_back(make_type(Side::woman, 0, {{0}}, "y"));
    inst.finalize();
    out.legend.push_back("trivial no: " + std::to_string(m) + " edges cannot hold a clique on " +
                         std::to_string(r) + " vertices");
    return out;
  }
  // 0-based ids of types 1..6.
  inst.types.push_back(make_type(Side::man, m, {{5}, {4}, {3}}, "e"));
  inst.types.push_back(make_type(Side::man, r, {{3}}, "p"));
  inst.types.push_back(make_type(Side::man, g.n - r, {{3}}, "q"));
  inst.types.push_back(make_type(Side::woman, g.n, {{1}, {0}, {2}}, "v"));
  inst.types.push_back(make_type(Side::woman, pairs, {{0}}, "f"));
  inst.types.push_back(make_type(Side::woman, m - pairs, {{0}}, "g"));
  inst.finalize();
  for (int e = 0; e < m; ++e) {
    auto [u, v] = g.edges[e];
    for (int end : {u, v}) {
      ExceptionEntry x;
      x.agent = inst.first_agent(0) + e;
      x.candidate = inst.first_agent(3) + end;
      x.placement = Placement::tie_between;
      x.first = 5;
      x.second = 4;
      inst.exceptions.push_back(x);
    }
    out.legend.push_back("edge " + std::to_string(u) + "-" + std::to_string(v) + " -> " + inst.name(inst.first_agent(0) + e));
  }
  for (int v = 0; v < g.n; ++v)
    out.legend.push_back("vertex " + std::to_string(v) + " -> " + inst.name(inst.first_agent(3) + v));
  return out;
}

std::string format_gadget(const Gadget& gadget) {
  std::string out;
  for (const auto& l : gadget.legend) out += "# " + l + "\n";
  return out + format_instance(gadget.instance);
}

bool has_clique(const UndirectedGraph& g, int r) {
  if (r <= 1) return r <= g.n;
  std::vector<std::vector<bool>> adj(g.n, std::vector<bool>(g.n, false));
  for (auto [u, v] : g.edges) adj[u][v] = adj[v][u] = true;
  std::vector<int> pick;
  std::function<bool(int)> grow = [&](int from) {
    if (static_cast<int>(pick.size()) == r) return true;
    for (int v = from; v < g.n; ++v) {
      if (std::all_of(pick.begin(), pick.end(), [&](int u) { return adj[u][v]; })) {
        pick.push_back(v);
        if (grow(v + 1)) return true;
        pick.pop_back();
      }
    }
    return false;
  };
  return grow(0);
}

ReductionCheck verify_reduction(const UndirectedGraph& g, int r) {
  ReductionCheck c;
  c.clique = has_clique(g, r);
  Gadget gad = clique_to_com_smti(g, r);
  c.complete_stable = !gad.trivial_no && oracle::com_stable_exists_brute(gad.instance);
  if (gad.trivial_no && oracle::com_stable_exists_brute(gad.instance))
    throw std::logic_error("trivial-no gadget admits a complete stable matching");
  return c;
}

std::vector<UndirectedGraph> all_graphs(int n) {
  std::vector<std::pair<int, int>> slots;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) slots.emplace_back(u, v);
  std::vector<UndirectedGraph> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << slots.size()); ++mask) {
    UndirectedGraph g;
    g.n = n;
    for (size_t s = 0; s < slots.size(); ++s)
      if (mask >> s & 1) g.edges.push_back(slots[s]);
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace stm::reductions
