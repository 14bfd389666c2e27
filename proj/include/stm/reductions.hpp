#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stm/core.hpp"

namespace stm::reductions {

struct UndirectedGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // u < v
};

// "n m" on the first line, then m lines "u v" with 0-based vertices.
UndirectedGraph parse_graph(const std::string& text);
UndirectedGraph load_graph(const std::string& path);

struct Gadget {
  TypedInstance instance;
  // |E| < C(r,2): the instance is a single man with nobody to marry.
  bool trivial_no = false;
  // Comment lines mapping edges and vertices to agent names.
  std::vector<std::string> legend;
};

// Six types: edge men, r men, |V|-r men, vertex women, C(r,2) women and
// |E|-C(r,2) women. Each edge man ranks its two endpoint women in a tie
// between types 6 and 5. Complete stable matchings exist iff G has an
// r-clique.
Gadget clique_to_com_smti(const UndirectedGraph& g, int r);
std::string format_gadget(const Gadget& gadget);

bool has_clique(const UndirectedGraph& g, int r);

struct ReductionCheck {
  bool clique = false;
  bool complete_stable = false;
  bool agrees() const { return clique == complete_stable; }
};
ReductionCheck verify_reduction(const UndirectedGraph& g, int r);

// Every simple graph on n labelled vertices.
std::vector<UndirectedGraph> all_graphs(int n);

}  // namespace stm::reductions
