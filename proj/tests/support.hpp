#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "stm/core.hpp"
#include "stm/gen.hpp"
#include "stm/matching.hpp"

namespace testing {

inline stm::TypedInstance parse(const std::string& text) { return stm::parse_instance(text); }

// Agent lists keyed by name, ties as name sets.
using NamedLists = std::map<std::string, std::vector<std::set<std::string>>>;

inline NamedLists named_lists(const stm::AgentLevelInstance& a) {
  NamedLists out;
  for (size_t x = 0; x < a.names.size(); ++x) {
    auto& l = out[a.names[x]];
    for (const auto& g : a.prefs[x]) {
      std::set<std::string> s;
      for (int b : g) s.insert(a.names[b]);
      l.push_back(s);
    }
  }
  return out;
}

inline std::set<std::pair<std::string, std::string>> named_pairs(const stm::TypedInstance& inst,
                                                                 const stm::AgentMatching& m) {
  std::set<std::pair<std::string, std::string>> out;
  for (auto [a, b] : m.pairs) {
    auto x = inst.name(a), y = inst.name(b);
    out.emplace(std::min(x, y), std::max(x, y));
  }
  return out;
}

// Small random shapes used across the property suites.
inline stm::gen::Shape small_shape(stm::gen::Model model, stm::ProblemKind kind, std::uint64_t seed, int max_agents = 8) {
  stm::gen::Shape s;
  s.model = model;
  s.kind = kind;
  s.k = 2 + static_cast<int>(seed % 3);
  if (kind == stm::ProblemKind::srti) s.k = 1 + static_cast<int>(seed % 4);
  s.min_count = seed % 5 == 0 ? 0 : 1;
  s.max_count = 3;
  s.max_agents = max_agents;
  s.ties = 0.15 * static_cast<double>(seed % 4);
  s.accept = 0.6 + 0.1 * static_cast<double>(seed % 4);
  return s;
}

inline stm::TypedInstance random_instance(stm::gen::Model model, stm::ProblemKind kind, std::uint64_t seed,
                                          int max_agents = 8) {
  return stm::gen::generate(small_shape(model, kind, seed, max_agents), seed);
}

}  // namespace testing
