#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stm/core.hpp"

namespace stm {

// Unordered agent pairs. A hospital appears once per assigned resident.
struct AgentMatching {
  std::vector<std::pair<AgentId, AgentId>> pairs;

  void add(AgentId a, AgentId b) { pairs.emplace_back(std::min(a, b), std::max(a, b)); }
  // Partners of each agent, sorted.
  std::vector<std::vector<AgentId>> partners(int agent_count) const;
  // Pairs with a canonical order, for comparisons.
  AgentMatching canonical() const;
  int size() const { return static_cast<int>(pairs.size()); }
};

// Throws SemanticError if a pair is unacceptable, repeated, exceeds a
// capacity or splits a couple.
void validate_matching(const TypedInstance& inst, const AgentMatching& m);

AgentMatching parse_matching(const TypedInstance& inst, const std::string& text);
AgentMatching load_matching(const TypedInstance& inst, const std::string& path);

}  // namespace stm
