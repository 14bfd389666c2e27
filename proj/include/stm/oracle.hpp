#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stm/core.hpp"
#include "stm/matching.hpp"

namespace stm::oracle {

class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BlockingReport {
  std::set<std::pair<AgentId, AgentId>> blocking_pairs;
  std::set<AgentId> blocking_agents;
  // HRC only: one entry per detected block, e.g. "3(b) c1a,c1b -> h2,h2".
  std::vector<std::string> hrc_cases;

  bool stable() const { return blocking_pairs.empty(); }
  void add(AgentId a, AgentId b);
};

// Full blocking analysis. Dispatches to the couple rules for HRC.
BlockingReport blocking_report(const TypedInstance& inst, const AgentMatching& m);
// Early-exit variant; no validation.
bool is_stable(const TypedInstance& inst, const AgentPrefs& prefs,
               const std::vector<std::vector<AgentId>>& partners);

BlockingReport hrc_blocking_report(const TypedInstance& inst, const AgentMatching& m);

// Agent cap for exhaustive enumeration: 10, or 12 for bipartite kinds;
// STM_ORACLE_CAP overrides both.
int enumeration_cap(const TypedInstance& inst);

// Calls visit for every matching exactly once; stops early if visit
// returns false. Throws CapExceeded above the cap.
void enumerate_matchings(const TypedInstance& inst,
                         const std::function<bool(const AgentMatching&)>& visit);
std::vector<AgentMatching> all_matchings(const TypedInstance& inst);

// Matched agents on the resident side for HRT/HRC, pairs otherwise.
int matching_size(const TypedInstance& inst, const AgentMatching& m);

struct BruteResult {
  int value = 0;
  AgentMatching matching;
};

// nullopt means no stable matching exists.
std::optional<BruteResult> max_stable_brute(const TypedInstance& inst);
BruteResult min_bp_brute(const TypedInstance& inst, bool require_max_size);
BruteResult min_ba_brute(const TypedInstance& inst, bool require_max_size);
std::optional<AgentMatching> exact_bp_brute(const TypedInstance& inst, int z, bool require_max_size = false);
std::vector<AgentMatching> all_stable_matchings(const TypedInstance& inst);

// Complete stable matching search. Bipartite instances use a pruned
// search that skips interchangeable agents, so it runs well past the
// enumeration cap (up to 48 agents).
bool com_stable_exists_brute(const TypedInstance& inst);

}  // namespace stm::oracle
