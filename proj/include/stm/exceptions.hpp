#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "stm/core.hpp"
#include "stm/graphalg.hpp"
#include "stm/matching.hpp"
#include "stm/typed.hpp"

namespace stm::exceptions {

// exworst value for "every agent of the subtype is matched to the agent it
// finds exceptional"; ranks above every type.
inline constexpr TypeId kExceptional = -1;

// At most one exception per agent, each placed at the top, smti only.
bool is_one_top(const TypedInstance& inst);

struct Preprocessed {
  TypedInstance reduced;
  std::vector<AgentId> original;  // reduced agent id -> input agent id
  std::vector<std::pair<AgentId, AgentId>> forced;  // input agent ids
};

// Removes agents that find each other exceptional; they are paired in every
// stable matching.
Preprocessed preprocess_mutual(const TypedInstance& inst);

struct Subtype {
  TypeId type = -1;
  TypeId cls = -1;  // class rep of the best admirers' type, or the dummy
  bool operator==(const Subtype&) const = default;
};

struct SubtypeTable {
  std::vector<Subtype> subtypes;  // nonempty ones, sorted by (type, cls)
  std::vector<int> of_agent;      // index into subtypes
  std::vector<int> size;
  // Index of subtype (type, cls) or -1 when empty.
  int find(TypeId type, TypeId cls) const;
};

SubtypeTable compute_subtypes(const TypedInstance& inst);

// exworst per subtype index, values are class reps, the dummy or kExceptional.
std::vector<TypeId> exworst_of(const TypedInstance& inst, const SubtypeTable& st, const AgentMatching& m);
// Least desirable exworst over each type's subtypes; kAbsent for empty types.
std::vector<TypeId> derived_worst(const TypedInstance& inst, const SubtypeTable& st, const std::vector<TypeId>& exworst);
bool is_exception_stable(const TypedInstance& inst, const SubtypeTable& st, const std::vector<TypeId>& exworst);

// Agents are vertices 0..n-1, followed by n - 2c dummies.
graph::SimpleGraph build_exception_graph(const TypedInstance& inst, const SubtypeTable& st,
                                         const std::vector<TypeId>& exworst, int c);

struct Realised {
  int size = 0;
  AgentMatching matching;
};
// Largest matching realising exworst, by binary search on c.
std::optional<Realised> max_realising_exworst(const TypedInstance& inst, const SubtypeTable& st,
                                              const std::vector<TypeId>& exworst);

// Candidate exworst values of a subtype, best first.
std::vector<TypeId> exworst_candidates(const TypedInstance& inst, const Subtype& s);

struct ExceptionResult {
  int size = 0;
  AgentMatching matching;  // input agent ids, forced pairs included
  std::vector<Subtype> subtypes;
  std::vector<TypeId> exworst;
  std::vector<std::pair<AgentId, AgentId>> forced;
  std::int64_t functions_examined = 0;
};

ExceptionResult solve_1top_max_smti(const TypedInstance& inst, const typed::SolverOptions& opts = {});

}  // namespace stm::exceptions
