#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stm/core.hpp"
#include "stm/graphalg.hpp"
#include "stm/matching.hpp"

namespace stm::typed {

inline constexpr TypeId kAbsent = -1;

// Per real type: the least and second-least desirable partner type. Values
// are class representatives (smallest id among tied types) or the dummy.
// Empty types carry kAbsent in both fields.
struct WorstProfile {
  std::vector<TypeId> worst;
  std::vector<TypeId> secondworst;
  bool operator==(const WorstProfile&) const = default;
};

struct SolverOptions {
  int jobs = 1;
};

struct MaxStableResult {
  int size = 0;
  TypeCountMatrix counts;
  AgentMatching matching;
  WorstProfile profile;
  std::int64_t profiles_examined = 0;
  std::string path;  // "ip" or "flow"
};

bool is_feasible(const TypedInstance& inst, const WorstProfile& p);
// Throws SemanticError for an infeasible profile.
bool is_I_stable(const TypedInstance& inst, const WorstProfile& p);
// Bipartite test on worst alone.
bool is_I_stable_bipartite(const TypedInstance& inst, const std::vector<TypeId>& worst);

WorstProfile profile_of(const TypedInstance& inst, const AgentMatching& m);
TypeCountMatrix counts_of(const TypedInstance& inst, const AgentMatching& m);
AgentMatching counts_to_matching(const TypedInstance& inst, const TypeCountMatrix& m);

// Candidate values per type, in enumeration order.
std::vector<TypeId> worst_candidates(const TypedInstance& inst, TypeId i);
std::vector<TypeId> secondworst_candidates(const TypedInstance& inst, TypeId i);
// Every feasible profile, in lexicographic candidate order.
std::vector<WorstProfile> feasible_profiles(const TypedInstance& inst, bool with_secondworst = true);

struct Realised {
  int size = 0;
  TypeCountMatrix counts;
};

// Largest matching realising p, via the integer program. nullopt when no
// matching realises p. A kAbsent secondworst drops that constraint.
std::optional<Realised> max_realising_srti(const TypedInstance& inst, const WorstProfile& p);
std::optional<MaxStableResult> solve_max_srti(const TypedInstance& inst, const SolverOptions& opts = {});

struct FlowLayout {
  graph::FlowNetwork network;
  int n1 = 0;  // slots on the woman/hospital side
  int n2 = 0;  // slots on the man/resident side
  std::vector<int> pair_arc;  // arc index for (i,j) at i*(k)+j, -1 if absent
};

// Vertices: s=0, t=1, v_i = 2+i, d_w = 2+k, d_m = 3+k.
FlowLayout build_flow_network(const TypedInstance& inst, const std::vector<TypeId>& worst, int c);
std::optional<Realised> max_realising_smti(const TypedInstance& inst, const std::vector<TypeId>& worst);
std::optional<MaxStableResult> solve_max_smti(const TypedInstance& inst, const SolverOptions& opts = {});

// Types on the woman/hospital side of a bipartite instance.
bool on_first_side(const TypedInstance& inst, TypeId t);

}  // namespace stm::typed
