#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stm/core.hpp"
#include "stm/matching.hpp"
#include "stm/quality.hpp"
#include "stm/typed.hpp"

namespace stm::refined {

// The counts cannot be realised under the refined lists, which happens when
// a refinement drops agents the counts need.
class RealisationError : public SemanticError {
 public:
  using SemanticError::SemanticError;
};

// Same instance with every refinement removed.
TypedInstance relaxation(const TypedInstance& inst);

// Builds a matching with exactly the counts m: for each type, partner types
// are served in preference order and receive the agents they rank highest;
// the chosen sets are then paired rank by rank.
AgentMatching realize_refined(const TypedInstance& inst, const TypeCountMatrix& m);

std::optional<typed::MaxStableResult> solve_max_refined(const TypedInstance& inst,
                                                        const typed::SolverOptions& opts = {});

struct QualityObjective {
  enum class Kind { min_bp, min_ba, exact_bp } kind = Kind::min_bp;
  std::int64_t z = 0;
  bool max_size = false;
};
std::optional<quality::QualityResult> solve_refined_quality(const TypedInstance& inst, const QualityObjective& obj,
                                                            const typed::SolverOptions& opts = {});

// Every remaining tie inside a type's list broken by agent index, the same
// way for all agents of the type.
TypedInstance break_ties(const TypedInstance& inst);

struct StrictTypesReport {
  bool strict_types = false;
  std::set<int> stable_sizes;
  bool exists = false;
  bool exists_tie_broken = false;
  int max_size_tie_broken = -1;
  bool equal_sizes() const { return stable_sizes.size() <= 1; }
  bool existence_preserved() const { return exists == exists_tie_broken; }
  bool holds() const {
    return equal_sizes() && existence_preserved() &&
           (!exists || max_size_tie_broken == *stable_sizes.rbegin());
  }
};

bool has_strict_types(const TypedInstance& inst);
// Enumerates all stable matchings of inst and of its tie-broken version.
StrictTypesReport verify_strict_types(const TypedInstance& inst);

}  // namespace stm::refined
