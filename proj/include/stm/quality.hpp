#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "stm/core.hpp"
#include "stm/matching.hpp"
#include "stm/smallip.hpp"
#include "stm/typed.hpp"

namespace stm::quality {

// Blocking pairs of any matching whose type counts are m. Exact for typed
// SMTI/SRTI instances, since agents of a type are interchangeable.
std::int64_t count_bp_from_counts(const TypedInstance& inst, const TypeCountMatrix& m);
// Blocking agents of any matching with counts m.
std::int64_t count_ba_from_counts(const TypedInstance& inst, const TypeCountMatrix& m);

// Largest matching ignoring stability.
int max_cardinality(const TypedInstance& inst);

struct QualityResult {
  std::int64_t value = 0;
  TypeCountMatrix counts;
  AgentMatching matching;
  std::int64_t signatures_examined = 0;
};

QualityResult solve_min_bp(const TypedInstance& inst, bool require_max_size);
QualityResult solve_min_ba(const TypedInstance& inst, bool require_max_size, const typed::SolverOptions& opts = {});
std::optional<QualityResult> solve_exact_bp(const TypedInstance& inst, std::int64_t z, bool require_max_size = false);

// Pair-count variables n{i,j}, i <= j, for mutually acceptable pairs and the
// dummy column. Shared by the programs above.
struct CountProgram {
  ip::IntegerProgram program;
  std::vector<std::vector<int>> var;  // (k+1) x (k+1), -1 if absent
  TypeCountMatrix decode(const std::vector<std::int64_t>& x) const;
};
CountProgram count_program(const TypedInstance& inst, bool require_max_size);
// x^T S x + l^T x equal to twice the blocking pair count.
void blocking_pair_form(const TypedInstance& inst, const CountProgram& cp,
                        std::vector<std::vector<std::int64_t>>& s, std::vector<std::int64_t>& l);

// Type-signature of a count matrix: bit per variable of count_program,
// set when that pair occurs at least once.
std::vector<bool> signature_of(const CountProgram& cp, const TypeCountMatrix& m);

}  // namespace stm::quality
