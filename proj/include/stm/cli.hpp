#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "stm/core.hpp"

namespace stm::cli {

enum Exit : int {
  kOk = 0,
  kUnstable = 1,       // check: blocking pairs found
  kNoStable = 2,
  kUnsupported = 3,
  kInputError = 4,
  kVerifyFailed = 5,   // solver and checker disagree
};

using Report = nlohmann::ordered_json;

// FNV-1a over the file bytes, as 16 hex digits.
std::string digest(const std::string& text);

// Text rendering of a report: one "key value" line per scalar field,
// arrays of pairs as "pair a b" lines, other arrays space separated.
std::string render_text(const Report& r);

struct SolveOptions {
  std::string objective = "max-size";  // max-size | min-bp | min-ba | exact-bp:Z
  bool max_size = false;
  int jobs = 1;
};

// Solves and re-verifies. exit_code is set on the returned report's side;
// throws InputError for bad input.
Report solve(const TypedInstance& inst, const std::string& text, const SolveOptions& opts, int& exit_code);

Report check(const TypedInstance& inst, const std::string& matching_text, int& exit_code);

struct ScalingRow {
  int n = 0;
  std::int64_t profiles = 0;
  int size = 0;
  double wall_ms = 0;
};
// solve_max_smti on one k-type shape scaled to each n.
std::vector<ScalingRow> scaling_rows(int k, const std::vector<int>& sizes, std::uint64_t seed);

// Entry point shared by the stm binary and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stm::cli
