#include "doctest.h"
#include "stm/oracle.hpp"
#include "stm/quality.hpp"
#include "stm/typed.hpp"
#include "support.hpp"

using namespace stm;
using testing::parse;

namespace {

// m1 accepts both women, m2 only w1, and w1 prefers m1. The only stable
// matching is {m1-w1}; the perfect one is blocked by (m1,w1).
const char* kSquare = R"(problem smti
types 4
type 1 side=m count=1 names=m1 prefs=3 4
type 2 side=m count=1 names=m2 prefs=3
type 3 side=w count=1 names=w1 prefs=1 2
type 4 side=w count=1 names=w2 prefs=1
)";

const char* kComplete = R"(problem smti
types 2
type 1 side=w count=2 names=w1,w2 prefs=2
type 2 side=m count=2 names=m1,m2 prefs=1
)";

TypedInstance tiny(std::uint64_t seed) {
  auto kind = seed % 2 ? ProblemKind::srti : ProblemKind::smti;
  auto shape = testing::small_shape(gen::Model::typed, kind, seed, 6);
  shape.k = kind == ProblemKind::srti ? 1 + static_cast<int>(seed % 3) : 2 + static_cast<int>(seed % 2);
  return gen::generate(shape, seed);
}

}  // namespace

TEST_CASE("min bp: complete stable matching costs nothing") {
  auto inst = parse(kComplete);
  auto r = quality::solve_min_bp(inst, true);
  CHECK(r.value == 0);
  CHECK(r.matching.size() == 2);
  CHECK(quality::solve_min_ba(inst, true).value == 0);
}

TEST_CASE("min bp and min ba: the square instance") {
  auto inst = parse(kSquare);
  CHECK(quality::max_cardinality(inst) == 2);
  auto at_max = quality::solve_min_bp(inst, true);
  CHECK(at_max.value == 1);
  CHECK(at_max.value == oracle::min_bp_brute(inst, true).value);
  CHECK(oracle::blocking_report(inst, at_max.matching).blocking_pairs.size() == 1);
  CHECK(quality::solve_min_bp(inst, false).value == 0);
  auto ba = quality::solve_min_ba(inst, true);
  CHECK(ba.value == oracle::min_ba_brute(inst, true).value);
  CHECK(ba.value == 2);
}

TEST_CASE("exact bp: witnesses and impossible targets") {
  auto inst = parse(kSquare);
  auto zero = quality::solve_exact_bp(inst, 0);
  REQUIRE(zero);
  CHECK(oracle::blocking_report(inst, zero->matching).stable());
  for (int z = 1; z <= 4; ++z) {
    auto got = quality::solve_exact_bp(inst, z);
    CHECK(got.has_value() == oracle::exact_bp_brute(inst, z).has_value());
    if (got) CHECK(static_cast<int>(oracle::blocking_report(inst, got->matching).blocking_pairs.size()) == z);
  }
  CHECK_FALSE(quality::solve_exact_bp(inst, 1000000));
}

TEST_CASE("min ba: a lone acceptable pair") {
  auto inst = parse("problem smti\ntypes 2\ntype 1 side=m count=1 prefs=2\ntype 2 side=w count=1 prefs=1\n");
  CHECK(quality::solve_min_ba(inst, false).value == 0);
  TypeCountMatrix apart(2);
  apart.set(0, inst.dummy(), 1);
  apart.set(1, inst.dummy(), 1);
  CHECK(quality::count_ba_from_counts(inst, apart) == 2);
}

TEST_CASE("count formulas agree with the agent-level report") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    auto inst = tiny(seed);
    auto cp = quality::count_program(inst, false);
    std::vector<std::vector<std::int64_t>> s;
    std::vector<std::int64_t> l;
    quality::blocking_pair_form(inst, cp, s, l);
    oracle::enumerate_matchings(inst, [&](const AgentMatching& m) {
      auto report = oracle::blocking_report(inst, m);
      auto counts = typed::counts_of(inst, m);
      CHECK(quality::count_bp_from_counts(inst, counts) == static_cast<std::int64_t>(report.blocking_pairs.size()));
      CHECK(quality::count_ba_from_counts(inst, counts) == static_cast<std::int64_t>(report.blocking_agents.size()));
      std::vector<std::int64_t> x(cp.program.variable_count(), 0);
      for (TypeId i = 0; i <= inst.k(); ++i)
        for (TypeId j = i; j <= inst.k(); ++j)
          if (cp.var[i][j] >= 0) x[cp.var[i][j]] = counts.get(i, j);
      std::int64_t form = 0;
      for (size_t u = 0; u < x.size(); ++u) {
        form += l[u] * x[u];
        for (size_t v = 0; v < x.size(); ++v) form += s[u][v] * x[u] * x[v];
      }
      CHECK(form == 2 * static_cast<std::int64_t>(report.blocking_pairs.size()));
      ++checked;
      return true;
    });
  }
  CHECK(checked > 500);
}

TEST_CASE("quality solvers match brute force on tiny instances") {
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    auto inst = tiny(seed);
    for (bool max_size : {false, true}) {
      auto bp = quality::solve_min_bp(inst, max_size);
      CHECK(bp.value == oracle::min_bp_brute(inst, max_size).value);
      CHECK(static_cast<std::int64_t>(oracle::blocking_report(inst, bp.matching).blocking_pairs.size()) == bp.value);
      auto ba = quality::solve_min_ba(inst, max_size);
      CHECK(ba.value == oracle::min_ba_brute(inst, max_size).value);
      CHECK(static_cast<std::int64_t>(oracle::blocking_report(inst, ba.matching).blocking_agents.size()) == ba.value);
      if (max_size) {
        CHECK(oracle::matching_size(inst, bp.matching) == quality::max_cardinality(inst));
        CHECK(oracle::matching_size(inst, ba.matching) == quality::max_cardinality(inst));
      }
      auto cp = quality::count_program(inst, max_size);
      CHECK(quality::signature_of(cp, typed::counts_of(inst, ba.matching)) == quality::signature_of(cp, ba.counts));
    }
    for (int z = 0; z <= 2; ++z) {
      auto got = quality::solve_exact_bp(inst, z);
      REQUIRE(got.has_value() == oracle::exact_bp_brute(inst, z).has_value());
      if (got) CHECK(static_cast<int>(oracle::blocking_report(inst, got->matching).blocking_pairs.size()) == z);
    }
  }
}
