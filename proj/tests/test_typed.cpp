#include "doctest.h"
#include "stm/oracle.hpp"
#include "stm/typed.hpp"
#include "support.hpp"

using namespace stm;
using namespace stm::typed;
using testing::parse;

namespace {

const char* kRelaxation = R"(problem smti
types 4
type 1 side=m count=3 names=m1,m2,m3 prefs=(2 3) 4
type 2 side=w count=2 names=w1,w2 prefs=1
type 3 side=w count=2 names=w3,w4 prefs=1
type 4 side=w count=3 names=w5,w6,w7 prefs=1
)";

const char* kOddCycle = R"(problem srti
types 3
type 1 side=none count=1 names=a prefs=2 3
type 2 side=none count=1 names=b prefs=3 1
type 3 side=none count=1 names=c prefs=1 2
)";

const char* kMutual = R"(problem smti
types 2
type 1 side=m count=1 prefs=2
type 2 side=w count=1 prefs=1
)";

WorstProfile profile(std::vector<TypeId> w, std::vector<TypeId> s) { return {std::move(w), std::move(s)}; }

}  // namespace

TEST_CASE("is_I_stable: first choices and mutual dummies") {
  auto inst = parse(kMutual);
  const TypeId d = inst.dummy();
  CHECK(is_I_stable(inst, profile({1, 0}, {kAbsent, kAbsent})));
  CHECK_FALSE(is_I_stable(inst, profile({d, d}, {kAbsent, kAbsent})));
  CHECK_THROWS_AS(is_I_stable(inst, profile({1, 0}, {1, kAbsent})), SemanticError);
}

TEST_CASE("is_I_stable: example 2 relaxation profile") {
  auto inst = parse(kRelaxation);
  const TypeId d = inst.dummy();
  CHECK(is_I_stable_bipartite(inst, {3, 0, 0, d}));
  CHECK(is_I_stable(inst, profile({3, 0, 0, d}, {3, 0, 0, d})));
  // Four women of the (2 3) class cannot all be matched to three men, so
  // nothing realises it.
  CHECK_FALSE(max_realising_smti(inst, {3, 0, 0, d}));
  CHECK_FALSE(max_realising_srti(inst, profile({3, 0, 0, d}, {kAbsent, kAbsent, kAbsent, kAbsent})));
}

TEST_CASE("is_I_stable: same-type pairs use secondworst") {
  auto inst = parse("problem srti\ntypes 1\ntype 1 side=none count=3 prefs=1\n");
  const TypeId d = inst.dummy();
  // With two agents single they would pair up; with one single and a pair
  // nobody strictly gains.
  CHECK(is_I_stable(inst, profile({d}, {0})));
  CHECK_FALSE(is_I_stable(inst, profile({d}, {d})));
}

TEST_CASE("max_realising_srti: small values") {
  auto inst = parse(kRelaxation);
  const TypeId d = inst.dummy();
  // The empty matching realises an all-dummy profile, but the maximum is
  // any matching whose agents all stay within their lists.
  auto loose = max_realising_srti(inst, profile({d, d, d, d}, {d, d, d, d}));
  REQUIRE(loose);
  CHECK(loose->size == 3);
  auto apart = parse("problem smti\ntypes 3\ntype 1 side=m count=1 prefs=2\ntype 2 side=w count=1 prefs=3\n"
                     "type 3 side=m count=1 prefs=2\n");
  const TypeId ad = apart.dummy();
  auto none = max_realising_srti(apart, profile({ad, ad, ad}, {kAbsent, kAbsent, kAbsent}));
  REQUIRE(none);
  CHECK(none->size == 1);
  auto lonely = parse("problem smti\ntypes 3\ntype 1 side=m count=1 prefs=2\ntype 2 side=w count=1 prefs=3\n"
                      "type 3 side=m count=0 prefs=2\n");
  const TypeId ld = lonely.dummy();
  auto zero = max_realising_srti(lonely, profile({ld, ld, kAbsent}, {kAbsent, kAbsent, kAbsent}));
  REQUIRE(zero);
  CHECK(zero->size == 0);
  auto best = max_realising_srti(inst, profile({1, d, d, d}, {kAbsent, kAbsent, kAbsent, kAbsent}));
  REQUIRE(best);
  CHECK(best->size == 3);
}

TEST_CASE("solve_max_srti: examples") {
  auto r = solve_max_srti(parse(kRelaxation));
  REQUIRE(r);
  CHECK(r->size == 3);
  CHECK(oracle::blocking_report(parse(kRelaxation), r->matching).stable());
  auto flat = solve_max_srti(parse("problem smti\ntypes 2\ntype 1 side=m count=3 prefs=2\ntype 2 side=w count=5 prefs=1\n"));
  REQUIRE(flat);
  CHECK(flat->size == 3);
  CHECK_FALSE(solve_max_srti(parse(kOddCycle)));
}

TEST_CASE("build_flow_network: lemma 5 arcs") {
  auto inst = parse(kRelaxation);
  const TypeId d = inst.dummy();
  const int k = inst.k();
  auto lay = build_flow_network(inst, {1, d, d, d}, 3);
  auto cap = [&](int from, int to) {
    std::int64_t c = -1;
    for (const auto& a : lay.network.arcs())
      if (a.from == from && a.to == to) c = a.capacity;
    return c;
  };
  CHECK(cap(0, 2 + 1) == 2);
  CHECK(cap(0, 2 + 2) == 2);
  CHECK(cap(0, 2 + 3) == 3);
  CHECK(cap(0, 2 + k) == 0);
  CHECK(cap(2 + k, 3 + k) == 0);
  CHECK(cap(2 + 1, 3 + k) == 2);
  CHECK(cap(3 + k, 1) == 4);
  // Only the (2 3) class is allowed for the men.
  CHECK(cap(2 + 3, 2 + 0) == -1);
  CHECK(cap(2 + 1, 2 + 0) == 2);

  auto everyone = build_flow_network(inst, {d, d, d, d}, 0);
  int dummy_arcs = 0;
  for (const auto& a : everyone.network.arcs()) dummy_arcs += (a.to == 3 + k) + (a.from == 2 + k && a.to < 2 + k);
  CHECK(dummy_arcs == 3 + 1 + 1);
}

TEST_CASE("max_realising_smti: small values") {
  auto inst = parse(kRelaxation);
  const TypeId d = inst.dummy();
  auto r = max_realising_smti(inst, {1, d, d, d});
  REQUIRE(r);
  CHECK(r->size == 3);
  auto pair = parse(kMutual);
  auto one = max_realising_smti(pair, {1, 0});
  REQUIRE(one);
  CHECK(one->size == 1);
  auto apart = parse("problem smti\ntypes 3\ntype 1 side=m count=1 prefs=2\ntype 2 side=w count=1 prefs=3\n"
                     "type 3 side=m count=0 prefs=2\n");
  const TypeId ad = apart.dummy();
  auto zero = max_realising_smti(apart, {ad, ad, kAbsent});
  REQUIRE(zero);
  CHECK(zero->size == 0);
}

TEST_CASE("counts_to_matching") {
  auto pair = parse(kMutual);
  TypeCountMatrix m(2);
  m.set(0, 1, 1);
  auto matching = counts_to_matching(pair, m);
  REQUIRE(matching.size() == 1);
  CHECK(testing::named_pairs(pair, matching).size() == 1);
  TypeCountMatrix empty(2);
  empty.set(0, pair.dummy(), 1);
  empty.set(1, pair.dummy(), 1);
  CHECK(counts_to_matching(pair, empty).size() == 0);
  CHECK_THROWS_AS(counts_to_matching(pair, TypeCountMatrix(2)), SemanticError);

  auto inst = parse(kRelaxation);
  auto r = solve_max_smti(inst);
  REQUIRE(r);
  auto built = counts_to_matching(inst, r->counts);
  CHECK(built.size() == 3);
  CHECK(counts_of(inst, built) == r->counts);
}

TEST_CASE("profile characterisation matches the oracle on every matching") {
  int matchings = 0;
  for (std::uint64_t seed = 0; seed < 90; ++seed) {
    auto kind = std::array{ProblemKind::smti, ProblemKind::srti, ProblemKind::hrt}[seed % 3];
    auto inst = testing::random_instance(gen::Model::typed, kind, seed, 7);
    oracle::enumerate_matchings(inst, [&](const AgentMatching& m) {
      bool stable = oracle::blocking_report(inst, m).stable();
      auto p = profile_of(inst, m);
      CHECK(is_feasible(inst, p));
      CHECK(is_I_stable(inst, p) == stable);
      if (inst.bipartite()) CHECK(is_I_stable_bipartite(inst, p.worst) == stable);
      ++matchings;
      return true;
    });
  }
  CHECK(matchings > 1000);
}

TEST_CASE("flow and integer program agree on every I-stable worst") {
  int samples = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto inst = testing::random_instance(gen::Model::typed, seed % 2 ? ProblemKind::hrt : ProblemKind::smti, seed, 9);
    for (const auto& p : feasible_profiles(inst, false)) {
      if (!is_I_stable_bipartite(inst, p.worst)) continue;
      auto flow = max_realising_smti(inst, p.worst);
      auto ip = max_realising_srti(inst, p);
      CHECK(flow.has_value() == ip.has_value());
      if (flow && ip) CHECK(flow->size == ip->size);
      ++samples;
    }
  }
  CHECK(samples > 200);
}

TEST_CASE("solvers match the brute-force optimum") {
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    auto kind = std::array{ProblemKind::smti, ProblemKind::srti, ProblemKind::hrt}[seed % 3];
    auto inst = testing::random_instance(gen::Model::typed, kind, seed);
    auto want = oracle::max_stable_brute(inst);
    auto got = inst.bipartite() ? solve_max_smti(inst) : solve_max_srti(inst);
    REQUIRE(want.has_value() == got.has_value());
    if (!got) continue;
    CHECK(got->size == want->value);
    CHECK(oracle::blocking_report(inst, got->matching).stable());
    CHECK(oracle::matching_size(inst, got->matching) == got->size);
    if (inst.bipartite()) {
      auto via_ip = solve_max_srti(inst);
      REQUIRE(via_ip);
      CHECK(via_ip->size == got->size);
    }
  }
}

TEST_CASE("jobs do not change the answer") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto inst = testing::random_instance(gen::Model::typed, ProblemKind::srti, seed, 8);
    auto one = solve_max_srti(inst, {1});
    auto four = solve_max_srti(inst, {4});
    REQUIRE(one.has_value() == four.has_value());
    if (one) CHECK(one->matching.canonical().pairs == four->matching.canonical().pairs);
  }
}
