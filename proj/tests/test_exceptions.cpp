#include "doctest.h"
#include "stm/exceptions.hpp"
#include "stm/oracle.hpp"
#include "stm/typed.hpp"
#include "support.hpp"

using namespace stm;
using namespace stm::exceptions;
using testing::parse;

namespace {

// m1 ranks type 2 over type 3 but considers w2 exceptional.
const char* kOneManTwoWomen = R"(problem smti
types 3
type 1 side=m count=1 names=m1 prefs=2 3
type 2 side=w count=1 names=w1 prefs=1
type 3 side=w count=1 names=w2 prefs=1
except agent=m1 cand=w2 place=top
)";

const char* kMutual = R"(problem smti
types 2
type 1 side=m count=2 names=m1,m2 prefs=2
type 2 side=w count=2 names=w1,w2 prefs=1
except agent=m1 cand=w1 place=top
except agent=w1 cand=m1 place=top
)";

TypedInstance one_top(std::uint64_t seed, int max_agents = 8) {
  auto shape = testing::small_shape(gen::Model::one_top, ProblemKind::smti, seed, max_agents);
  shape.exceptions = 0.2 + 0.1 * static_cast<double>(seed % 5);
  return gen::generate(shape, seed);
}

}  // namespace

TEST_CASE("preprocess: mutual exceptions become forced pairs") {
  auto inst = parse(kMutual);
  auto pre = preprocess_mutual(inst);
  REQUIRE(pre.forced.size() == 1);
  CHECK(testing::named_pairs(inst, AgentMatching{pre.forced}) ==
        std::set<std::pair<std::string, std::string>>{{"m1", "w1"}});
  CHECK(pre.reduced.agent_count() == 2);
  for (AgentId a = 0; a < pre.reduced.agent_count(); ++a)
    CHECK(inst.name(pre.original[a]) == pre.reduced.name(a));
}

TEST_CASE("preprocess: no mutual pair leaves the instance alone") {
  auto none = parse(kOneManTwoWomen);
  CHECK(preprocess_mutual(none).forced.empty());
  CHECK(preprocess_mutual(none).reduced.agent_count() == 3);
  auto chain = parse(R"(problem smti
types 2
type 1 side=m count=2 names=m1,m2 prefs=2
type 2 side=w count=1 names=w1 prefs=1
except agent=m1 cand=w1 place=top
except agent=w1 cand=m2 place=top
)");
  auto pre = preprocess_mutual(chain);
  CHECK(pre.forced.empty());
  CHECK(pre.reduced.agent_count() == 3);
}

TEST_CASE("subtypes: admired and unadmired agents") {
  auto inst = parse(kOneManTwoWomen);
  auto st = compute_subtypes(inst);
  auto sub = [&](const char* name) { return st.subtypes[st.of_agent[*inst.find_agent(name)]]; };
  CHECK(sub("w2") == Subtype{2, 0});
  CHECK(sub("w1") == Subtype{1, inst.dummy()});
  CHECK(sub("m1") == Subtype{0, inst.dummy()});
  CHECK(st.find(2, 0) >= 0);
  CHECK(st.find(2, inst.dummy()) == -1);
}

TEST_CASE("subtypes: the best admirer decides the class") {
  auto inst = parse(R"(problem smti
types 5
type 1 side=w count=1 names=w prefs=(2 3) 4 5
type 2 side=m count=1 names=a prefs=1
type 3 side=m count=1 names=b prefs=1
type 4 side=m count=1 names=c prefs=1
type 5 side=m count=1 names=d prefs=1
except agent=a cand=w place=top
except agent=d cand=w place=top
)");
  auto st = compute_subtypes(inst);
  CHECK(st.subtypes[st.of_agent[*inst.find_agent("w")]] == Subtype{0, 1});
}

TEST_CASE("exception stability: the one-man example") {
  auto inst = parse(kOneManTwoWomen);
  auto st = compute_subtypes(inst);
  AgentMatching m;
  m.add(*inst.find_agent("m1"), *inst.find_agent("w2"));
  auto ex = exworst_of(inst, st, m);
  CHECK(ex[st.find(2, 0)] == 0);
  CHECK(ex[st.find(0, inst.dummy())] == kExceptional);
  CHECK(is_exception_stable(inst, st, ex));
  AgentMatching other;
  other.add(*inst.find_agent("m1"), *inst.find_agent("w1"));
  CHECK_FALSE(is_exception_stable(inst, st, exworst_of(inst, st, other)));
}

TEST_CASE("exception stability without exceptions is the bipartite test") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto inst = testing::random_instance(gen::Model::typed, ProblemKind::smti, seed, 7);
    auto st = compute_subtypes(inst);
    oracle::enumerate_matchings(inst, [&](const AgentMatching& m) {
      auto ex = exworst_of(inst, st, m);
      CHECK(is_exception_stable(inst, st, ex) ==
            typed::is_I_stable_bipartite(inst, typed::profile_of(inst, m).worst));
      return true;
    });
  }
}

TEST_CASE("exception graph: sizes and edges") {
  auto inst = parse(kOneManTwoWomen);
  auto st = compute_subtypes(inst);
  AgentMatching m;
  m.add(*inst.find_agent("m1"), *inst.find_agent("w2"));
  auto ex = exworst_of(inst, st, m);
  auto g = build_exception_graph(inst, st, ex, 1);
  CHECK(g.vertex_count() == 3 + 1);
  auto nb = g.neighbours(*inst.find_agent("m1"));
  CHECK(std::find(nb.begin(), nb.end(), *inst.find_agent("w2")) != nb.end());
  CHECK_THROWS(build_exception_graph(inst, st, ex, 2));

  auto plain = parse("problem smti\ntypes 2\ntype 1 side=m count=2 prefs=2\ntype 2 side=w count=2 prefs=1\n");
  auto pst = compute_subtypes(plain);
  std::vector<TypeId> anything(pst.subtypes.size(), plain.dummy());
  auto pg = build_exception_graph(plain, pst, anything, 1);
  CHECK(pg.vertex_count() == 6);
  // Same-side agents never meet; the two dummies do.
  auto m1 = pg.neighbours(0);
  CHECK(std::find(m1.begin(), m1.end(), 1) == m1.end());
  auto d = pg.neighbours(4);
  CHECK(std::find(d.begin(), d.end(), 5) != d.end());
  std::vector<TypeId> matched{1, 0};
  CHECK(build_exception_graph(plain, pst, matched, 2).vertex_count() == 4);
}

TEST_CASE("1top solver: fixed examples") {
  auto inst = parse(kOneManTwoWomen);
  auto r = solve_1top_max_smti(inst);
  CHECK(r.size == 1);
  CHECK(testing::named_pairs(inst, r.matching) == std::set<std::pair<std::string, std::string>>{{"m1", "w2"}});

  auto lone = parse(R"(problem smti
types 3
type 1 side=m count=1 names=m1 prefs=2
type 2 side=w count=1 names=w1 prefs=1
type 3 side=w count=1 names=w2 prefs=1
except agent=m1 cand=w1 place=top
except agent=w1 cand=m1 place=top
)");
  auto forced = solve_1top_max_smti(lone);
  CHECK(forced.size == 1);
  CHECK(forced.forced.size() == 1);

  CHECK_THROWS_AS(solve_1top_max_smti(parse("problem srti\ntypes 1\ntype 1 side=none count=2 prefs=1\n")), SemanticError);
}

TEST_CASE("1top solver without exceptions matches the typed solver") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto inst = testing::random_instance(gen::Model::typed, ProblemKind::smti, seed);
    auto typed_r = typed::solve_max_smti(inst);
    REQUIRE(typed_r);
    CHECK(solve_1top_max_smti(inst).size == typed_r->size);
  }
}

TEST_CASE("exception characterisation matches the oracle") {
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    auto pre = preprocess_mutual(one_top(seed, 7));
    const auto& inst = pre.reduced;
    auto st = compute_subtypes(inst);
    oracle::enumerate_matchings(inst, [&](const AgentMatching& m) {
      CHECK(is_exception_stable(inst, st, exworst_of(inst, st, m)) == oracle::blocking_report(inst, m).stable());
      ++compared;
      return true;
    });
  }
  CHECK(compared > 500);
}

TEST_CASE("1top solver matches brute force") {
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    auto inst = one_top(seed);
    REQUIRE(is_one_top(inst));
    auto want = oracle::max_stable_brute(inst);
    REQUIRE(want);
    auto got = solve_1top_max_smti(inst);
    CHECK(got.size == want->value);
    CHECK(oracle::matching_size(inst, got.matching) == got.size);
    CHECK(oracle::blocking_report(inst, got.matching).stable());
  }
}
