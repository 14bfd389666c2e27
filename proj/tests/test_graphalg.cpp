#include "doctest.h"
#include "engines.hpp"
#include "stm/graphalg.hpp"
#include "stm/typed.hpp"
#include "support.hpp"

using namespace stm::graph;

TEST_CASE("max_flow: small networks") {
  FlowNetwork a(3, 0, 2);
  a.add_arc(0, 1, 2);
  a.add_arc(1, 2, 1);
  auto r = max_flow(a);
  CHECK(r.value == 1);
  CHECK(r.cut_capacity == 1);
  CHECK(verify_flow(a, r));

  FlowNetwork b(4, 0, 3);
  b.add_arc(0, 1, 5);
  b.add_arc(2, 3, 5);
  CHECK(max_flow(b).value == 0);
}

TEST_CASE("max_flow: lemma 5 network for the example 2 relaxation") {
  auto inst = testing::parse(R"(problem smti
types 4
type 1 side=m count=3 prefs=(2 3) 4
type 2 side=w count=2 prefs=1
type 3 side=w count=2 prefs=1
type 4 side=w count=3 prefs=1
)");
  // Men take the (2 3) class; every woman may stay single.
  std::vector<stm::TypeId> worst{1, inst.dummy(), inst.dummy(), inst.dummy()};
  auto layout = stm::typed::build_flow_network(inst, worst, 3);
  CHECK(layout.n1 == 7);
  CHECK(layout.n2 == 3);
  auto r = max_flow(layout.network);
  CHECK(r.value == 7);
  CHECK(verify_flow(layout.network, r));
}

TEST_CASE("max_flow: certificate on random networks") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    stm::gen::Rng rng(seed);
    int n = rng.between(2, 9);
    FlowNetwork net(n, 0, n - 1);
    for (int u = 0; u < n - 1; ++u)
      for (int v = 1; v < n; ++v)
        if (u != v && rng.chance(0.35)) net.add_arc(u, v, rng.between(0, 6));
    auto r = max_flow(net);
    CHECK(verify_flow(net, r));
    CHECK(r.value == r.cut_capacity);
  }
}

TEST_CASE("max_matching: small graphs") {
  SimpleGraph k3(3);
  k3.add_edge(0, 1);
  k3.add_edge(1, 2);
  k3.add_edge(0, 2);
  CHECK(matching_cardinality(max_matching(k3)) == 1);
  CHECK_FALSE(has_perfect_matching(k3));

  SimpleGraph k4(4);
  for (int u = 0; u < 4; ++u)
    for (int v = u + 1; v < 4; ++v) k4.add_edge(u, v);
  CHECK(has_perfect_matching(k4));

  SimpleGraph petersen(10);
  for (int i = 0; i < 5; ++i) {
    petersen.add_edge(i, (i + 1) % 5);
    petersen.add_edge(i, i + 5);
    petersen.add_edge(5 + i, 5 + (i + 2) % 5);
  }
  CHECK(testing::exhaustive_matching(petersen) == 5);
  CHECK(has_perfect_matching(petersen));
}

TEST_CASE("max_matching agrees with exhaustive search") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto g = testing::random_graph(seed);
    auto mate = max_matching(g);
    for (int v = 0; v < g.vertex_count(); ++v)
      if (mate[v] >= 0) {
        CHECK(mate[mate[v]] == v);
        CHECK(g.has_edge(v, mate[v]));
      }
    CHECK(matching_cardinality(mate) == testing::exhaustive_matching(g));
  }
}
