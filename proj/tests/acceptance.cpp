// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Sample counts are fixed here.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "engines.hpp"
#include "stm/cli.hpp"
#include "stm/exceptions.hpp"
#include "stm/hrc.hpp"
#include "stm/oracle.hpp"
#include "stm/quality.hpp"
#include "stm/reductions.hpp"
#include "stm/refined.hpp"
#include "stm/typed.hpp"
#include "support.hpp"

using namespace stm;

namespace {

constexpr int kModelInstances = 500;
constexpr int kSolverInstances = 500;
constexpr int kFlowIpSamples = 1000;
constexpr int kRealisations = 300;
constexpr int kQualityInstances = 300;
constexpr int kStrictInstances = 200;
constexpr int kPrograms = 1000;
constexpr int kGraphs = 500;
constexpr int kFlowNetworks = 500;

struct Tally {
  long long cases = 0;
  long long failures = 0;
  std::string first_failure;
  void check(bool ok, const std::string& what) {
    ++cases;
    if (!ok && failures++ == 0) first_failure = what;
  }
};

std::string seed_tag(const char* model, std::uint64_t seed) { return std::string(model) + " seed " + std::to_string(seed); }

ProblemKind kind_for(std::uint64_t seed) {
  return std::array{ProblemKind::smti, ProblemKind::srti, ProblemKind::hrt}[seed % 3];
}

TypedInstance one_top_instance(std::uint64_t seed, int max_agents) {
  auto shape = testing::small_shape(gen::Model::one_top, ProblemKind::smti, seed, max_agents);
  shape.exceptions = 0.2 + 0.1 * static_cast<double>(seed % 5);
  return gen::generate(shape, seed);
}

TypedInstance hrc_instance(std::uint64_t seed, int max_agents) {
  auto shape = testing::small_shape(gen::Model::hrc, ProblemKind::hrc, seed, max_agents);
  shape.couples = 1 + static_cast<int>(seed % 2);
  shape.max_capacity = 2;
  return gen::generate(shape, seed);
}

// Profile-based verdict for a (1,Top) matching on the input instance: the
// forced pairs are present and the rest is exception-stable.
bool one_top_profile_stable(const TypedInstance& inst, const exceptions::Preprocessed& pre,
                            const exceptions::SubtypeTable& st, const AgentMatching& m) {
  auto part = m.partners(inst.agent_count());
  for (auto [a, b] : pre.forced)
    if (part[a].size() != 1 || part[a][0] != b) return false;
  std::vector<AgentId> reduced_id(inst.agent_count(), -1);
  for (AgentId r = 0; r < static_cast<AgentId>(pre.original.size()); ++r) reduced_id[pre.original[r]] = r;
  AgentMatching rest;
  for (auto [a, b] : m.pairs) {
    if (reduced_id[a] < 0 || reduced_id[b] < 0) {
      continue;  // only the forced pairs, already checked
    }
    rest.add(reduced_id[a], reduced_id[b]);
  }
  return exceptions::is_exception_stable(pre.reduced, st, exceptions::exworst_of(pre.reduced, st, rest));
}

bool report(int id, const std::string& title, const Tally& t, long long required, const std::string& extra = "") {
  bool pass = t.failures == 0 && t.cases >= required;
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " (" << t.cases << " cases, "
            << t.failures << " failures";
  if (!extra.empty()) std::cout << ", " << extra;
  std::cout << ")";
  if (t.failures) std::cout << " first failure: " << t.first_failure;
  if (t.cases < required) std::cout << " needed " << required << " cases";
  std::cout << std::endl;
  return pass;
}

// 1: profile tests agree with agent-level blocking on every matching.
bool characterisation() {
  Tally t;
  long long instances[4] = {0, 0, 0, 0};
  for (std::uint64_t seed = 0; seed < kModelInstances; ++seed) {
    // Typed bipartite and roommates alternate so each gets its share.
    for (auto kind : {ProblemKind::srti, seed % 2 ? ProblemKind::hrt : ProblemKind::smti}) {
      auto inst = testing::random_instance(gen::Model::typed, kind, seed, 8);
      ++instances[inst.bipartite() ? 0 : 1];
      oracle::enumerate_matchings(inst, [&](const AgentMatching& m) {
        bool stable = oracle::blocking_report(inst, m).stable();
        auto p = typed::profile_of(inst, m);
        t.check(typed::is_I_stable(inst, p) == stable, seed_tag("typed", seed));
        if (inst.bipartite()) t.check(typed::is_I_stable_bipartite(inst, p.worst) == stable, seed_tag("bipartite", seed));
        return true;
      });
    }
    auto ex = one_top_instance(seed, 8);
    auto pre = exceptions::preprocess_mutual(ex);
    auto st = exceptions::compute_subtypes(pre.reduced);
    ++instances[2];
    oracle::enumerate_matchings(ex, [&](const AgentMatching& m) {
      t.check(one_top_profile_stable(ex, pre, st, m) == oracle::blocking_report(ex, m).stable(), seed_tag("1top", seed));
      return true;
    });
    auto hc = hrc_instance(seed, 8);
    ++instances[3];
    oracle::enumerate_matchings(hc, [&](const AgentMatching& m) {
      t.check(hrc::hrc_profile_stable(hc, hrc::hrc_profile_of(hc, m)) == oracle::blocking_report(hc, m).stable(),
              seed_tag("hrc", seed));
      return true;
    });
  }
  std::ostringstream extra;
  extra << "instances bipartite/roommates/1top/hrc " << instances[0] << "/" << instances[1] << "/" << instances[2]
        << "/" << instances[3];
  bool enough = instances[0] >= kModelInstances && instances[1] >= kModelInstances &&
                instances[2] >= kModelInstances && instances[3] >= kModelInstances;
  if (!enough) t.check(false, "too few instances per model");
  return report(1, "profile characterisations match blocking-pair detection", t, 4 * kModelInstances, extra.str());
}

// 2: every solver matches the brute-force optimum and NoStable verdicts.
bool solver_agreement() {
  Tally t;
  for (std::uint64_t seed = 0; seed < kSolverInstances; ++seed) {
    {
      auto inst = testing::random_instance(gen::Model::typed, kind_for(seed), seed);
      auto want = oracle::max_stable_brute(inst);
      auto got = inst.bipartite() ? typed::solve_max_smti(inst) : typed::solve_max_srti(inst);
      bool ok = want.has_value() == got.has_value() &&
                (!got || (got->size == want->value && oracle::blocking_report(inst, got->matching).stable()));
      t.check(ok, seed_tag("typed", seed));
    }
    {
      auto inst = testing::random_instance(gen::Model::refined, seed % 2 ? ProblemKind::srti : ProblemKind::smti, seed);
      auto want = oracle::max_stable_brute(inst);
      bool ok = false;
      try {
        auto got = refined::solve_max_refined(inst);
        ok = want.has_value() == got.has_value() &&
             (!got || (got->size == want->value && oracle::blocking_report(inst, got->matching).stable()));
      } catch (const refined::RealisationError&) {
        ok = false;
      }
      t.check(ok, seed_tag("refined", seed));
    }
    {
      auto inst = one_top_instance(seed, 8);
      auto want = oracle::max_stable_brute(inst);
      auto got = exceptions::solve_1top_max_smti(inst);
      bool ok = want && got.size == want->value && oracle::blocking_report(inst, got.matching).stable();
      t.check(ok, seed_tag("1top", seed));
    }
    {
      auto inst = hrc_instance(seed, 8);
      auto want = oracle::max_stable_brute(inst);
      auto got = hrc::solve_max_hrc(inst, {4});
      bool ok = want.has_value() == got.has_value() &&
                (!got || (got->residents == want->value && oracle::blocking_report(inst, got->matching).stable()));
      t.check(ok, seed_tag("hrc", seed));
    }
  }
  return report(2, "typed, refined, 1top and hrc solvers match brute force", t, 4 * kSolverInstances);
}

// 3: flow and integer program agree on every I-stable worst.
bool flow_vs_ip() {
  Tally t;
  for (std::uint64_t seed = 0; t.cases < kFlowIpSamples || seed < 200; ++seed) {
    auto inst = testing::random_instance(gen::Model::typed, seed % 2 ? ProblemKind::hrt : ProblemKind::smti, seed, 9);
    for (const auto& p : typed::feasible_profiles(inst, false)) {
      if (!typed::is_I_stable_bipartite(inst, p.worst)) continue;
      auto flow = typed::max_realising_smti(inst, p.worst);
      auto ip = typed::max_realising_srti(inst, p);
      t.check(flow.has_value() == ip.has_value() && (!flow || flow->size == ip->size), seed_tag("bipartite", seed));
    }
  }
  return report(3, "flow and integer-program realisation agree", t, kFlowIpSamples);
}

// 4: realisation keeps counts and stability under refined lists.
bool realisation() {
  Tally t;
  for (std::uint64_t seed = 0; t.cases < kRealisations; ++seed) {
    auto inst = testing::random_instance(gen::Model::refined, seed % 2 ? ProblemKind::srti : ProblemKind::smti, seed);
    auto relaxed = refined::relaxation(inst);
    auto typed_r = inst.bipartite() ? typed::solve_max_smti(relaxed) : typed::solve_max_srti(relaxed);
    if (!typed_r) continue;
    try {
      auto m = refined::realize_refined(inst, typed_r->counts);
      t.check(typed::counts_of(inst, m) == typed_r->counts && oracle::blocking_report(inst, m).stable(),
              seed_tag("refined", seed));
    } catch (const refined::RealisationError&) {
      t.check(false, seed_tag("refined (not realisable)", seed));
    }
  }
  return report(4, "refined realisation keeps counts with no blocking pairs", t, kRealisations);
}

// 5: quality solvers match brute force, and the realised matchings carry the
// reported values.
bool quality_agreement() {
  Tally bp, ba, ex;
  for (std::uint64_t seed = 0; seed < kQualityInstances; ++seed) {
    auto kind = seed % 2 ? ProblemKind::srti : ProblemKind::smti;
    auto shape = testing::small_shape(gen::Model::typed, kind, seed, 6);
    shape.k = kind == ProblemKind::srti ? 1 + static_cast<int>(seed % 3) : 2 + static_cast<int>(seed % 2);
    auto inst = gen::generate(shape, seed);
    const bool max_size = seed % 4 >= 2;
    auto tag = seed_tag("quality", seed);

    auto b = quality::solve_min_bp(inst, max_size);
    auto rb = oracle::blocking_report(inst, b.matching);
    bp.check(b.value == oracle::min_bp_brute(inst, max_size).value &&
                 static_cast<std::int64_t>(rb.blocking_pairs.size()) == b.value,
             tag);

    auto a = quality::solve_min_ba(inst, max_size);
    auto ra = oracle::blocking_report(inst, a.matching);
    ba.check(a.value == oracle::min_ba_brute(inst, max_size).value &&
                 static_cast<std::int64_t>(ra.blocking_agents.size()) == a.value,
             tag);

    bool ok = true;
    for (int z = 0; z <= 3; ++z) {
      auto got = quality::solve_exact_bp(inst, z, max_size);
      auto want = oracle::exact_bp_brute(inst, z, max_size);
      ok = ok && got.has_value() == want.has_value();
      if (got) ok = ok && static_cast<int>(oracle::blocking_report(inst, got->matching).blocking_pairs.size()) == z;
    }
    ex.check(ok, tag);
  }
  Tally all;
  all.cases = bp.cases + ba.cases + ex.cases;
  all.failures = bp.failures + ba.failures + ex.failures;
  all.first_failure = bp.failures ? "min bp " + bp.first_failure
                      : ba.failures ? "min ba " + ba.first_failure
                                    : "exact bp " + ex.first_failure;
  std::ostringstream extra;
  extra << "failures min-bp/min-ba/exact-bp " << bp.failures << "/" << ba.failures << "/" << ex.failures;
  return report(5, "min-bp, min-ba and exact-bp match brute force", all, 3 * kQualityInstances, extra.str());
}

// 6: strict types give one stable size, and tie-breaking keeps existence.
bool strict_types() {
  Tally t;
  for (std::uint64_t seed = 0; seed < kStrictInstances; ++seed) {
    auto shape = testing::small_shape(gen::Model::typed, seed % 2 ? ProblemKind::srti : ProblemKind::smti, seed, 8);
    shape.ties = 0;
    auto inst = gen::generate(shape, seed);
    auto r = refined::verify_strict_types(inst);
    t.check(r.strict_types && r.holds(), seed_tag("strict", seed));
  }
  return report(6, "strict types: equal stable sizes, existence kept by tie-breaking", t, kStrictInstances);
}

// 7: clique reduction on every graph with at most five vertices.
bool reduction() {
  Tally t;
  for (int n = 1; n <= 5; ++n)
    for (const auto& g : reductions::all_graphs(n))
      for (int r = 1; r <= n; ++r) t.check(reductions::verify_reduction(g, r).agrees(), "n=" + std::to_string(n));
  auto counts = [](const TypedInstance& inst) {
    std::vector<int> c;
    for (const auto& ty : inst.types) c.push_back(ty.count);
    return c;
  };
  auto k3 = reductions::parse_graph("3 3\n0 1\n1 2\n0 2\n");
  auto k3g = reductions::clique_to_com_smti(k3, 3);
  t.check(counts(k3g.instance) == std::vector<int>{3, 3, 0, 3, 3, 0} && oracle::com_stable_exists_brute(k3g.instance),
          "K3 r=3");
  auto p3 = reductions::parse_graph("3 2\n0 1\n1 2\n");
  auto p3g = reductions::clique_to_com_smti(p3, 2);
  t.check(counts(p3g.instance) == std::vector<int>{2, 2, 1, 3, 1, 1} && oracle::com_stable_exists_brute(p3g.instance),
          "P3 r=2");
  long long sweep = 0;
  for (int n = 1; n <= 5; ++n) sweep += static_cast<long long>(n) << (n * (n - 1) / 2);
  return report(7, "clique reduction agrees on all graphs up to five vertices", t, sweep + 2);
}

// 8: profile count stays fixed while n grows with k = 3.
bool scaling() {
  Tally t;
  auto rows = cli::scaling_rows(3, {100, 1000, 10000}, 7);
  std::ostringstream extra;
  for (const auto& r : rows) {
    t.check(r.profiles == rows.front().profiles, "n=" + std::to_string(r.n));
    t.check(r.size >= 0, "no result at n=" + std::to_string(r.n));
    std::cout << "  scaling n=" << r.n << " profiles=" << r.profiles << " size=" << r.size << " wall_ms=" << r.wall_ms
              << std::endl;
  }
  extra << "profiles " << (rows.empty() ? 0 : rows.front().profiles);
  return report(8, "flow solver profile count constant from n=100 to n=10000", t, 6, extra.str());
}

// 9: internal engines against exhaustive references.
bool engines() {
  Tally ip_t, mm_t, flow_t;
  for (std::uint64_t seed = 0; seed < kPrograms; ++seed) {
    auto p = testing::random_program(seed);
    auto want = testing::grid_search(p);
    auto got = ip::solve(p);
    bool ok = (got.status == ip::Status::optimal) == want.feasible && (!want.feasible || got.value == want.value);
    ip_t.check(ok, "program seed " + std::to_string(seed));
  }
  for (std::uint64_t seed = 0; seed < kGraphs; ++seed) {
    auto g = testing::random_graph(seed, 10);
    mm_t.check(graph::matching_cardinality(graph::max_matching(g)) == testing::exhaustive_matching(g),
               "graph seed " + std::to_string(seed));
  }
  for (std::uint64_t seed = 0; seed < kFlowNetworks; ++seed) {
    gen::Rng rng(seed);
    const int n = rng.between(2, 9);
    graph::FlowNetwork net(n, 0, n - 1);
    const int arcs = rng.between(0, 3 * n);
    for (int a = 0; a < arcs; ++a) {
      int from = rng.between(0, n - 2), to = rng.between(1, n - 1);
      if (from != to) net.add_arc(from, to, rng.between(0, 6));
    }
    bool ok = false;
    try {
      auto r = graph::max_flow(net);
      ok = graph::verify_flow(net, r) && r.cut_capacity == r.value;
    } catch (const std::logic_error&) {
      ok = false;
    }
    flow_t.check(ok, "network seed " + std::to_string(seed));
  }
  Tally all;
  all.cases = ip_t.cases + mm_t.cases + flow_t.cases;
  all.failures = ip_t.failures + mm_t.failures + flow_t.failures;
  all.first_failure = ip_t.failures ? ip_t.first_failure : mm_t.failures ? mm_t.first_failure : flow_t.first_failure;
  std::ostringstream extra;
  extra << "programs " << ip_t.cases << ", graphs " << mm_t.cases << ", flow certificates " << flow_t.cases;
  return report(9, "integer programs, matchings and flow certificates check out", all,
                kPrograms + kGraphs + kFlowNetworks, extra.str());
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::function<bool()>> criteria{characterisation, solver_agreement, flow_vs_ip, realisation,
                                              quality_agreement, strict_types, reduction, scaling, engines};
  int failed = 0;
  for (auto& c : criteria) {
    try {
      failed += !c();
    } catch (const std::exception& e) {
      ++failed;
      std::cout << "FAIL criterion (exception): " << e.what() << std::endl;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << "(" << 9 - failed << "/9, " << secs << " s)" << std::endl;
  return failed ? 1 : 0;
}
