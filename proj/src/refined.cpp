#include "stm/refined.hpp"

#include <algorithm>
#include <numeric>

#include "stm/oracle.hpp"

namespace stm::refined {

TypedInstance relaxation(const TypedInstance& inst) {
  TypedInstance out = inst;
  for (auto& r : out.refinements) r.reset();
  out.finalize();
  return out;
}

namespace {

// Position of agent x in type j's list, or -1 when j does not accept x.
int view_rank(const TypedInstance& inst, TypeId j, AgentId x) {
  if (j < static_cast<int>(inst.refinements.size()) && inst.refinements[j]) {
    const auto& groups = inst.refinements[j]->groups;
    for (int g = 0; g < static_cast<int>(groups.size()); ++g)
      if (std::find(groups[g].begin(), groups[g].end(), x) != groups[g].end()) return g;
    return -1;
  }
  int r = inst.rank(j, inst.type_of(x));
  return r == kUnacceptable ? -1 : r;
}

void sort_by_view(const TypedInstance& inst, TypeId j, std::vector<AgentId>& agents) {
  std::stable_sort(agents.begin(), agents.end(), [&](AgentId a, AgentId b) {
    int ra = view_rank(inst, j, a), rb = view_rank(inst, j, b);
    return ra != rb ? ra < rb : a < b;
  });
}

// Partner types of i from most to least preferred, ties by id, then the dummy.
std::vector<TypeId> partner_order(const TypedInstance& inst, TypeId i) {
  std::vector<TypeId> order;
  for (auto g : inst.types[i].pref.groups) {
    std::sort(g.begin(), g.end());
    order.insert(order.end(), g.begin(), g.end());
  }
  return order;
}

}  // namespace

AgentMatching realize_refined(const TypedInstance& inst, const TypeCountMatrix& m) {
  if (inst.kind != ProblemKind::smti && inst.kind != ProblemKind::srti)
    throw SemanticError("refined realisation needs an smti or srti instance");
  const int k = inst.k();
  for (TypeId i = 0; i < k; ++i)
    if (m.row_agents(i) != inst.slots(i))
      throw SemanticError("count matrix row " + std::to_string(i + 1) + " does not match the type size");

  // Step 1: chosen[i][j] holds the agents of type i that go to type j.
  std::vector<std::vector<std::vector<AgentId>>> chosen(k, std::vector<std::vector<AgentId>>(k));
  for (TypeId i = 0; i < k; ++i) {
    std::vector<bool> used(inst.types[i].count, false);
    for (TypeId j : partner_order(inst, i)) {
      int need = m.agents(i, j);
      if (need == 0) continue;
      std::vector<AgentId> avail;
      for (int s = 0; s < inst.types[i].count; ++s) {
        AgentId x = inst.first_agent(i) + s;
        if (!used[s] && view_rank(inst, j, x) >= 0) avail.push_back(x);
      }
      if (static_cast<int>(avail.size()) < need)
        throw RealisationError("type " + std::to_string(j + 1) + " accepts too few agents of type " +
                               std::to_string(i + 1));
      sort_by_view(inst, j, avail);
      avail.resize(need);
      for (AgentId x : avail) used[x - inst.first_agent(i)] = true;
      chosen[i][j] = avail;
    }
  }

  // Step 2: rank-aligned pairing.
  AgentMatching out;
  for (TypeId i = 0; i < k; ++i)
    for (TypeId j = i; j < k; ++j) {
      auto a = chosen[i][j];
      if (i == j) {
        sort_by_view(inst, i, a);
        for (size_t p = 0; p + 1 < a.size(); p += 2) out.add(a[p], a[p + 1]);
        continue;
      }
      auto b = chosen[j][i];
      sort_by_view(inst, j, a);
      sort_by_view(inst, i, b);
      for (size_t p = 0; p < a.size(); ++p) out.add(a[p], b[p]);
    }
  AgentPrefs prefs(inst);
  for (auto [a, b] : out.pairs)
    if (!prefs.mutually_acceptable(a, b))
      throw RealisationError(inst.name(a) + " and " + inst.name(b) + " are not mutually acceptable");
  return out;
}

std::optional<typed::MaxStableResult> solve_max_refined(const TypedInstance& inst, const typed::SolverOptions& opts) {
  TypedInstance relaxed = relaxation(inst);
  auto best = inst.kind == ProblemKind::smti ? typed::solve_max_smti(relaxed, opts) : typed::solve_max_srti(relaxed, opts);
  if (best) best->matching = realize_refined(inst, best->counts);
  return best;
}

std::optional<quality::QualityResult> solve_refined_quality(const TypedInstance& inst, const QualityObjective& obj,
                                                            const typed::SolverOptions& opts) {
  TypedInstance relaxed = relaxation(inst);
  std::optional<quality::QualityResult> r;
  switch (obj.kind) {
    case QualityObjective::Kind::min_bp: r = quality::solve_min_bp(relaxed, obj.max_size); break;
    case QualityObjective::Kind::min_ba: r = quality::solve_min_ba(relaxed, obj.max_size, opts); break;
    case QualityObjective::Kind::exact_bp: r = quality::solve_exact_bp(relaxed, obj.z, obj.max_size); break;
  }
  if (r) r->matching = realize_refined(inst, r->counts);
  return r;
}

TypedInstance break_ties(const TypedInstance& inst) {
  TypedInstance out = inst;
  out.refinements.resize(out.k());
  for (TypeId t = 0; t < out.k(); ++t) {
    Refinement strict;
    if (inst.refinements.size() > static_cast<size_t>(t) && inst.refinements[t]) {
      for (auto g : inst.refinements[t]->groups) {
        std::sort(g.begin(), g.end());
        for (AgentId a : g) strict.groups.push_back({a});
      }
    } else {
      for (TypeId j : partner_order(inst, t))
        for (int s = 0; s < inst.types[j].count; ++s) strict.groups.push_back({inst.first_agent(j) + s});
    }
    out.refinements[t] = strict;
  }
  out.finalize();
  return out;
}

bool has_strict_types(const TypedInstance& inst) {
  for (const auto& t : inst.types)
    for (const auto& g : t.pref.groups)
      if (g.size() > 1) return false;
  return true;
}

StrictTypesReport verify_strict_types(const TypedInstance& inst) {
  StrictTypesReport r;
  r.strict_types = has_strict_types(inst);
  for (const auto& m : oracle::all_stable_matchings(inst)) r.stable_sizes.insert(oracle::matching_size(inst, m));
  r.exists = !r.stable_sizes.empty();
  auto broken = oracle::max_stable_brute(break_ties(inst));
  r.exists_tie_broken = broken.has_value();
  if (broken) r.max_size_tie_broken = broken->value;
  return r;
}

}  // namespace stm::refined
