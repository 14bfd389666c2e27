#include "stm/exceptions.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "stm/parallel.hpp"

namespace stm::exceptions {

bool is_one_top(const TypedInstance& inst) {
  if (inst.kind != ProblemKind::smti) return false;
  std::vector<int> seen(inst.agent_count(), 0);
  for (const auto& e : inst.exceptions) {
    if (e.placement != Placement::top) return false;
    if (++seen[e.agent] > 1) return false;
  }
  return true;
}

Preprocessed preprocess_mutual(const TypedInstance& inst) {
  const int n = inst.agent_count();
  std::vector<AgentId> ext(n, -1);
  for (const auto& e : inst.exceptions) ext[e.agent] = e.candidate;
  Preprocessed out;
  std::vector<bool> removed(n, false);
  for (AgentId a = 0; a < n; ++a) {
    AgentId b = ext[a];
    if (b > a && ext[b] == a) {
      removed[a] = removed[b] = true;
      out.forced.emplace_back(a, b);
    }
  }
  out.reduced = inst;
  out.reduced.exceptions.clear();
  std::vector<AgentId> renumber(n, -1);
  AgentId next = 0;
  for (TypeId t = 0; t < inst.k(); ++t) {
    auto& entry = out.reduced.types[t];
    entry.names.clear();
    int kept = 0;
    for (int s = 0; s < inst.types[t].count; ++s) {
      AgentId a = inst.first_agent(t) + s;
      if (removed[a]) continue;
      entry.names.push_back(inst.name(a));
      renumber[a] = next++;
      out.original.push_back(a);
      ++kept;
    }
    entry.count = kept;
  }
  for (const auto& e : inst.exceptions) {
    if (removed[e.agent] || removed[e.candidate]) continue;
    ExceptionEntry r = e;
    r.agent = renumber[e.agent];
    r.candidate = renumber[e.candidate];
    out.reduced.exceptions.push_back(r);
  }
  out.reduced.finalize();
  return out;
}

int SubtypeTable::find(TypeId type, TypeId cls) const {
  for (size_t s = 0; s < subtypes.size(); ++s)
    if (subtypes[s].type == type && subtypes[s].cls == cls) return static_cast<int>(s);
  return -1;
}

SubtypeTable compute_subtypes(const TypedInstance& inst) {
  const int n = inst.agent_count();
  std::vector<int> best_rank(n, kUnacceptable);
  std::vector<TypeId> best_type(n, inst.dummy());
  for (const auto& e : inst.exceptions) {
    AgentId x = e.candidate;
    TypeId i = inst.type_of(x), z = inst.type_of(e.agent);
    int r = inst.rank(i, z);
    if (r == kUnacceptable || r >= inst.rank(i, inst.dummy())) continue;
    if (r < best_rank[x]) {
      best_rank[x] = r;
      best_type[x] = inst.class_rep(i, z);
    }
  }
  std::map<std::pair<TypeId, TypeId>, int> count;
  for (AgentId x = 0; x < n; ++x) ++count[{inst.type_of(x), best_type[x]}];
  SubtypeTable st;
  for (const auto& [key, c] : count) {
    st.subtypes.push_back({key.first, key.second});
    st.size.push_back(c);
  }
  st.of_agent.resize(n);
  for (AgentId x = 0; x < n; ++x) st.of_agent[x] = st.find(inst.type_of(x), best_type[x]);
  return st;
}

namespace {

int value_rank(const TypedInstance& inst, TypeId i, TypeId v) { return v == kExceptional ? -1 : inst.rank(i, v); }

// Same equivalence class of i's list; false for the dummy or kExceptional.
bool in_class(const TypedInstance& inst, TypeId i, TypeId v, TypeId cls) {
  if (v < 0 || v >= inst.k() || cls < 0 || cls >= inst.k()) return false;
  return inst.acceptable(i, v) && inst.class_rep(i, v) == cls;
}

}  // namespace

std::vector<TypeId> exworst_of(const TypedInstance& inst, const SubtypeTable& st, const AgentMatching& m) {
  validate_matching(inst, m);
  AgentPrefs prefs(inst);
  auto part = m.partners(inst.agent_count());
  std::vector<TypeId> out(st.subtypes.size(), kExceptional);
  for (AgentId x = 0; x < inst.agent_count(); ++x) {
    TypeId i = inst.type_of(x);
    TypeId p;
    if (part[x].empty()) p = inst.dummy();
    else if (prefs.exceptional(x, part[x][0])) continue;
    else p = inst.type_of(part[x][0]);
    TypeId& cur = out[st.of_agent[x]];
    if (value_rank(inst, i, p) > value_rank(inst, i, cur)) cur = inst.class_rep(i, p);
  }
  return out;
}

std::vector<TypeId> derived_worst(const TypedInstance& inst, const SubtypeTable& st, const std::vector<TypeId>& exworst) {
  std::vector<TypeId> w(inst.k(), typed::kAbsent);
  std::vector<bool> set(inst.k(), false);
  for (size_t s = 0; s < st.subtypes.size(); ++s) {
    TypeId i = st.subtypes[s].type;
    if (!set[i] || value_rank(inst, i, exworst[s]) > value_rank(inst, i, w[i])) w[i] = exworst[s];
    set[i] = true;
  }
  return w;
}

bool is_exception_stable(const TypedInstance& inst, const SubtypeTable& st, const std::vector<TypeId>& exworst) {
  const int k = inst.k();
  auto worst = derived_worst(inst, st, exworst);
  auto strictly = [&](TypeId i, TypeId j, TypeId v) { return inst.rank(i, j) < value_rank(inst, i, v); };
  for (TypeId i = 0; i < k; ++i) {
    if (worst[i] == typed::kAbsent) continue;
    for (TypeId j = 0; j < k; ++j) {
      if (j == i || worst[j] == typed::kAbsent) continue;
      if (i < j && strictly(i, j, worst[i]) && strictly(j, i, worst[j])) return false;
      if (!inst.acceptable(j, i)) continue;
      int s = st.find(j, inst.class_rep(j, i));
      if (s >= 0 && strictly(j, i, exworst[s])) return false;
    }
  }
  return true;
}

graph::SimpleGraph build_exception_graph(const TypedInstance& inst, const SubtypeTable& st,
                                         const std::vector<TypeId>& exworst, int c) {
  const int n = inst.agent_count();
  if (c < 0 || 2 * c > n) throw SemanticError("target size out of range");
  const int dummies = n - 2 * c;
  graph::SimpleGraph g(n + dummies);
  AgentPrefs prefs(inst);
  auto weakly = [&](TypeId a, TypeId b, TypeId v) {
    return inst.acceptable(a, b) && inst.rank(a, b) <= value_rank(inst, a, v);
  };
  for (AgentId x = 0; x < n; ++x)
    for (AgentId y = x + 1; y < n; ++y) {
      if (!prefs.mutually_acceptable(x, y)) continue;
      TypeId a = inst.type_of(x), b = inst.type_of(y);
      int sx = st.of_agent[x], sy = st.of_agent[y];
      TypeId cx = st.subtypes[sx].cls, cy = st.subtypes[sy].cls;
      bool exy = prefs.exceptional(x, y), eyx = prefs.exceptional(y, x);
      bool edge = false;
      if (!exy && !eyx) edge = weakly(a, b, exworst[sx]) && weakly(b, a, exworst[sy]);
      if (exy && in_class(inst, b, a, cy) && in_class(inst, b, exworst[sy], cy)) edge = true;
      if (eyx && in_class(inst, a, b, cx) && in_class(inst, a, exworst[sx], cx)) edge = true;
      if (edge) g.add_edge(x, y);
    }
  for (int d = 0; d < dummies; ++d) {
    for (int e = d + 1; e < dummies; ++e) g.add_edge(n + d, n + e);
    for (AgentId x = 0; x < n; ++x)
      if (exworst[st.of_agent[x]] == inst.dummy()) g.add_edge(x, n + d);
  }
  return g;
}

std::optional<Realised> max_realising_exworst(const TypedInstance& inst, const SubtypeTable& st,
                                              const std::vector<TypeId>& exworst) {
  const int n = inst.agent_count();
  auto attempt = [&](int c) -> std::optional<Realised> {
    auto g = build_exception_graph(inst, st, exworst, c);
    auto mate = graph::max_matching(g);
    if (2 * graph::matching_cardinality(mate) != g.vertex_count()) return std::nullopt;
    Realised r;
    for (AgentId x = 0; x < n; ++x)
      if (mate[x] > x && mate[x] < n) r.matching.add(x, mate[x]);
    r.size = r.matching.size();
    return r;
  };
  auto best = attempt(0);
  if (!best) return std::nullopt;
  int lo = best->size, hi = n / 2;
  while (lo < hi) {
    int mid = lo + (hi - lo + 1) / 2;
    if (auto r = attempt(mid)) {
      best = r;
      lo = std::max(mid, r->size);
    } else {
      hi = mid - 1;
    }
  }
  return best;
}

std::vector<TypeId> exworst_candidates(const TypedInstance& inst, const Subtype& s) {
  std::vector<TypeId> out{kExceptional};
  for (const auto& g : inst.types[s.type].pref.groups) out.push_back(*std::min_element(g.begin(), g.end()));
  out.push_back(inst.dummy());
  return out;
}

ExceptionResult solve_1top_max_smti(const TypedInstance& inst, const typed::SolverOptions& opts) {
  if (!is_one_top(inst)) throw SemanticError("the exception solver needs a (1,Top) smti instance");
  Preprocessed pre = preprocess_mutual(inst);
  const TypedInstance& red = pre.reduced;
  SubtypeTable st = compute_subtypes(red);
  const int ns = static_cast<int>(st.subtypes.size());
  std::vector<std::vector<TypeId>> cands(ns);
  for (int s = 0; s < ns; ++s) cands[s] = exworst_candidates(red, st.subtypes[s]);

  std::vector<std::vector<TypeId>> pending;
  std::int64_t examined = 0;
  std::vector<size_t> idx(ns, 0);
  std::vector<TypeId> f(ns);
  while (true) {
    for (int s = 0; s < ns; ++s) f[s] = cands[s][idx[s]];
    ++examined;
    if (is_exception_stable(red, st, f)) {
      // A one-step worse function that is also stable realises a superset.
      bool dominated = false;
      for (int s = 0; s < ns && !dominated; ++s) {
        if (idx[s] + 1 >= cands[s].size()) continue;
        auto g = f;
        g[s] = cands[s][idx[s] + 1];
        dominated = is_exception_stable(red, st, g);
      }
      if (!dominated) pending.push_back(f);
    }
    int pos = ns - 1;
    while (pos >= 0 && ++idx[pos] == cands[pos].size()) idx[pos--] = 0;
    if (pos < 0) break;
  }

  std::vector<std::optional<Realised>> results(pending.size());
  parallel_for(static_cast<int>(pending.size()), opts.jobs,
               [&](int p) { results[p] = max_realising_exworst(red, st, pending[p]); });
  ExceptionResult out;
  out.subtypes = st.subtypes;
  out.forced = pre.forced;
  out.functions_examined = examined;
  int best = -1;
  for (size_t p = 0; p < pending.size(); ++p)
    if (results[p] && results[p]->size > best) {
      best = results[p]->size;
      out.exworst = pending[p];
      out.matching = AgentMatching{};
      for (auto [a, b] : results[p]->matching.pairs) out.matching.add(pre.original[a], pre.original[b]);
    }
  if (best < 0) throw std::logic_error("no exception-stable function is realisable");
  for (auto [a, b] : pre.forced) out.matching.add(a, b);
  out.size = out.matching.size();
  return out;
}

}  // namespace stm::exceptions
