#include "stm/typed.hpp"

#include <algorithm>
#include <functional>

#include "stm/parallel.hpp"
#include "stm/smallip.hpp"

namespace stm::typed {

bool on_first_side(const TypedInstance& inst, TypeId t) {
  Side s = inst.types[t].side;
  return s == Side::woman || s == Side::hospital;
}

namespace {

int total_slots(const TypedInstance& inst) {
  int n = 0;
  for (TypeId t = 0; t < inst.k(); ++t) n += inst.slots(t);
  return n;
}

// Agents available as partners for a type-i agent in the class of rep.
int class_slots(const TypedInstance& inst, TypeId i, TypeId rep) {
  if (rep == inst.dummy()) return total_slots(inst);
  int r = inst.rank(i, rep);
  int s = 0;
  for (TypeId t : inst.types[i].pref.groups[r]) s += inst.slots(t) - (t == i ? 1 : 0);
  return s;
}

bool self_acceptable(const TypedInstance& inst, TypeId i) { return inst.acceptable(i, i); }

// Odometer over per-type candidate lists.
void for_each_combination(const std::vector<std::vector<TypeId>>& options,
                          const std::function<void(const std::vector<TypeId>&)>& visit) {
  std::vector<size_t> idx(options.size(), 0);
  for (const auto& o : options)
    if (o.empty()) return;
  std::vector<TypeId> cur(options.size());
  while (true) {
    for (size_t i = 0; i < options.size(); ++i) cur[i] = options[i][idx[i]];
    visit(cur);
    size_t pos = options.size();
    while (pos > 0) {
      --pos;
      if (++idx[pos] < options[pos].size()) break;
      idx[pos] = 0;
      if (pos == 0) return;
    }
    if (options.empty()) return;
  }
}

std::optional<TypeId> next_worse(const std::vector<TypeId>& cands, TypeId v) {
  auto it = std::find(cands.begin(), cands.end(), v);
  if (it == cands.end() || it + 1 == cands.end()) return std::nullopt;
  return *(it + 1);
}

}  // namespace

std::vector<TypeId> worst_candidates(const TypedInstance& inst, TypeId i) {
  std::vector<TypeId> out;
  if (inst.slots(i) == 0) return {kAbsent};
  for (const auto& g : inst.types[i].pref.groups) {
    TypeId rep = *std::min_element(g.begin(), g.end());
    if (class_slots(inst, i, rep) > 0) out.push_back(rep);
  }
  out.push_back(inst.dummy());
  return out;
}

std::vector<TypeId> secondworst_candidates(const TypedInstance& inst, TypeId i) {
  if (inst.slots(i) == 0 || inst.slots(i) == 1) return {kAbsent};
  return worst_candidates(inst, i);
}

bool is_feasible(const TypedInstance& inst, const WorstProfile& p) {
  const int k = inst.k();
  if (static_cast<int>(p.worst.size()) != k || static_cast<int>(p.secondworst.size()) != k) return false;
  for (TypeId i = 0; i < k; ++i) {
    if (inst.slots(i) == 0) {
      if (p.worst[i] != kAbsent || p.secondworst[i] != kAbsent) return false;
      continue;
    }
    auto valid = [&](TypeId v) {
      if (v == inst.dummy()) return true;
      return v >= 0 && v < k && inst.acceptable(i, v) && inst.class_rep(i, v) == v;
    };
    if (!valid(p.worst[i])) return false;
    if (inst.slots(i) == 1) {
      if (p.secondworst[i] != kAbsent) return false;
    } else {
      if (!valid(p.secondworst[i])) return false;
      // Two agents of type i can hold each other, so a class containing i
      // always has room for both slots.
      if (p.worst[i] == p.secondworst[i] && !(p.worst[i] != inst.dummy() && inst.class_rep(i, i) == p.worst[i]) &&
          class_slots(inst, i, p.worst[i]) < 2)
        return false;
    }
  }
  return true;
}

bool is_I_stable(const TypedInstance& inst, const WorstProfile& p) {
  if (!is_feasible(inst, p)) throw SemanticError("infeasible worst/secondworst profile");
  const int k = inst.k();
  for (TypeId i = 0; i < k; ++i) {
    if (inst.slots(i) == 0) continue;
    for (TypeId j = i + 1; j < k; ++j) {
      if (inst.slots(j) == 0) continue;
      if (inst.prefers(i, j, p.worst[i]) && inst.prefers(j, i, p.worst[j])) return false;
    }
    if (inst.slots(i) >= 2 && p.secondworst[i] != kAbsent && inst.prefers(i, i, p.secondworst[i])) return false;
  }
  return true;
}

bool is_I_stable_bipartite(const TypedInstance& inst, const std::vector<TypeId>& worst) {
  const int k = inst.k();
  for (TypeId i = 0; i < k; ++i) {
    if (inst.slots(i) == 0) continue;
    for (TypeId j = i + 1; j < k; ++j) {
      if (inst.slots(j) == 0) continue;
      if (inst.prefers(i, j, worst[i]) && inst.prefers(j, i, worst[j])) return false;
    }
  }
  return true;
}

// ------------------------------------------------------------ matrices

namespace {

// Partner type of every slot of every type; free hospital slots and
// unmatched agents get the dummy.
std::vector<std::vector<TypeId>> slot_partners(const TypedInstance& inst, const AgentMatching& m) {
  validate_matching(inst, m);
  auto part = m.partners(inst.agent_count());
  std::vector<std::vector<TypeId>> out(inst.k());
  for (AgentId a = 0; a < inst.agent_count(); ++a) {
    TypeId t = inst.type_of(a);
    for (AgentId b : part[a]) out[t].push_back(inst.type_of(b));
    for (int f = static_cast<int>(part[a].size()); f < inst.capacity(a); ++f) out[t].push_back(inst.dummy());
  }
  return out;
}

}  // namespace

TypeCountMatrix counts_of(const TypedInstance& inst, const AgentMatching& m) {
  TypeCountMatrix c(inst.k());
  auto sp = slot_partners(inst, m);
  for (TypeId i = 0; i < inst.k(); ++i)
    for (TypeId j : sp[i]) {
      if (j == inst.dummy()) c.add(i, j, 1);
      else if (i < j) c.add(i, j, 1);
      else if (i == j) c.add(i, i, 1);  // counted once per agent, halved below
    }
  for (TypeId i = 0; i < inst.k(); ++i) c.set(i, i, c.get(i, i) / 2);
  return c;
}

WorstProfile profile_of(const TypedInstance& inst, const AgentMatching& m) {
  auto sp = slot_partners(inst, m);
  WorstProfile p;
  for (TypeId i = 0; i < inst.k(); ++i) {
    auto& ranks = sp[i];
    if (ranks.empty()) {
      p.worst.push_back(kAbsent);
      p.secondworst.push_back(kAbsent);
      continue;
    }
    std::sort(ranks.begin(), ranks.end(), [&](TypeId a, TypeId b) { return inst.rank(i, a) > inst.rank(i, b); });
    p.worst.push_back(inst.class_rep(i, ranks[0]));
    p.secondworst.push_back(ranks.size() >= 2 ? inst.class_rep(i, ranks[1]) : kAbsent);
  }
  return p;
}

AgentMatching counts_to_matching(const TypedInstance& inst, const TypeCountMatrix& m) {
  const int k = inst.k();
  if (m.k() != k) throw SemanticError("count matrix has the wrong dimension");
  for (TypeId i = 0; i < k; ++i) {
    if (m.row_agents(i) != inst.slots(i))
      throw SemanticError("count matrix row " + std::to_string(i + 1) + " does not match the type size");
    for (TypeId j = 0; j <= k; ++j)
      if (m.get(i, j) < 0) throw SemanticError("negative count");
  }
  // Next unused slot of each type; slot s of a hospital type belongs to
  // hospital s / capacity.
  std::vector<int> next(k, 0);
  auto take = [&](TypeId t) {
    int s = next[t]++;
    return inst.first_agent(t) + s / (inst.types[t].side == Side::hospital ? inst.types[t].capacity : 1);
  };
  AgentMatching out;
  AgentPrefs prefs(inst);
  for (TypeId i = 0; i < k; ++i)
    for (TypeId j = i; j < k; ++j)
      for (int c = 0; c < m.get(i, j); ++c) {
        AgentId a = take(i), b = take(j);
        if (!prefs.mutually_acceptable(a, b)) throw SemanticError("count matrix pairs unacceptable types");
        out.add(a, b);
      }
  return out;
}

std::vector<WorstProfile> feasible_profiles(const TypedInstance& inst, bool with_secondworst) {
  std::vector<std::vector<TypeId>> options;
  const int k = inst.k();
  for (TypeId i = 0; i < k; ++i) options.push_back(worst_candidates(inst, i));
  for (TypeId i = 0; i < k; ++i) {
    if (!with_secondworst) options.push_back({inst.slots(i) >= 2 ? inst.dummy() : kAbsent});
    else options.push_back(secondworst_candidates(inst, i));
  }
  std::vector<WorstProfile> out;
  for_each_combination(options, [&](const std::vector<TypeId>& v) {
    WorstProfile p{{v.begin(), v.begin() + k}, {v.begin() + k, v.end()}};
    if (is_feasible(inst, p)) out.push_back(p);
  });
  return out;
}

// ------------------------------------------------------------- IP path

std::optional<Realised> max_realising_srti(const TypedInstance& inst, const WorstProfile& p) {
  const int k = inst.k();
  ip::IntegerProgram prog;
  std::vector<std::vector<int>> var(k + 1, std::vector<int>(k + 1, -1));
  for (TypeId i = 0; i < k; ++i)
    for (TypeId j = i; j <= k; ++j) {
      bool allowed = j == k || inst.mutually_acceptable(i, j);
      if (!allowed) continue;
      int ub = j == k ? inst.slots(i) : (i == j ? inst.slots(i) / 2 : std::min(inst.slots(i), inst.slots(j)));
      int v = prog.add_variable("n" + std::to_string(i + 1) + "_" + std::to_string(j + 1), 0, ub);
      var[i][j] = var[j][i] = v;
    }
  auto row = [&](TypeId i, const std::function<bool(TypeId)>& include) {
    std::vector<ip::Term> terms;
    for (TypeId j = 0; j <= k; ++j)
      if (var[i][j] >= 0 && include(j)) terms.emplace_back(var[i][j], i == j ? 2 : 1);
    return terms;
  };
  for (TypeId i = 0; i < k; ++i) {
    const int n = inst.slots(i);
    prog.add_constraint(row(i, [](TypeId) { return true; }), ip::Relation::eq, n);
    if (n == 0) continue;
    TypeId w = p.worst[i];
    prog.add_constraint(row(i, [&](TypeId j) { return inst.rank(i, j) <= inst.rank(i, w); }), ip::Relation::eq, n);
    TypeId sw = p.secondworst[i];
    if (sw != kAbsent)
      prog.add_constraint(row(i, [&](TypeId j) { return inst.rank(i, j) <= inst.rank(i, sw); }), ip::Relation::ge,
                          n - 1);
  }
  ip::Objective obj;
  obj.sense = ip::Sense::maximize;
  obj.linear.assign(prog.variable_count(), 0);
  for (TypeId i = 0; i < k; ++i)
    for (TypeId j = i; j < k; ++j)
      if (var[i][j] >= 0) obj.linear[var[i][j]] = 1;
  prog.set_objective(obj);
  auto res = ip::solve(prog);
  if (res.status != ip::Status::optimal) return std::nullopt;
  Realised out{static_cast<int>(res.value), TypeCountMatrix(k)};
  for (TypeId i = 0; i < k; ++i)
    for (TypeId j = i; j <= k; ++j)
      if (var[i][j] >= 0) out.counts.set(i, j, static_cast<int>(res.assignment[var[i][j]]));
  return out;
}

namespace {

// One step worse in type i's candidate order, for worst or secondworst.
bool dominated(const TypedInstance& inst, const WorstProfile& p,
               const std::vector<std::vector<TypeId>>& wc, const std::vector<std::vector<TypeId>>& sc) {
  for (TypeId i = 0; i < inst.k(); ++i) {
    if (auto w = next_worse(wc[i], p.worst[i])) {
      WorstProfile q = p;
      q.worst[i] = *w;
      if (is_feasible(inst, q) && is_I_stable(inst, q)) return true;
    }
    if (auto s = next_worse(sc[i], p.secondworst[i])) {
      WorstProfile q = p;
      q.secondworst[i] = *s;
      if (is_feasible(inst, q) && is_I_stable(inst, q)) return true;
    }
  }
  return false;
}

template <typename Eval>
std::optional<MaxStableResult> best_of(const TypedInstance& inst, const std::vector<WorstProfile>& cands,
                                       const SolverOptions& opts, Eval eval) {
  std::vector<std::optional<Realised>> results(cands.size());
  parallel_for(static_cast<int>(cands.size()), opts.jobs, [&](int i) { results[i] = eval(cands[i]); });
  std::optional<MaxStableResult> best;
  for (size_t i = 0; i < cands.size(); ++i) {
    if (!results[i]) continue;
    if (!best || results[i]->size > best->size) {
      best = MaxStableResult{};
      best->size = results[i]->size;
      best->counts = results[i]->counts;
      best->profile = cands[i];
    }
  }
  if (best) best->matching = counts_to_matching(inst, best->counts);
  return best;
}

}  // namespace

std::optional<MaxStableResult> solve_max_srti(const TypedInstance& inst, const SolverOptions& opts) {
  if (inst.kind == ProblemKind::hrc) throw SemanticError("hrc instances need the couples solver");
  const int k = inst.k();
  std::vector<std::vector<TypeId>> wc(k), sc(k), options;
  for (TypeId i = 0; i < k; ++i) {
    wc[i] = worst_candidates(inst, i);
    // Secondworst only constrains types that accept their own type; a
    // dummy secondworst is the loosest choice elsewhere.
    if (inst.slots(i) >= 2 && !self_acceptable(inst, i)) sc[i] = {inst.dummy()};
    else sc[i] = secondworst_candidates(inst, i);
  }
  options = wc;
  options.insert(options.end(), sc.begin(), sc.end());
  std::vector<WorstProfile> cands;
  std::int64_t examined = 0;
  for_each_combination(options, [&](const std::vector<TypeId>& v) {
    WorstProfile p{{v.begin(), v.begin() + k}, {v.begin() + k, v.end()}};
    if (!is_feasible(inst, p)) return;
    ++examined;
    if (is_I_stable(inst, p) && !dominated(inst, p, wc, sc)) cands.push_back(p);
  });
  auto best = best_of(inst, cands, opts, [&](const WorstProfile& p) { return max_realising_srti(inst, p); });
  if (best) {
    best->profiles_examined = examined;
    best->path = "ip";
  }
  return best;
}

// ----------------------------------------------------------- flow path

FlowLayout build_flow_network(const TypedInstance& inst, const std::vector<TypeId>& worst, int c) {
  if (!inst.bipartite()) throw SemanticError("flow path needs a bipartite instance");
  const int k = inst.k();
  const int s = 0, t = 1, dw = 2 + k, dm = 3 + k;
  FlowLayout out{graph::FlowNetwork(4 + k, s, t), 0, 0, std::vector<int>(k * k, -1)};
  for (TypeId i = 0; i < k; ++i) (on_first_side(inst, i) ? out.n1 : out.n2) += inst.slots(i);
  auto& net = out.network;
  const TypeId d = inst.dummy();
  auto wants_dummy = [&](TypeId i) { return inst.slots(i) > 0 && worst[i] == d; };
  for (TypeId i = 0; i < k; ++i) {
    if (!on_first_side(inst, i)) continue;
    net.add_arc(s, 2 + i, inst.slots(i));
    if (wants_dummy(i)) net.add_arc(2 + i, dm, inst.slots(i));
  }
  net.add_arc(s, dw, out.n2 - c);
  for (TypeId i = 0; i < k; ++i) {
    if (!on_first_side(inst, i) || inst.slots(i) == 0) continue;
    for (TypeId j = 0; j < k; ++j) {
      if (on_first_side(inst, j) || inst.slots(j) == 0) continue;
      if (inst.weakly_prefers(i, j, worst[i]) && inst.weakly_prefers(j, i, worst[j]))
        out.pair_arc[i * k + j] = net.add_arc(2 + i, 2 + j, std::min(inst.slots(i), inst.slots(j)));
    }
  }
  for (TypeId j = 0; j < k; ++j)
    if (!on_first_side(inst, j) && wants_dummy(j)) net.add_arc(dw, 2 + j, inst.slots(j));
  net.add_arc(dw, dm, std::min(out.n1, out.n2) - c);
  for (TypeId j = 0; j < k; ++j)
    if (!on_first_side(inst, j)) net.add_arc(2 + j, t, inst.slots(j));
  net.add_arc(dm, t, out.n1 - c);
  return out;
}

std::optional<Realised> max_realising_smti(const TypedInstance& inst, const std::vector<TypeId>& worst) {
  const int k = inst.k();
  auto attempt = [&](int c) -> std::optional<Realised> {
    FlowLayout lay = build_flow_network(inst, worst, c);
    auto r = graph::max_flow(lay.network);
    if (r.value != lay.n1 + lay.n2 - c) return std::nullopt;
    Realised out{0, TypeCountMatrix(k)};
    for (TypeId i = 0; i < k; ++i)
      for (TypeId j = 0; j < k; ++j)
        if (lay.pair_arc[i * k + j] >= 0) out.counts.set(i, j, static_cast<int>(r.flow[lay.pair_arc[i * k + j]]));
    for (TypeId i = 0; i < k; ++i) {
      int used = 0;
      for (TypeId j = 0; j < k; ++j) used += out.counts.get(i, j);
      out.counts.set(i, inst.dummy(), inst.slots(i) - used);
    }
    out.size = out.counts.size();
    return out;
  };
  int n1 = 0, n2 = 0;
  for (TypeId i = 0; i < k; ++i) (on_first_side(inst, i) ? n1 : n2) += inst.slots(i);
  int lo = 0, hi = std::min(n1, n2);
  std::optional<Realised> best;
  bool all_dummy = true;
  for (TypeId i = 0; i < k; ++i)
    if (inst.slots(i) > 0 && worst[i] != inst.dummy()) all_dummy = false;
  if (all_dummy) {
    // Everyone unmatched realises this profile.
    best = Realised{0, TypeCountMatrix(k)};
    for (TypeId i = 0; i < k; ++i) best->counts.set(i, inst.dummy(), inst.slots(i));
  } else {
    best = attempt(0);
    if (!best) return std::nullopt;
  }
  // Invariant: c = lo is realisable; find the largest such c.
  while (lo < hi) {
    int mid = lo + (hi - lo + 1) / 2;
    if (auto r = attempt(mid)) {
      lo = mid;
      best = r;
    } else {
      hi = mid - 1;
    }
  }
  return best;
}

std::optional<MaxStableResult> solve_max_smti(const TypedInstance& inst, const SolverOptions& opts) {
  if (!inst.bipartite() || inst.kind == ProblemKind::hrc) throw SemanticError("flow path needs smti or hrt");
  const int k = inst.k();
  std::vector<std::vector<TypeId>> wc(k);
  for (TypeId i = 0; i < k; ++i) wc[i] = worst_candidates(inst, i);
  std::vector<WorstProfile> cands;
  std::int64_t examined = 0;
  for_each_combination(wc, [&](const std::vector<TypeId>& w) {
    ++examined;
    if (!is_I_stable_bipartite(inst, w)) return;
    for (TypeId i = 0; i < k; ++i) {
      if (auto lower = next_worse(wc[i], w[i])) {
        auto v = w;
        v[i] = *lower;
        if (is_I_stable_bipartite(inst, v)) return;
      }
    }
    WorstProfile p;
    p.worst = w;
    for (TypeId i = 0; i < k; ++i) p.secondworst.push_back(inst.slots(i) >= 2 ? inst.dummy() : kAbsent);
    cands.push_back(p);
  });
  auto best = best_of(inst, cands, opts, [&](const WorstProfile& p) { return max_realising_smti(inst, p.worst); });
  if (best) {
    best->profiles_examined = examined;
    best->path = "flow";
  }
  return best;
}

}  // namespace stm::typed
