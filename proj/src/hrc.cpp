#include "stm/hrc.hpp"

#include <algorithm>
#include <functional>

#include "stm/parallel.hpp"
#include "stm/smallip.hpp"

namespace stm::hrc {

using typed::kAbsent;

std::vector<TypePair> listed_pairs(const CoupleType& c) {
  std::vector<TypePair> out;
  for (const auto& g : c.prefs) out.insert(out.end(), g.begin(), g.end());
  return out;
}

int couple_rank(const CoupleType& c, TypeId p, TypeId q, TypeId dummy) {
  if (p == dummy && q == dummy) return static_cast<int>(c.prefs.size());
  for (int g = 0; g < static_cast<int>(c.prefs.size()); ++g)
    if (std::find(c.prefs[g].begin(), c.prefs[g].end(), TypePair{p, q}) != c.prefs[g].end()) return g;
  return kUnacceptable;
}

namespace {

bool is_hospital(const TypedInstance& inst, TypeId t) { return inst.types[t].side == Side::hospital; }

int group_of_pair(const CoupleType& c, int x) {
  int seen = 0;
  for (int g = 0; g < static_cast<int>(c.prefs.size()); ++g) {
    seen += static_cast<int>(c.prefs[g].size());
    if (x < seen) return g;
  }
  return -1;
}

}  // namespace

HrcProfile hrc_profile_of(const TypedInstance& inst, const AgentMatching& m) {
  validate_matching(inst, m);
  const int k = inst.k();
  const TypeId d = inst.dummy();
  auto part = m.partners(inst.agent_count());
  HrcProfile p;
  p.worst.assign(k, kAbsent);
  p.secondworst.assign(k, kAbsent);
  for (TypeId t = 0; t < k; ++t) {
    if (inst.types[t].count == 0) continue;
    if (is_hospital(inst, t)) {
      std::vector<TypeId> slots;
      for (int s = 0; s < inst.types[t].count; ++s) {
        AgentId h = inst.first_agent(t) + s;
        for (AgentId r : part[h]) slots.push_back(inst.type_of(r));
        for (int f = static_cast<int>(part[h].size()); f < inst.capacity(h); ++f) slots.push_back(d);
      }
      std::stable_sort(slots.begin(), slots.end(), [&](TypeId a, TypeId b) { return inst.rank(t, a) > inst.rank(t, b); });
      p.worst[t] = inst.class_rep(t, slots[0]);
      if (slots.size() >= 2) p.secondworst[t] = inst.class_rep(t, slots[1]);
    } else {
      TypeId w = kAbsent;
      for (int s = 0; s < inst.types[t].count; ++s) {
        AgentId r = inst.first_agent(t) + s;
        TypeId h = part[r].empty() ? d : inst.type_of(part[r][0]);
        if (w == kAbsent || inst.rank(t, h) > inst.rank(t, w)) w = inst.class_rep(t, h);
      }
      p.worst[t] = w;
    }
  }
  for (const auto& c : inst.couples) {
    auto pairs = listed_pairs(c);
    std::vector<bool> assigned(pairs.size(), false);
    int worst = -1;
    for (auto [r1, r2] : c.members) {
      TypeId h1 = part[r1].empty() ? d : inst.type_of(part[r1][0]);
      TypeId h2 = part[r2].empty() ? d : inst.type_of(part[r2][0]);
      worst = std::max(worst, couple_rank(c, h1, h2, d));
      for (size_t x = 0; x < pairs.size(); ++x)
        if (pairs[x] == TypePair{h1, h2}) assigned[x] = true;
    }
    p.couple_worst.push_back(worst);
    p.assigned.push_back(assigned);
  }
  return p;
}

bool hrc_profile_feasible(const TypedInstance& inst, const HrcProfile& p) {
  const int k = inst.k();
  const TypeId d = inst.dummy();
  if (static_cast<int>(p.worst.size()) != k || static_cast<int>(p.secondworst.size()) != k) return false;
  if (p.couple_worst.size() != inst.couples.size() || p.assigned.size() != inst.couples.size()) return false;
  auto valid = [&](TypeId t, TypeId v) { return v == d || (v >= 0 && v < k && inst.acceptable(t, v) && inst.class_rep(t, v) == v); };
  for (TypeId t = 0; t < k; ++t) {
    if (inst.types[t].count == 0) {
      if (p.worst[t] != kAbsent || p.secondworst[t] != kAbsent) return false;
      continue;
    }
    if (!valid(t, p.worst[t])) return false;
    bool wants_second = is_hospital(inst, t) && inst.slots(t) >= 2;
    if (wants_second ? !valid(t, p.secondworst[t]) : p.secondworst[t] != kAbsent) return false;
  }
  for (size_t c = 0; c < inst.couples.size(); ++c) {
    const auto& ct = inst.couples[c];
    auto pairs = listed_pairs(ct);
    if (p.assigned[c].size() != pairs.size()) return false;
    if (ct.count == 0) {
      if (p.couple_worst[c] != -1) return false;
      continue;
    }
    if (p.couple_worst[c] < 0 || p.couple_worst[c] > static_cast<int>(ct.prefs.size())) return false;
    for (size_t x = 0; x < pairs.size(); ++x)
      if (p.assigned[c][x] && group_of_pair(ct, static_cast<int>(x)) > p.couple_worst[c]) return false;
  }
  return true;
}

bool hrc_profile_stable(const TypedInstance& inst, const HrcProfile& p, CoupleRule rule) {
  if (!hrc_profile_feasible(inst, p)) throw SemanticError("infeasible couples profile");
  const int k = inst.k();
  const TypeId d = inst.dummy();
  auto open = [&](TypeId h) { return is_hospital(inst, h) && inst.slots(h) > 0; };
  auto wants = [&](TypeId h, TypeId r) { return inst.prefers(h, r, p.worst[h]); };

  // 1: single resident type and hospital type.
  for (TypeId i = 0; i < k; ++i) {
    if (is_hospital(inst, i) || p.worst[i] == kAbsent) continue;
    for (TypeId h = 0; h < k; ++h)
      if (open(h) && inst.prefers(i, h, p.worst[i]) && wants(h, i)) return false;
  }
  for (size_t c = 0; c < inst.couples.size(); ++c) {
    const auto& ct = inst.couples[c];
    if (ct.count == 0) continue;
    const TypeId i = ct.first, j = ct.second;
    auto pairs = listed_pairs(ct);
    auto rank = [&](TypeId a, TypeId b) { return couple_rank(ct, a, b, d); };
    // Member of type r moves to a hospital of type l while its partner, of
    // type r2, stays at a hospital of type h.
    auto joins = [&](TypeId l, TypeId r, TypeId h, TypeId r2) {
      if (rule == CoupleRule::literal || h != l || inst.class_rep(l, r2) != p.worst[l]) return wants(l, r);
      return p.secondworst[l] != kAbsent && inst.prefers(l, r, p.secondworst[l]);
    };
    for (TypeId l = 0; l < k; ++l) {
      if (!open(l)) continue;
      // 2: one member moves to a hospital of type l.
      for (size_t x = 0; x < pairs.size(); ++x) {
        if (!p.assigned[c][x]) continue;
        auto [pp, qq] = pairs[x];
        if (rank(l, qq) < rank(pp, qq) && joins(l, i, qq, j)) return false;
        if (rank(pp, l) < rank(pp, qq) && joins(l, j, pp, i)) return false;
      }
      // 3: both move, to hospitals of different types.
      for (TypeId h = 0; h < k; ++h)
        if (h != l && open(h) && rank(l, h) < p.couple_worst[c] && wants(l, i) && wants(h, j)) return false;
      // 4: both move to hospitals of type l.
      if (inst.slots(l) >= 2 && rank(l, l) < p.couple_worst[c] && wants(l, i) && wants(l, j) &&
          (inst.prefers(l, i, p.secondworst[l]) || inst.prefers(l, j, p.secondworst[l])))
        return false;
    }
  }
  return true;
}

std::optional<HrcRealised> max_realising_hrc(const TypedInstance& inst, const HrcProfile& p) {
  const int k = inst.k();
  const TypeId d = inst.dummy();
  ip::IntegerProgram prog;
  std::vector<std::vector<int>> single(k, std::vector<int>(k, -1));
  std::vector<int> single_free(k, -1), hosp_free(k, -1);
  std::vector<std::vector<int>> cvar(inst.couples.size());
  std::vector<int> cfree(inst.couples.size(), -1);
  std::vector<ip::Term> objective;

  for (TypeId i = 0; i < k; ++i) {
    if (is_hospital(inst, i)) {
      if (inst.slots(i) > 0) hosp_free[i] = prog.add_variable("f" + std::to_string(i + 1), 0, inst.slots(i));
      continue;
    }
    const int n = inst.types[i].count;
    if (n == 0) continue;
    for (TypeId h = 0; h < k; ++h)
      if (is_hospital(inst, h) && inst.slots(h) > 0 && inst.mutually_acceptable(i, h)) {
        single[i][h] = prog.add_variable("s" + std::to_string(i + 1) + "_" + std::to_string(h + 1), 0,
                                         std::min(n, inst.slots(h)));
        objective.emplace_back(single[i][h], 1);
      }
    single_free[i] = prog.add_variable("u" + std::to_string(i + 1), 0, n);
  }
  for (size_t c = 0; c < inst.couples.size(); ++c) {
    const auto& ct = inst.couples[c];
    auto pairs = listed_pairs(ct);
    cvar[c].assign(pairs.size(), -1);
    if (ct.count == 0) continue;
    for (size_t x = 0; x < pairs.size(); ++x) {
      auto [a, b] = pairs[x];
      bool fits = a == b ? inst.slots(a) >= 2 : inst.slots(a) >= 1 && inst.slots(b) >= 1;
      if (!fits || !inst.acceptable(a, ct.first) || !inst.acceptable(b, ct.second)) continue;
      cvar[c][x] = prog.add_variable("c" + std::to_string(c + 1) + "_" + std::to_string(x + 1), 0, ct.count);
      objective.emplace_back(cvar[c][x], 2);
    }
    cfree[c] = prog.add_variable("cu" + std::to_string(c + 1), 0, ct.count);
  }

  // Slots of hospital type h held by residents of type t (t = dummy: free).
  auto slot_terms = [&](TypeId h, TypeId t) {
    std::vector<ip::Term> terms;
    if (t == d) {
      terms.emplace_back(hosp_free[h], 1);
      return terms;
    }
    if (single[t][h] >= 0) terms.emplace_back(single[t][h], 1);
    for (size_t c = 0; c < inst.couples.size(); ++c) {
      auto pairs = listed_pairs(inst.couples[c]);
      for (size_t x = 0; x < pairs.size(); ++x) {
        if (cvar[c][x] < 0) continue;
        int coef = (pairs[x].first == h && inst.couples[c].first == t) + (pairs[x].second == h && inst.couples[c].second == t);
        if (coef) terms.emplace_back(cvar[c][x], coef);
      }
    }
    return terms;
  };
  auto class_terms = [&](TypeId h, const std::function<bool(TypeId)>& keep) {
    std::vector<ip::Term> terms;
    for (TypeId t = 0; t <= k; ++t) {
      if (t < k && (is_hospital(inst, t) || !inst.acceptable(h, t))) continue;
      if (!keep(t)) continue;
      auto s = slot_terms(h, t);
      terms.insert(terms.end(), s.begin(), s.end());
    }
    return terms;
  };

  for (TypeId i = 0; i < k; ++i) {
    if (is_hospital(inst, i)) {
      if (inst.slots(i) == 0) continue;
      prog.add_constraint(class_terms(i, [](TypeId) { return true; }), ip::Relation::eq, inst.slots(i));
      const TypeId w = p.worst[i];
      const int rw = inst.rank(i, w);
      prog.add_constraint(class_terms(i, [&](TypeId t) { return inst.rank(i, t) > rw; }), ip::Relation::eq, 0);
      if (inst.slots(i) < 2) {
        prog.add_constraint(class_terms(i, [&](TypeId t) { return inst.rank(i, t) == rw; }), ip::Relation::ge, 1);
        continue;
      }
      const TypeId sw = p.secondworst[i];
      const int rs = inst.rank(i, sw);
      if (rs == rw) {
        prog.add_constraint(class_terms(i, [&](TypeId t) { return inst.rank(i, t) == rw; }), ip::Relation::ge, 2);
      } else {
        prog.add_constraint(class_terms(i, [&](TypeId t) { return inst.rank(i, t) == rw; }), ip::Relation::eq, 1);
        prog.add_constraint(class_terms(i, [&](TypeId t) { return inst.rank(i, t) > rs && inst.rank(i, t) < rw; }),
                            ip::Relation::eq, 0);
        prog.add_constraint(class_terms(i, [&](TypeId t) { return inst.rank(i, t) == rs; }), ip::Relation::ge, 1);
      }
      continue;
    }
    if (single_free[i] < 0) continue;
    std::vector<ip::Term> row{{single_free[i], 1}}, worse, witness;
    const TypeId w = p.worst[i];
    const int rw = inst.rank(i, w);
    for (TypeId h = 0; h < k; ++h) {
      if (single[i][h] < 0) continue;
      row.emplace_back(single[i][h], 1);
      if (inst.rank(i, h) > rw) worse.emplace_back(single[i][h], 1);
      if (inst.rank(i, h) == rw) witness.emplace_back(single[i][h], 1);
    }
    prog.add_constraint(row, ip::Relation::eq, inst.types[i].count);
    if (w == d) {
      witness = {{single_free[i], 1}};
    } else {
      worse.emplace_back(single_free[i], 1);
    }
    prog.add_constraint(worse, ip::Relation::eq, 0);
    prog.add_constraint(witness, ip::Relation::ge, 1);
  }
  for (size_t c = 0; c < inst.couples.size(); ++c) {
    const auto& ct = inst.couples[c];
    if (ct.count == 0) continue;
    auto pairs = listed_pairs(ct);
    const int cw = p.couple_worst[c];
    const int unmatched = static_cast<int>(ct.prefs.size());
    std::vector<ip::Term> row{{cfree[c], 1}}, worse, witness;
    for (size_t x = 0; x < pairs.size(); ++x) {
      int g = group_of_pair(ct, static_cast<int>(x));
      if (cvar[c][x] < 0) {
        if (p.assigned[c][x]) return std::nullopt;
        continue;
      }
      row.emplace_back(cvar[c][x], 1);
      if (g > cw) worse.emplace_back(cvar[c][x], 1);
      if (g == cw) witness.emplace_back(cvar[c][x], 1);
      prog.add_constraint({{cvar[c][x], 1}}, p.assigned[c][x] ? ip::Relation::ge : ip::Relation::eq,
                          p.assigned[c][x] ? 1 : 0);
    }
    prog.add_constraint(row, ip::Relation::eq, ct.count);
    if (cw == unmatched) witness = {{cfree[c], 1}};
    else worse.emplace_back(cfree[c], 1);
    prog.add_constraint(worse, ip::Relation::eq, 0);
    prog.add_constraint(witness, ip::Relation::ge, 1);
  }
  ip::Objective obj;
  obj.sense = ip::Sense::maximize;
  obj.linear.assign(prog.variable_count(), 0);
  for (auto [v, c] : objective) obj.linear[v] += c;
  prog.set_objective(obj);
  auto res = ip::solve(prog);
  if (res.status != ip::Status::optimal) return std::nullopt;

  // Realise: hospital slots are handed out in agent order, couples first.
  std::vector<int> next(k, 0);
  auto take = [&](TypeId h) {
    int s = next[h]++;
    return inst.first_agent(h) + s / inst.types[h].capacity;
  };
  HrcRealised out;
  for (size_t c = 0; c < inst.couples.size(); ++c) {
    const auto& ct = inst.couples[c];
    auto pairs = listed_pairs(ct);
    size_t member = 0;
    for (size_t x = 0; x < pairs.size(); ++x) {
      if (cvar[c][x] < 0) continue;
      for (std::int64_t u = 0; u < res.assignment[cvar[c][x]]; ++u) {
        auto [r1, r2] = ct.members[member++];
        out.matching.add(r1, take(pairs[x].first));
        out.matching.add(r2, take(pairs[x].second));
      }
    }
  }
  for (TypeId i = 0; i < k; ++i) {
    int used = 0;
    for (TypeId h = 0; h < k; ++h) {
      if (single[i][h] < 0) continue;
      for (std::int64_t u = 0; u < res.assignment[single[i][h]]; ++u)
        out.matching.add(inst.first_agent(i) + used++, take(h));
    }
  }
  out.residents = static_cast<int>(res.value);
  return out;
}

std::optional<HrcResult> solve_max_hrc(const TypedInstance& inst, const typed::SolverOptions& opts) {
  if (inst.kind != ProblemKind::hrc) throw SemanticError("the couples solver needs an hrc instance");
  const int k = inst.k();
  const TypeId d = inst.dummy();

  // Per-type candidate lists, then per-couple (worst, assigned) options.
  std::vector<std::vector<TypeId>> wc(k), sc(k);
  for (TypeId t = 0; t < k; ++t) {
    if (inst.types[t].count == 0) {
      wc[t] = sc[t] = {kAbsent};
      continue;
    }
    for (const auto& g : inst.types[t].pref.groups) wc[t].push_back(*std::min_element(g.begin(), g.end()));
    wc[t].push_back(d);
    sc[t] = is_hospital(inst, t) && inst.slots(t) >= 2 ? wc[t] : std::vector<TypeId>{kAbsent};
  }
  struct CoupleOption {
    int worst;
    std::vector<bool> assigned;
  };
  std::vector<std::vector<CoupleOption>> co(inst.couples.size());
  for (size_t c = 0; c < inst.couples.size(); ++c) {
    const auto& ct = inst.couples[c];
    auto pairs = listed_pairs(ct);
    if (ct.count == 0) {
      co[c].push_back({-1, std::vector<bool>(pairs.size(), false)});
      continue;
    }
    const int unmatched = static_cast<int>(ct.prefs.size());
    for (int w = 0; w <= unmatched; ++w)
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pairs.size()); ++mask) {
        std::vector<bool> a(pairs.size(), false);
        bool ok = true, witness = w == unmatched;
        int used = 0;
        for (size_t x = 0; x < pairs.size(); ++x) {
          if (!(mask >> x & 1)) continue;
          int g = group_of_pair(ct, static_cast<int>(x));
          if (g > w) ok = false;
          if (g == w) witness = true;
          a[x] = true;
          ++used;
        }
        if (ok && witness && used + (w == unmatched ? 1 : 0) <= ct.count) co[c].push_back({w, a});
      }
  }

  std::vector<HrcProfile> stable;
  std::int64_t examined = 0;
  std::vector<size_t> dims;
  for (TypeId t = 0; t < k; ++t) dims.push_back(wc[t].size());
  for (TypeId t = 0; t < k; ++t) dims.push_back(sc[t].size());
  for (const auto& o : co) dims.push_back(o.size());
  std::vector<size_t> idx(dims.size(), 0);
  while (true) {
    HrcProfile p;
    for (TypeId t = 0; t < k; ++t) p.worst.push_back(wc[t][idx[t]]);
    for (TypeId t = 0; t < k; ++t) p.secondworst.push_back(sc[t][idx[k + t]]);
    for (size_t c = 0; c < co.size(); ++c) {
      const auto& o = co[c][idx[2 * k + c]];
      p.couple_worst.push_back(o.worst);
      p.assigned.push_back(o.assigned);
    }
    if (hrc_profile_feasible(inst, p)) {
      ++examined;
      if (hrc_profile_stable(inst, p)) stable.push_back(std::move(p));
    }
    int pos = static_cast<int>(dims.size()) - 1;
    while (pos >= 0 && ++idx[pos] == dims[pos]) idx[pos--] = 0;
    if (pos < 0) break;
  }

  std::vector<std::optional<HrcRealised>> results(stable.size());
  parallel_for(static_cast<int>(stable.size()), opts.jobs, [&](int s) { results[s] = max_realising_hrc(inst, stable[s]); });
  std::optional<HrcResult> best;
  for (size_t s = 0; s < stable.size(); ++s) {
    if (!results[s] || (best && results[s]->residents <= best->residents)) continue;
    best = HrcResult{results[s]->residents, results[s]->matching, stable[s], 0, 0};
  }
  if (best) {
    best->profiles_examined = examined;
    best->profiles_stable = static_cast<std::int64_t>(stable.size());
  }
  return best;
}

}  // namespace stm::hrc
