#include "stm/oracle.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace stm::oracle {

void BlockingReport::add(AgentId a, AgentId b) {
  blocking_pairs.insert({std::min(a, b), std::max(a, b)});
  blocking_agents.insert(a);
  blocking_agents.insert(b);
}

namespace {

// a would accept b: a has a free slot or prefers b to a current partner.
bool wants(const TypedInstance& inst, const AgentPrefs& prefs,
           const std::vector<AgentId>& part, AgentId a, AgentId b) {
  if (!prefs.acceptable(a, b)) return false;
  if (static_cast<int>(part.size()) < inst.capacity(a)) return true;
  for (AgentId c : part)
    if (prefs.prefers(a, b, c)) return true;
  return false;
}

bool contains(const std::vector<AgentId>& v, AgentId x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

bool is_stable(const TypedInstance& inst, const AgentPrefs& prefs,
               const std::vector<std::vector<AgentId>>& partners) {
  const int n = inst.agent_count();
  for (AgentId a = 0; a < n; ++a)
    for (AgentId b = a + 1; b < n; ++b) {
      if (contains(partners[a], b)) continue;
      if (wants(inst, prefs, partners[a], a, b) && wants(inst, prefs, partners[b], b, a)) return false;
    }
  return true;
}

BlockingReport blocking_report(const TypedInstance& inst, const AgentMatching& m) {
  if (inst.kind == ProblemKind::hrc) return hrc_blocking_report(inst, m);
  validate_matching(inst, m);
  AgentPrefs prefs(inst);
  auto part = m.partners(inst.agent_count());
  BlockingReport rep;
  const int n = inst.agent_count();
  for (AgentId a = 0; a < n; ++a)
    for (AgentId b = a + 1; b < n; ++b) {
      if (contains(part[a], b)) continue;
      if (wants(inst, prefs, part[a], a, b) && wants(inst, prefs, part[b], b, a)) rep.add(a, b);
    }
  return rep;
}

// ------------------------------------------------------------------ HRC

namespace {

struct HrcView {
  const TypedInstance& inst;
  std::vector<std::vector<AgentId>> part;

  AgentId hospital_of(AgentId r) const { return part[r].empty() ? -1 : part[r][0]; }
  int cap(AgentId h) const { return inst.capacity(h); }
  int load(AgentId h) const { return static_cast<int>(part[h].size()); }
  bool accepts(AgentId h, AgentId r) const { return inst.acceptable(inst.type_of(h), inst.type_of(r)); }
  bool hosp_prefers(AgentId h, AgentId r, AgentId s) const {
    return inst.prefers(inst.type_of(h), inst.type_of(r), inst.type_of(s));
  }
  // h prefers r to some assignee other than those in `skip`.
  bool prefers_to_some(AgentId h, AgentId r, std::initializer_list<AgentId> skip = {}) const {
    for (AgentId s : part[h]) {
      if (std::find(skip.begin(), skip.end(), s) != skip.end()) continue;
      if (hosp_prefers(h, r, s)) return true;
    }
    return false;
  }
  // Rank of a hospital for a single resident; unmatched is worst.
  int single_rank(AgentId r, AgentId h) const {
    return h < 0 ? inst.rank(inst.type_of(r), inst.dummy()) : inst.rank(inst.type_of(r), inst.type_of(h));
  }
  // Rank of a hospital pair in a couple's joint list; kUnacceptable if
  // unlisted, list length for "jointly unmatched".
  int couple_rank(const CoupleType& c, AgentId h1, AgentId h2) const {
    if (h1 < 0 && h2 < 0) return static_cast<int>(c.prefs.size());
    if (h1 < 0 || h2 < 0) return kUnacceptable;
    TypePair p{inst.type_of(h1), inst.type_of(h2)};
    for (int g = 0; g < static_cast<int>(c.prefs.size()); ++g)
      if (std::find(c.prefs[g].begin(), c.prefs[g].end(), p) != c.prefs[g].end()) return g;
    return kUnacceptable;
  }
};

}  // namespace

BlockingReport hrc_blocking_report(const TypedInstance& inst, const AgentMatching& m) {
  validate_matching(inst, m);
  HrcView v{inst, m.partners(inst.agent_count())};
  BlockingReport rep;
  std::vector<AgentId> hospitals, singles;
  for (AgentId a = 0; a < inst.agent_count(); ++a) {
    Side s = inst.types[inst.type_of(a)].side;
    if (s == Side::hospital) hospitals.push_back(a);
    else if (inst.couple_of(a) < 0) singles.push_back(a);
  }
  auto note = [&](const std::string& label, AgentId r1, AgentId r2, AgentId h1, AgentId h2) {
    std::ostringstream os;
    os << label << " " << inst.name(r1);
    if (r2 >= 0) os << "," << inst.name(r2);
    os << " -> " << inst.name(h1);
    if (h2 >= 0) os << "," << inst.name(h2);
    rep.hrc_cases.push_back(os.str());
    rep.add(r1, h1);
    if (r2 >= 0 && h2 >= 0) rep.add(r2, h2);
  };

  // Case 1: single resident and hospital.
  for (AgentId r : singles) {
    AgentId cur = v.hospital_of(r);
    for (AgentId h : hospitals) {
      if (h == cur || !v.accepts(h, r)) continue;
      if (!(v.single_rank(r, h) < v.single_rank(r, cur))) continue;
      if (v.load(h) < v.cap(h) || v.prefers_to_some(h, r)) note("1", r, -1, h, -1);
    }
  }

  for (const auto& c : inst.couples) {
    for (const auto& [r1, r2] : c.members) {
      AgentId m1 = v.hospital_of(r1), m2 = v.hospital_of(r2);
      int current = v.couple_rank(c, m1, m2);
      // Case 2: one member moves, the other keeps its hospital.
      if (m1 >= 0 && m2 >= 0) {
        for (AgentId h : hospitals) {
          if (h != m1 && v.accepts(h, r1) && v.couple_rank(c, h, m2) < current &&
              (v.load(h) < v.cap(h) || v.prefers_to_some(h, r1, {r2})))
            note("2(a)", r1, -1, h, -1);
          if (h != m2 && v.accepts(h, r2) && v.couple_rank(c, m1, h) < current &&
              (v.load(h) < v.cap(h) || v.prefers_to_some(h, r2, {r1})))
            note("2(b)", r2, -1, h, -1);
        }
      }
      // Case 3: both members move.
      for (AgentId hk : hospitals) {
        if (hk == m1 || !v.accepts(hk, r1)) continue;
        for (AgentId hl : hospitals) {
          if (hl == m2 || !v.accepts(hl, r2)) continue;
          if (!(v.couple_rank(c, hk, hl) < current)) continue;
          if (hk != hl) {
            bool ok_k = v.load(hk) < v.cap(hk) || v.prefers_to_some(hk, r1);
            bool ok_l = v.load(hl) < v.cap(hl) || v.prefers_to_some(hl, r2);
            if (ok_k && ok_l) note("3(a)", r1, r2, hk, hl);
            continue;
          }
          AgentId h = hk;
          int free = v.cap(h) - v.load(h);
          if (free >= 2) {
            note("3(b)", r1, r2, h, h);
          } else if (free == 1 && (v.prefers_to_some(h, r1) || v.prefers_to_some(h, r2))) {
            note("3(c)", r1, r2, h, h);
          } else if (free == 0) {
            bool found = false;
            for (AgentId s : v.part[h])
              for (AgentId t : v.part[h])
                if (s != t && v.hosp_prefers(h, r1, s) && v.hosp_prefers(h, r2, t)) found = true;
            if (found) note("3(d)", r1, r2, h, h);
          }
        }
      }
    }
  }
  return rep;
}

// ----------------------------------------------------------- enumeration

int enumeration_cap(const TypedInstance& inst) {
  if (const char* env = std::getenv("STM_ORACLE_CAP")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return inst.bipartite() ? 12 : 10;
}

namespace {

void check_cap(const TypedInstance& inst) {
  int cap = enumeration_cap(inst);
  if (inst.agent_count() > cap)
    throw CapExceeded("instance has " + std::to_string(inst.agent_count()) + " agents; enumeration cap is " +
                      std::to_string(cap));
}

struct Enumerator {
  const TypedInstance& inst;
  AgentPrefs prefs;
  const std::function<bool(const AgentMatching&)>& visit;
  std::vector<int> load;
  AgentMatching current;
  bool stopped = false;

  void run(AgentId a, AgentId from) {
    if (stopped) return;
    const int n = inst.agent_count();
    if (a == n) {
      if (!visit(current)) stopped = true;
      return;
    }
    run(a + 1, a + 2);
    if (load[a] >= inst.capacity(a)) return;
    for (AgentId b = std::max(from, a + 1); b < n && !stopped; ++b) {
      if (load[b] >= inst.capacity(b) || !prefs.mutually_acceptable(a, b)) continue;
      ++load[a];
      ++load[b];
      current.pairs.emplace_back(a, b);
      run(a, b + 1);
      current.pairs.pop_back();
      --load[a];
      --load[b];
    }
  }
};

struct HrcEnumerator {
  const TypedInstance& inst;
  const std::function<bool(const AgentMatching&)>& visit;
  std::vector<AgentId> singles, hospitals;
  std::vector<std::pair<const CoupleType*, std::pair<AgentId, AgentId>>> couples;
  std::vector<int> load;
  AgentMatching current;
  bool stopped = false;

  bool room(AgentId h, int extra = 1) const { return load[h] + extra <= inst.capacity(h); }
  bool accepts(AgentId h, AgentId r) const { return inst.acceptable(inst.type_of(h), inst.type_of(r)); }

  void run(size_t unit) {
    if (stopped) return;
    const size_t total = singles.size() + couples.size();
    if (unit == total) {
      if (!visit(current)) stopped = true;
      return;
    }
    run(unit + 1);
    if (unit < singles.size()) {
      AgentId r = singles[unit];
      for (AgentId h : hospitals) {
        if (stopped) return;
        if (!room(h) || !accepts(h, r) || !inst.acceptable(inst.type_of(r), inst.type_of(h))) continue;
        ++load[h];
        current.pairs.emplace_back(std::min(r, h), std::max(r, h));
        run(unit + 1);
        current.pairs.pop_back();
        --load[h];
      }
      return;
    }
    const auto& [ct, members] = couples[unit - singles.size()];
    auto [r1, r2] = members;
    for (AgentId h1 : hospitals)
      for (AgentId h2 : hospitals) {
        if (stopped) return;
        if (!accepts(h1, r1) || !accepts(h2, r2)) continue;
        if (h1 == h2 ? !room(h1, 2) : (!room(h1) || !room(h2))) continue;
        TypePair p{inst.type_of(h1), inst.type_of(h2)};
        bool listed = false;
        for (const auto& g : ct->prefs) listed = listed || std::find(g.begin(), g.end(), p) != g.end();
        if (!listed) continue;
        ++load[h1];
        ++load[h2];
        current.pairs.emplace_back(std::min(r1, h1), std::max(r1, h1));
        current.pairs.emplace_back(std::min(r2, h2), std::max(r2, h2));
        run(unit + 1);
        current.pairs.pop_back();
        current.pairs.pop_back();
        --load[h1];
        --load[h2];
      }
  }
};

}  // namespace

void enumerate_matchings(const TypedInstance& inst,
                         const std::function<bool(const AgentMatching&)>& visit) {
  check_cap(inst);
  if (inst.kind == ProblemKind::hrc) {
    HrcEnumerator e{inst, visit, {}, {}, {}, std::vector<int>(inst.agent_count(), 0), {}, false};
    for (AgentId a = 0; a < inst.agent_count(); ++a) {
      Side s = inst.types[inst.type_of(a)].side;
      if (s == Side::hospital) e.hospitals.push_back(a);
      else if (inst.couple_of(a) < 0) e.singles.push_back(a);
    }
    for (const auto& c : inst.couples)
      for (const auto& mem : c.members) e.couples.push_back({&c, mem});
    e.run(0);
    return;
  }
  Enumerator e{inst, AgentPrefs(inst), visit, std::vector<int>(inst.agent_count(), 0), {}, false};
  e.run(0, 1);
}

std::vector<AgentMatching> all_matchings(const TypedInstance& inst) {
  std::vector<AgentMatching> out;
  enumerate_matchings(inst, [&](const AgentMatching& m) {
    out.push_back(m);
    return true;
  });
  return out;
}

int matching_size(const TypedInstance&, const AgentMatching& m) { return m.size(); }

namespace {

// Stability test shared by the brute-force optimisers.
struct StabilityProbe {
  const TypedInstance& inst;
  AgentPrefs prefs;
  explicit StabilityProbe(const TypedInstance& i) : inst(i), prefs(i) {}
  bool stable(const AgentMatching& m) const {
    if (inst.kind == ProblemKind::hrc) return hrc_blocking_report(inst, m).stable();
    return is_stable(inst, prefs, m.partners(inst.agent_count()));
  }
};

int max_cardinality(const TypedInstance& inst) {
  int best = 0;
  enumerate_matchings(inst, [&](const AgentMatching& m) {
    best = std::max(best, m.size());
    return true;
  });
  return best;
}

}  // namespace

std::optional<BruteResult> max_stable_brute(const TypedInstance& inst) {
  StabilityProbe probe(inst);
  std::optional<BruteResult> best;
  enumerate_matchings(inst, [&](const AgentMatching& m) {
    if ((!best || m.size() > best->value) && probe.stable(m)) best = BruteResult{m.size(), m};
    return true;
  });
  return best;
}

std::vector<AgentMatching> all_stable_matchings(const TypedInstance& inst) {
  StabilityProbe probe(inst);
  std::vector<AgentMatching> out;
  enumerate_matchings(inst, [&](const AgentMatching& m) {
    if (probe.stable(m)) out.push_back(m);
    return true;
  });
  return out;
}

namespace {

template <typename Score>
BruteResult min_over(const TypedInstance& inst, bool require_max_size, Score score) {
  int target = require_max_size ? max_cardinality(inst) : -1;
  std::optional<BruteResult> best;
  enumerate_matchings(inst, [&](const AgentMatching& m) {
    if (target >= 0 && m.size() != target) return true;
    int s = score(m);
    if (!best || s < best->value) best = BruteResult{s, m};
    return true;
  });
  return *best;
}

}  // namespace

BruteResult min_bp_brute(const TypedInstance& inst, bool require_max_size) {
  return min_over(inst, require_max_size, [&](const AgentMatching& m) {
    return static_cast<int>(blocking_report(inst, m).blocking_pairs.size());
  });
}

BruteResult min_ba_brute(const TypedInstance& inst, bool require_max_size) {
  return min_over(inst, require_max_size, [&](const AgentMatching& m) {
    return static_cast<int>(blocking_report(inst, m).blocking_agents.size());
  });
}

std::optional<AgentMatching> exact_bp_brute(const TypedInstance& inst, int z, bool require_max_size) {
  int target = require_max_size ? max_cardinality(inst) : -1;
  std::optional<AgentMatching> found;
  enumerate_matchings(inst, [&](const AgentMatching& m) {
    if (target >= 0 && m.size() != target) return true;
    if (static_cast<int>(blocking_report(inst, m).blocking_pairs.size()) == z) {
      found = m;
      return false;
    }
    return true;
  });
  return found;
}

// ------------------------------------------------------ complete matching

namespace {

constexpr int kComCap = 48;

struct ComSearch {
  const TypedInstance& inst;
  AgentPrefs prefs;
  std::vector<AgentId> left, right;
  std::vector<int> clone_class;  // for right-side agents
  std::vector<AgentId> mate;     // -1 if unassigned
  std::vector<std::vector<AgentId>> adj;

  ComSearch(const TypedInstance& i) : inst(i), prefs(i) {}

  bool interchangeable(AgentId x, AgentId y) const {
    const int n = inst.agent_count();
    for (AgentId z = 0; z < n; ++z) {
      if (z == x || z == y) continue;
      if (prefs.key(z, x) != prefs.key(z, y)) return false;
      if (prefs.key(x, z) != prefs.key(y, z)) return false;
    }
    return true;
  }

  // Kuhn's augmenting paths on the unassigned agents.
  bool completable() const {
    std::vector<AgentId> free_left;
    for (AgentId l : left)
      if (mate[l] < 0) free_left.push_back(l);
    std::vector<AgentId> owner(inst.agent_count(), -1);
    for (AgentId l : free_left) {
      std::vector<char> seen(inst.agent_count(), 0);
      std::function<bool(AgentId)> augment = [&](AgentId u) {
        for (AgentId r : adj[u]) {
          if (mate[r] >= 0 || seen[r]) continue;
          seen[r] = 1;
          if (owner[r] < 0 || augment(owner[r])) {
            owner[r] = u;
            return true;
          }
        }
        return false;
      };
      if (!augment(l)) return false;
    }
    return true;
  }

  bool blocks(AgentId l, AgentId r) const {
    return prefs.prefers(l, r, mate[l]) && prefs.prefers(r, l, mate[r]) && prefs.acceptable(l, r) &&
           prefs.acceptable(r, l);
  }

  bool search(size_t idx) {
    if (idx == left.size()) return true;
    AgentId l = left[idx];
    std::vector<int> tried_classes;
    for (AgentId r : adj[l]) {
      if (mate[r] >= 0) continue;
      if (std::find(tried_classes.begin(), tried_classes.end(), clone_class[r]) != tried_classes.end()) continue;
      tried_classes.push_back(clone_class[r]);
      mate[l] = r;
      mate[r] = l;
      bool ok = true;
      for (size_t j = 0; j < idx && ok; ++j) {
        AgentId l2 = left[j];
        if (blocks(l, mate[l2]) || blocks(l2, r)) ok = false;
      }
      if (ok && completable() && search(idx + 1)) return true;
      mate[l] = -1;
      mate[r] = -1;
    }
    return false;
  }

  bool run() {
    const int n = inst.agent_count();
    Side first = inst.types[0].side;
    for (AgentId a = 0; a < n; ++a) {
      if (inst.capacity(a) != 1) return false;
      (inst.types[inst.type_of(a)].side == first ? left : right).push_back(a);
    }
    if (left.size() != right.size()) return false;
    clone_class.assign(n, -1);
    int classes = 0;
    for (AgentId r : right) {
      for (AgentId s : right) {
        if (s >= r) break;
        if (interchangeable(r, s)) {
          clone_class[r] = clone_class[s];
          break;
        }
      }
      if (clone_class[r] < 0) clone_class[r] = classes++;
    }
    adj.assign(n, {});
    for (AgentId l : left)
      for (AgentId r : right)
        if (prefs.mutually_acceptable(l, r)) adj[l].push_back(r);
    mate.assign(n, -1);
    if (!completable()) return false;
    return search(0);
  }
};

}  // namespace

bool com_stable_exists_brute(const TypedInstance& inst) {
  if (inst.kind == ProblemKind::smti) {
    if (inst.agent_count() > kComCap) throw CapExceeded("complete-matching search is limited to 48 agents");
    if (inst.agent_count() == 0) return true;
    return ComSearch(inst).run();
  }
  StabilityProbe probe(inst);
  const int n = inst.agent_count();
  bool found = false;
  enumerate_matchings(inst, [&](const AgentMatching& m) {
    std::vector<int> load(n, 0);
    for (const auto& [a, b] : m.pairs) {
      ++load[a];
      ++load[b];
    }
    bool complete = true;
    for (AgentId a = 0; a < n; ++a)
      if (inst.types[inst.type_of(a)].side != Side::hospital && load[a] == 0) complete = false;
    if (complete && probe.stable(m)) found = true;
    return !found;
  });
  return found;
}

}  // namespace stm::oracle
