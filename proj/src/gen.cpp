#include "stm/gen.hpp"

#include <algorithm>
#include <numeric>

namespace stm::gen {

Model parse_model(const std::string& s) {
  if (s == "typed") return Model::typed;
  if (s == "refined") return Model::refined;
  if (s == "1top") return Model::one_top;
  if (s == "hrc") return Model::hrc;
  throw InputError("unknown model '" + s + "' (typed, refined, 1top, hrc)");
}

const char* to_string(Model m) {
  switch (m) {
    case Model::typed: return "typed";
    case Model::refined: return "refined";
    case Model::one_top: return "1top";
    case Model::hrc: return "hrc";
  }
  return "?";
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  // Rejection sampling on the top of the range keeps the draw unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do x = engine_(); while (x >= limit);
  return x % bound;
}

bool Rng::chance(double p) {
  if (p <= 0) return false;
  if (p >= 1) return true;
  return below(1'000'000) < static_cast<std::uint64_t>(p * 1'000'000);
}

namespace {

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

template <class T>
std::vector<std::vector<T>> into_groups(const std::vector<T>& items, double ties, Rng& rng) {
  std::vector<std::vector<T>> groups;
  for (const T& x : items) {
    if (groups.empty() || !rng.chance(ties)) groups.emplace_back();
    groups.back().push_back(x);
  }
  return groups;
}

template <class T>
std::vector<T> random_subset(const std::vector<T>& pool, double keep, Rng& rng) {
  std::vector<T> out;
  for (const T& x : pool)
    if (rng.chance(keep)) out.push_back(x);
  if (out.empty() && !pool.empty()) out.push_back(pool[rng.below(pool.size())]);
  shuffle(out, rng);
  return out;
}

void check_shape(const Shape& s) {
  bool bipartite = s.kind != ProblemKind::srti;
  if (s.k < (bipartite ? 2 : 1)) throw SemanticError("k is too small for the problem kind");
  if (s.min_count < 0 || s.max_count < s.min_count) throw SemanticError("need 0 <= min-count <= max-count");
  if (s.max_agents < 1 || s.max_capacity < 1) throw SemanticError("max-agents and max-capacity must be positive");
  for (double p : {s.accept, s.ties, s.exceptions, s.refine})
    if (p < 0 || p > 1) throw SemanticError("probabilities must lie in [0, 1]");
  if (s.couples < 0) throw SemanticError("couples must be non-negative");
  switch (s.model) {
    case Model::typed:
      if (s.kind == ProblemKind::hrc) throw SemanticError("use model hrc for couples");
      break;
    case Model::refined:
      if (s.kind != ProblemKind::smti && s.kind != ProblemKind::srti)
        throw SemanticError("refined instances are smti or srti");
      break;
    case Model::one_top:
      if (s.kind != ProblemKind::smti) throw SemanticError("1top instances are smti");
      break;
    case Model::hrc:
      if (2 * s.couples > s.max_agents) throw SemanticError("couples exceed max-agents");
      break;
  }
}

Side first_side(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::smti: return Side::man;
    case ProblemKind::srti: return Side::none;
    default: return Side::resident;
  }
}

Side second_side(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::smti: return Side::woman;
    case ProblemKind::srti: return Side::none;
    default: return Side::hospital;
  }
}

void add_refinements(TypedInstance& inst, double p, double ties, Rng& rng) {
  for (TypeId t = 0; t < inst.k(); ++t) {
    if (!rng.chance(p)) continue;
    Refinement ref;
    for (const auto& g : inst.types[t].pref.groups) {
      if (g.size() > 1) {
        // Tied types stay one whole group.
        std::vector<AgentId> all;
        for (TypeId u : g)
          for (int c = 0; c < inst.types[u].count; ++c) all.push_back(inst.first_agent(u) + c);
        if (!all.empty()) ref.groups.push_back(all);
        continue;
      }
      std::vector<AgentId> members(inst.types[g[0]].count);
      std::iota(members.begin(), members.end(), inst.first_agent(g[0]));
      shuffle(members, rng);
      for (auto& sub : into_groups(members, ties, rng)) ref.groups.push_back(sub);
    }
    inst.refinements[t] = ref;
  }
}

}  // namespace

TypedInstance generate(const Shape& shape, std::uint64_t seed) {
  check_shape(shape);
  Rng rng(seed);
  const ProblemKind kind = shape.model == Model::hrc ? ProblemKind::hrc : shape.kind;
  const int k = shape.k;
  TypedInstance inst;
  inst.kind = kind;
  inst.types.resize(k);
  for (TypeId t = 0; t < k; ++t) {
    auto& entry = inst.types[t];
    if (t == 0) entry.side = first_side(kind);
    else if (t == 1) entry.side = second_side(kind);
    else entry.side = rng.chance(0.5) ? first_side(kind) : second_side(kind);
    entry.count = rng.between(shape.min_count, shape.max_count);
    if (entry.side == Side::hospital) entry.capacity = rng.between(1, shape.max_capacity);
  }
  std::vector<TypeId> residents, hospitals;
  for (TypeId t = 0; t < k; ++t)
    (inst.types[t].side == Side::hospital ? hospitals : residents).push_back(t);

  const int couples = kind == ProblemKind::hrc ? shape.couples : 0;
  int budget = shape.max_agents - 2 * couples;
  auto total = [&] {
    int n = 0;
    for (const auto& s : inst.types) n += s.count;
    return n;
  };
  while (total() > budget) {
    auto big = std::max_element(inst.types.begin(), inst.types.end(),
                                 [](const TypeSpec& a, const TypeSpec& b) { return a.count < b.count; });
    --big->count;
  }

  for (TypeId t = 0; t < k; ++t) {
    std::vector<TypeId> pool;
    for (TypeId u = 0; u < k; ++u)
      if (sides_compatible(inst.types[t].side, inst.types[u].side)) pool.push_back(u);
    inst.types[t].pref.groups = into_groups(random_subset(pool, shape.accept, rng), shape.ties, rng);
  }

  for (int c = 0; c < couples; ++c) {
    CoupleType ct;
    ct.first = residents[rng.below(residents.size())];
    ct.second = residents[rng.below(residents.size())];
    if (ct.first > ct.second) std::swap(ct.first, ct.second);
    ct.count = 1;
    std::vector<TypePair> pool;
    for (TypeId p : hospitals)
      for (TypeId q : hospitals) pool.emplace_back(p, q);
    ct.prefs = into_groups(random_subset(pool, shape.accept, rng), shape.ties, rng);
    // Merge into an existing couple type with the same members and list.
    auto same = std::find_if(inst.couples.begin(), inst.couples.end(), [&](const CoupleType& o) {
      return o.first == ct.first && o.second == ct.second && o.prefs == ct.prefs;
    });
    if (same != inst.couples.end()) ++same->count;
    else inst.couples.push_back(ct);
  }
  inst.finalize();

  if (shape.model == Model::refined) add_refinements(inst, shape.refine, shape.ties, rng);
  if (shape.model == Model::one_top) {
    for (AgentId a = 0; a < inst.agent_count(); ++a) {
      if (!rng.chance(shape.exceptions)) continue;
      std::vector<AgentId> others;
      for (AgentId b = 0; b < inst.agent_count(); ++b)
        if (b != a && sides_compatible(inst.types[inst.type_of(a)].side, inst.types[inst.type_of(b)].side))
          others.push_back(b);
      if (others.empty()) continue;
      ExceptionEntry e;
      e.agent = a;
      e.candidate = others[rng.below(others.size())];
      e.placement = Placement::top;
      inst.exceptions.push_back(e);
    }
  }
  // Round trip through the file format so the result is validated.
  return parse_instance(format_instance(inst));
}

}  // namespace stm::gen
