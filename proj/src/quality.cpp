#include "stm/quality.hpp"

#include <algorithm>
#include <limits>

#include "stm/graphalg.hpp"
#include "stm/parallel.hpp"

namespace stm::quality {

namespace {

void require_supported(const TypedInstance& inst) {
  if (inst.kind != ProblemKind::smti && inst.kind != ProblemKind::srti)
    throw SemanticError("blocking-pair objectives need an smti or srti instance");
}

// Agents of type i whose partner type is strictly worse (for i) than j.
std::int64_t worse_than(const TypedInstance& inst, const TypeCountMatrix& m, TypeId i, TypeId j) {
  std::int64_t a = 0;
  for (TypeId p = 0; p <= inst.k(); ++p)
    if (inst.prefers(i, j, p)) a += m.agents(i, p);
  return a;
}

}  // namespace

std::int64_t count_bp_from_counts(const TypedInstance& inst, const TypeCountMatrix& m) {
  require_supported(inst);
  const int k = inst.k();
  std::int64_t total = 0;
  for (TypeId i = 0; i < k; ++i) {
    for (TypeId j = i + 1; j < k; ++j) total += worse_than(inst, m, i, j) * worse_than(inst, m, j, i);
    std::int64_t a = worse_than(inst, m, i, i);
    total += a * (a - 1) / 2;
  }
  return total;
}

std::int64_t count_ba_from_counts(const TypedInstance& inst, const TypeCountMatrix& m) {
  require_supported(inst);
  const int k = inst.k();
  std::int64_t total = 0;
  for (TypeId i = 0; i < k; ++i)
    for (TypeId j = 0; j <= k; ++j) {
      if (m.agents(i, j) == 0) continue;
      bool blocks = false;
      for (TypeId y = 0; y < k && !blocks; ++y) {
        if (!inst.prefers(i, y, j)) continue;
        for (TypeId p = 0; p <= k && !blocks; ++p) {
          int others = m.agents(y, p) - (y == i && p == j ? 1 : 0);
          if (others > 0 && inst.prefers(y, i, p)) blocks = true;
        }
      }
      if (blocks) total += m.agents(i, j);
    }
  return total;
}

int max_cardinality(const TypedInstance& inst) {
  const int k = inst.k();
  if (inst.bipartite()) {
    graph::FlowNetwork net(k + 2, 0, 1);
    for (TypeId i = 0; i < k; ++i) {
      if (typed::on_first_side(inst, i)) {
        net.add_arc(0, 2 + i, inst.slots(i));
        for (TypeId j = 0; j < k; ++j)
          if (!typed::on_first_side(inst, j) && inst.mutually_acceptable(i, j))
            net.add_arc(2 + i, 2 + j, std::min(inst.slots(i), inst.slots(j)));
      } else {
        net.add_arc(2 + i, 1, inst.slots(i));
      }
    }
    return static_cast<int>(graph::max_flow(net).value);
  }
  graph::SimpleGraph g(inst.agent_count());
  for (AgentId a = 0; a < inst.agent_count(); ++a)
    for (AgentId b = a + 1; b < inst.agent_count(); ++b)
      if (inst.mutually_acceptable(inst.type_of(a), inst.type_of(b))) g.add_edge(a, b);
  return graph::matching_cardinality(graph::max_matching(g));
}

TypeCountMatrix CountProgram::decode(const std::vector<std::int64_t>& x) const {
  const int k = static_cast<int>(var.size()) - 1;
  TypeCountMatrix m(k);
  for (TypeId i = 0; i < k; ++i)
    for (TypeId j = i; j <= k; ++j)
      if (var[i][j] >= 0) m.set(i, j, static_cast<int>(x[var[i][j]]));
  return m;
}

CountProgram count_program(const TypedInstance& inst, bool require_max_size) {
  require_supported(inst);
  const int k = inst.k();
  CountProgram cp;
  cp.var.assign(k + 1, std::vector<int>(k + 1, -1));
  for (TypeId i = 0; i < k; ++i)
    for (TypeId j = i; j <= k; ++j) {
      if (j < k && !inst.mutually_acceptable(i, j)) continue;
      int ub = j == k ? inst.slots(i) : (i == j ? inst.slots(i) / 2 : std::min(inst.slots(i), inst.slots(j)));
      int v = cp.program.add_variable("n" + std::to_string(i + 1) + "_" + std::to_string(j + 1), 0, ub);
      cp.var[i][j] = cp.var[j][i] = v;
    }
  std::vector<ip::Term> real;
  for (TypeId i = 0; i < k; ++i) {
    std::vector<ip::Term> row;
    for (TypeId j = 0; j <= k; ++j)
      if (cp.var[i][j] >= 0) row.emplace_back(cp.var[i][j], i == j ? 2 : 1);
    cp.program.add_constraint(row, ip::Relation::eq, inst.slots(i));
    for (TypeId j = i; j < k; ++j)
      if (cp.var[i][j] >= 0) real.emplace_back(cp.var[i][j], 1);
  }
  if (require_max_size) cp.program.add_constraint(real, ip::Relation::eq, max_cardinality(inst));
  return cp;
}

void blocking_pair_form(const TypedInstance& inst, const CountProgram& cp,
                        std::vector<std::vector<std::int64_t>>& s, std::vector<std::int64_t>& l) {
  const int k = inst.k();
  const int n = cp.program.variable_count();
  s.assign(n, std::vector<std::int64_t>(n, 0));
  l.assign(n, 0);
  // Coefficients of "agents of type i with partner worse than j".
  auto worse = [&](TypeId i, TypeId j) {
    std::vector<std::int64_t> c(n, 0);
    for (TypeId p = 0; p <= k; ++p)
      if (cp.var[i][p] >= 0 && inst.prefers(i, j, p)) c[cp.var[i][p]] += i == p ? 2 : 1;
    return c;
  };
  for (TypeId i = 0; i < k; ++i) {
    for (TypeId j = i + 1; j < k; ++j) {
      auto a = worse(i, j), b = worse(j, i);
      for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) s[u][v] += a[u] * b[v] + a[v] * b[u];
    }
    auto a = worse(i, i);
    for (int u = 0; u < n; ++u) {
      l[u] -= a[u];
      for (int v = 0; v < n; ++v) s[u][v] += a[u] * a[v];
    }
  }
}

std::vector<bool> signature_of(const CountProgram& cp, const TypeCountMatrix& m) {
  std::vector<bool> sig(cp.program.variable_count(), false);
  const int k = static_cast<int>(cp.var.size()) - 1;
  for (TypeId i = 0; i < k; ++i)
    for (TypeId j = i; j <= k; ++j)
      if (cp.var[i][j] >= 0) sig[cp.var[i][j]] = m.get(i, j) > 0;
  return sig;
}

namespace {

QualityResult finish(const TypedInstance& inst, std::int64_t value, TypeCountMatrix counts) {
  QualityResult r;
  r.value = value;
  r.matching = typed::counts_to_matching(inst, counts);
  r.counts = std::move(counts);
  return r;
}

}  // namespace

QualityResult solve_min_bp(const TypedInstance& inst, bool require_max_size) {
  CountProgram cp = count_program(inst, require_max_size);
  ip::Objective obj;
  obj.sense = ip::Sense::minimize;
  std::vector<std::vector<std::int64_t>> s;
  blocking_pair_form(inst, cp, s, obj.linear);
  obj.quadratic = std::move(s);
  cp.program.set_objective(obj);
  auto res = ip::solve(cp.program);
  if (res.status != ip::Status::optimal) throw SemanticError("no matching satisfies the size constraint");
  return finish(inst, res.value / 2, cp.decode(res.assignment));
}

std::optional<QualityResult> solve_exact_bp(const TypedInstance& inst, std::int64_t z, bool require_max_size) {
  if (z < 0) return std::nullopt;
  CountProgram cp = count_program(inst, require_max_size);
  ip::QuadraticConstraint qc;
  blocking_pair_form(inst, cp, qc.q, qc.linear);
  qc.relation = ip::Relation::eq;
  qc.rhs = 2 * z;
  cp.program.add_quadratic_constraint(qc);
  ip::Objective obj;
  obj.sense = ip::Sense::minimize;
  cp.program.set_objective(obj);
  auto res = ip::solve(cp.program);
  if (res.status != ip::Status::optimal) return std::nullopt;
  return finish(inst, z, cp.decode(res.assignment));
}

QualityResult solve_min_ba(const TypedInstance& inst, bool require_max_size, const typed::SolverOptions& opts) {
  const int k = inst.k();
  CountProgram base = count_program(inst, require_max_size);
  const int nv = base.program.variable_count();
  const auto& vars = base.program.variables();

  // Signature bits: one per pair variable that can be positive, then one
  // "at least two agents of type i have a partner worse than i" bit per
  // self-acceptable type.
  std::vector<int> pair_bits;
  for (int u = 0; u < nv; ++u)
    if (vars[u].upper > 0) pair_bits.push_back(u);
  std::vector<TypeId> self_types;
  for (TypeId i = 0; i < k; ++i)
    if (inst.acceptable(i, i) && inst.slots(i) >= 2) self_types.push_back(i);
  const int bits = static_cast<int>(pair_bits.size() + self_types.size());
  if (bits > 24) throw SemanticError("too many type-signatures to enumerate");
  const std::int64_t total = std::int64_t{1} << bits;

  struct Best {
    std::int64_t value = std::numeric_limits<std::int64_t>::max();
    std::int64_t sig = -1;
    TypeCountMatrix counts;
  };
  std::int64_t examined = 0;
  const int chunks = 64;

  auto evaluate = [&](std::int64_t sig, Best& best) {
    std::vector<bool> on(nv, false);
    for (size_t b = 0; b < pair_bits.size(); ++b) on[pair_bits[b]] = (sig >> b) & 1;
    std::vector<bool> self(k, false);
    for (size_t b = 0; b < self_types.size(); ++b) self[self_types[b]] = (sig >> (pair_bits.size() + b)) & 1;
    // Every nonempty type needs a partner type in the signature.
    for (TypeId i = 0; i < k; ++i) {
      if (inst.slots(i) == 0) continue;
      bool any = false;
      for (TypeId j = 0; j <= k; ++j)
        if (base.var[i][j] >= 0 && on[base.var[i][j]]) any = true;
      if (!any) return false;
    }
    auto present = [&](TypeId a, TypeId b) { return base.var[a][b] >= 0 && on[base.var[a][b]]; };
    // b[i][j]: an agent of type i matched to type j blocks.
    auto blocks = [&](TypeId i, TypeId j) {
      for (TypeId y = 0; y < k; ++y) {
        if (!inst.prefers(i, y, j)) continue;
        if (y == i) {
          if (self[i]) return true;
          continue;
        }
        for (TypeId p = 0; p <= k; ++p)
          if (present(y, p) && inst.prefers(y, i, p)) return true;
      }
      return false;
    };
    ip::IntegerProgram prog = base.program;
    for (int u = 0; u < nv; ++u)
      prog.add_constraint({{u, 1}}, on[u] ? ip::Relation::ge : ip::Relation::eq, on[u] ? 1 : 0);
    for (TypeId i : self_types) {
      std::vector<ip::Term> w;
      for (TypeId p = 0; p <= k; ++p)
        if (base.var[i][p] >= 0 && inst.prefers(i, i, p)) w.emplace_back(base.var[i][p], i == p ? 2 : 1);
      prog.add_constraint(w, self[i] ? ip::Relation::ge : ip::Relation::le, self[i] ? 2 : 1);
    }
    ip::Objective obj;
    obj.sense = ip::Sense::minimize;
    obj.linear.assign(nv, 0);
    for (TypeId i = 0; i < k; ++i)
      for (TypeId j = i; j <= k; ++j) {
        int u = base.var[i][j];
        if (u < 0 || !on[u]) continue;
        if (i == j) obj.linear[u] = 2 * blocks(i, i);
        else obj.linear[u] = blocks(i, j) + (j < k ? blocks(j, i) : 0);
      }
    prog.set_objective(obj);
    auto res = ip::solve(prog);
    if (res.status != ip::Status::optimal) return true;
    if (res.value < best.value || (res.value == best.value && sig < best.sig)) {
      best.value = res.value;
      best.sig = sig;
      best.counts = base.decode(res.assignment);
    }
    return true;
  };

  std::vector<Best> chunk_best(chunks);
  std::vector<std::int64_t> chunk_examined(chunks, 0);
  parallel_for(chunks, opts.jobs, [&](int c) {
    for (std::int64_t sig = c; sig < total; sig += chunks)
      if (evaluate(sig, chunk_best[c])) ++chunk_examined[c];
  });
  Best best;
  for (int c = 0; c < chunks; ++c) {
    examined += chunk_examined[c];
    const Best& b = chunk_best[c];
    if (b.sig >= 0 && (b.value < best.value || (b.value == best.value && b.sig < best.sig))) best = b;
  }
  if (best.sig < 0) throw SemanticError("no matching satisfies the size constraint");
  QualityResult r = finish(inst, best.value, best.counts);
  r.signatures_examined = examined;
  return r;
}

}  // namespace stm::quality
