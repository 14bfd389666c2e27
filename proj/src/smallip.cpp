#include "stm/smallip.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <sstream>

#include "stm/core.hpp"

namespace stm::ip {

int IntegerProgram::add_variable(std::string name, std::int64_t lower, std::int64_t upper) {
  if (lower > upper) throw std::invalid_argument("variable " + name + " has an empty domain");
  vars_.push_back({std::move(name), lower, upper});
  return static_cast<int>(vars_.size()) - 1;
}

void IntegerProgram::add_constraint(std::vector<Term> terms, Relation rel, std::int64_t rhs) {
  // Merge repeated variables so propagation sees one coefficient each.
  std::map<int, std::int64_t> merged;
  for (const auto& [v, c] : terms) {
    if (v < 0 || v >= variable_count()) throw std::invalid_argument("constraint names unknown variable");
    merged[v] += c;
  }
  LinearConstraint lc;
  for (const auto& [v, c] : merged)
    if (c != 0) lc.terms.emplace_back(v, c);
  lc.relation = rel;
  lc.rhs = rhs;
  cons_.push_back(std::move(lc));
}

void IntegerProgram::add_dense_constraint(const std::vector<std::int64_t>& coefs, Relation rel, std::int64_t rhs) {
  if (static_cast<int>(coefs.size()) != variable_count())
    throw std::invalid_argument("coefficient vector does not match variable count");
  std::vector<Term> terms;
  for (int v = 0; v < variable_count(); ++v)
    if (coefs[v] != 0) terms.emplace_back(v, coefs[v]);
  add_constraint(std::move(terms), rel, rhs);
}

void IntegerProgram::add_strictly_greater(std::vector<Term> terms, std::int64_t rhs) {
  add_constraint(std::move(terms), Relation::ge, rhs + 1);
}

void IntegerProgram::add_quadratic_constraint(QuadraticConstraint c) {
  const size_t n = vars_.size();
  if (c.q.size() != n) throw std::invalid_argument("quadratic constraint has wrong dimension");
  for (const auto& row : c.q)
    if (row.size() != n) throw std::invalid_argument("quadratic constraint is not square");
  c.linear.resize(n, 0);
  quad_.push_back(std::move(c));
}

void IntegerProgram::set_objective(Objective obj) {
  const size_t n = vars_.size();
  obj.linear.resize(n, 0);
  if (obj.quadratic) {
    if (obj.quadratic->size() != n) throw std::invalid_argument("objective matrix has wrong dimension");
    for (const auto& row : *obj.quadratic)
      if (row.size() != n) throw std::invalid_argument("objective matrix is not square");
  }
  obj_ = std::move(obj);
}

namespace {

std::int64_t quad_value(const std::vector<std::vector<std::int64_t>>& q, const std::vector<std::int64_t>& lin,
                        const std::vector<std::int64_t>& x) {
  std::int64_t s = 0;
  for (size_t u = 0; u < x.size(); ++u) {
    if (u < lin.size()) s += lin[u] * x[u];
    if (q.empty()) continue;
    for (size_t v = 0; v < x.size(); ++v) s += q[u][v] * x[u] * x[v];
  }
  return s;
}

bool holds(std::int64_t lhs, Relation rel, std::int64_t rhs) {
  switch (rel) {
    case Relation::le: return lhs <= rhs;
    case Relation::eq: return lhs == rhs;
    case Relation::ge: return lhs >= rhs;
  }
  return false;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

struct Interval {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

Interval product(std::int64_t coef, Interval a, Interval b, bool same) {
  std::int64_t lo, hi;
  if (same) {
    if (a.lo >= 0) {
      lo = a.lo * a.lo;
      hi = a.hi * a.hi;
    } else if (a.hi <= 0) {
      lo = a.hi * a.hi;
      hi = a.lo * a.lo;
    } else {
      lo = 0;
      hi = std::max(a.lo * a.lo, a.hi * a.hi);
    }
  } else {
    std::int64_t c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    lo = *std::min_element(c, c + 4);
    hi = *std::max_element(c, c + 4);
  }
  if (coef >= 0) return {coef * lo, coef * hi};
  return {coef * hi, coef * lo};
}

class Search {
 public:
  Search(const IntegerProgram& ip, const Options& opts) : ip_(ip), opts_(opts) {
    const int n = ip.variable_count();
    const auto& obj = ip.objective();
    descending_.assign(n, false);
    for (int v = 0; v < n; ++v) {
      std::int64_t c = v < static_cast<int>(obj.linear.size()) ? obj.linear[v] : 0;
      descending_[v] = obj.sense == Sense::maximize ? c > 0 : c < 0;
    }
    if (obj.quadratic) {
      for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
          if ((*obj.quadratic)[u][v] != 0) quad_terms_.push_back({u, v, (*obj.quadratic)[u][v]});
    }
    for (const auto& qc : ip.quadratic_constraints()) {
      std::vector<QTerm> t;
      for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
          if (qc.q[u][v] != 0) t.push_back({u, v, qc.q[u][v]});
      qcons_terms_.push_back(std::move(t));
    }
  }

  Result run() {
    std::vector<std::int64_t> lo, hi;
    for (const auto& v : ip_.variables()) {
      if (v.upper - v.lower > opts_.max_domain) throw BudgetExceeded("variable " + v.name + " has too wide a domain");
      lo.push_back(v.lower);
      hi.push_back(v.upper);
    }
    dfs(lo, hi);
    result_.nodes = nodes_;
    return result_;
  }

 private:
  struct QTerm {
    int u, v;
    std::int64_t c;
  };

  bool propagate(std::vector<std::int64_t>& lo, std::vector<std::int64_t>& hi) const {
    for (int round = 0; round < 64; ++round) {
      bool changed = false;
      for (const auto& c : ip_.constraints()) {
        for (int dir = 0; dir < 2; ++dir) {
          // dir 0: sum <= rhs; dir 1: sum >= rhs, handled as -sum <= -rhs.
          if (dir == 0 && c.relation == Relation::ge) continue;
          if (dir == 1 && c.relation == Relation::le) continue;
          std::int64_t sign = dir == 0 ? 1 : -1;
          std::int64_t rhs = sign * c.rhs;
          std::int64_t min_act = 0;
          for (const auto& [v, a0] : c.terms) {
            std::int64_t a = sign * a0;
            min_act += a > 0 ? a * lo[v] : a * hi[v];
          }
          if (min_act > rhs) return false;
          for (const auto& [v, a0] : c.terms) {
            std::int64_t a = sign * a0;
            std::int64_t own = a > 0 ? a * lo[v] : a * hi[v];
            std::int64_t slack = rhs - (min_act - own);
            if (a > 0) {
              std::int64_t bound = floor_div(slack, a);
              if (bound < hi[v]) {
                hi[v] = bound;
                changed = true;
              }
            } else {
              std::int64_t bound = ceil_div(slack, a);
              if (bound > lo[v]) {
                lo[v] = bound;
                changed = true;
              }
            }
            if (lo[v] > hi[v]) return false;
          }
        }
      }
      if (!changed) break;
    }
    for (size_t i = 0; i < ip_.quadratic_constraints().size(); ++i) {
      const auto& qc = ip_.quadratic_constraints()[i];
      Interval r = range(qcons_terms_[i], qc.linear, lo, hi);
      if (qc.relation != Relation::ge && r.lo > qc.rhs) return false;
      if (qc.relation != Relation::le && r.hi < qc.rhs) return false;
    }
    return true;
  }

  Interval range(const std::vector<QTerm>& terms, const std::vector<std::int64_t>& lin,
                 const std::vector<std::int64_t>& lo, const std::vector<std::int64_t>& hi) const {
    Interval total;
    for (size_t v = 0; v < lin.size(); ++v) {
      Interval t = product(lin[v], {lo[v], hi[v]}, {1, 1}, false);
      total.lo += t.lo;
      total.hi += t.hi;
    }
    for (const auto& q : terms) {
      Interval t = product(q.c, {lo[q.u], hi[q.u]}, {lo[q.v], hi[q.v]}, q.u == q.v);
      total.lo += t.lo;
      total.hi += t.hi;
    }
    return total;
  }

  void dfs(std::vector<std::int64_t> lo, std::vector<std::int64_t> hi) {
    if (++nodes_ > opts_.node_limit) throw BudgetExceeded("branch-and-bound node limit exceeded");
    if (!propagate(lo, hi)) return;
    const auto& obj = ip_.objective();
    if (result_.status == Status::optimal) {
      Interval b = range(quad_terms_, obj.linear, lo, hi);
      if (obj.sense == Sense::maximize ? b.hi <= result_.value : b.lo >= result_.value) return;
    }
    int branch = -1;
    for (int v = 0; v < static_cast<int>(lo.size()); ++v)
      if (lo[v] < hi[v]) {
        branch = v;
        break;
      }
    if (branch < 0) {
      if (!ip_.feasible(lo)) return;
      std::int64_t value = ip_.evaluate(lo);
      bool better = result_.status != Status::optimal ||
                    (obj.sense == Sense::maximize ? value > result_.value : value < result_.value);
      if (better) {
        result_.status = Status::optimal;
        result_.value = value;
        result_.assignment = lo;
      }
      return;
    }
    std::int64_t a = lo[branch], b = hi[branch];
    for (std::int64_t i = 0; i <= b - a; ++i) {
      std::int64_t val = descending_[branch] ? b - i : a + i;
      lo[branch] = hi[branch] = val;
      dfs(lo, hi);
    }
  }

  const IntegerProgram& ip_;
  Options opts_;
  std::vector<bool> descending_;
  std::vector<QTerm> quad_terms_;
  std::vector<std::vector<QTerm>> qcons_terms_;
  Result result_;
  std::int64_t nodes_ = 0;
};

}  // namespace

std::int64_t IntegerProgram::evaluate(const std::vector<std::int64_t>& x) const {
  static const std::vector<std::vector<std::int64_t>> none;
  return quad_value(obj_.quadratic ? *obj_.quadratic : none, obj_.linear, x);
}

bool IntegerProgram::feasible(const std::vector<std::int64_t>& x) const {
  if (x.size() != vars_.size()) return false;
  for (size_t v = 0; v < x.size(); ++v)
    if (x[v] < vars_[v].lower || x[v] > vars_[v].upper) return false;
  for (const auto& c : cons_) {
    std::int64_t s = 0;
    for (const auto& [v, a] : c.terms) s += a * x[v];
    if (!holds(s, c.relation, c.rhs)) return false;
  }
  for (const auto& qc : quad_)
    if (!holds(quad_value(qc.q, qc.linear, x), qc.relation, qc.rhs)) return false;
  return true;
}

Result solve(const IntegerProgram& ip, const Options& opts) { return Search(ip, opts).run(); }

// ------------------------------------------------------------- parsing

namespace {

// Parses "<c> x + <c> y*z - <c> w" into linear and quadratic parts.
void parse_expression(const std::string& text, const std::map<std::string, int>& index, int line,
                      std::vector<Term>& linear, std::vector<std::tuple<int, int, std::int64_t>>& quad) {
  std::istringstream in(text);
  std::string tok;
  std::int64_t sign = 1;
  std::optional<std::int64_t> coef;
  auto lookup = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw SyntaxError(line, "unknown variable '" + name + "'");
    return it->second;
  };
  while (in >> tok) {
    if (tok == "+") {
      sign = 1;
      continue;
    }
    if (tok == "-") {
      sign = -1;
      continue;
    }
    bool numeric = !tok.empty() && (std::isdigit(static_cast<unsigned char>(tok[0])) ||
                                    ((tok[0] == '-' || tok[0] == '+') && tok.size() > 1));
    if (numeric && !coef) {
      try {
        coef = std::stoll(tok);
      } catch (const std::exception&) {
        throw SyntaxError(line, "bad coefficient '" + tok + "'");
      }
      continue;
    }
    std::int64_t c = sign * coef.value_or(1);
    if (auto star = tok.find('*'); star != std::string::npos) {
      quad.emplace_back(lookup(tok.substr(0, star)), lookup(tok.substr(star + 1)), c);
    } else {
      linear.emplace_back(lookup(tok), c);
    }
    coef.reset();
    sign = 1;
  }
  if (coef) throw SyntaxError(line, "dangling coefficient");
}

}  // namespace

IntegerProgram parse_program(const std::string& text) {
  IntegerProgram ip;
  std::map<std::string, int> index;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  struct Pending {
    int line;
    std::string text;
  };
  std::vector<Pending> cons;
  std::optional<Pending> objective;
  Sense sense = Sense::maximize;
  while (std::getline(in, raw)) {
    ++line;
    if (auto h = raw.find('#'); h != std::string::npos) raw = raw.substr(0, h);
    std::istringstream ls(raw);
    std::string kw;
    if (!(ls >> kw)) continue;
    std::string rest;
    std::getline(ls, rest);
    if (kw == "var") {
      std::istringstream vs(rest);
      std::string name;
      std::int64_t lo = 0, hi = 0;
      if (!(vs >> name >> lo >> hi)) throw SyntaxError(line, "expected 'var <name> <lo> <hi>'");
      if (index.count(name)) throw SyntaxError(line, "duplicate variable '" + name + "'");
      index[name] = ip.add_variable(name, lo, hi);
    } else if (kw == "max:" || kw == "min:") {
      if (objective) throw SyntaxError(line, "duplicate objective");
      sense = kw == "max:" ? Sense::maximize : Sense::minimize;
      objective = Pending{line, rest};
    } else if (kw == "con:") {
      cons.push_back({line, rest});
    } else {
      throw SyntaxError(line, "unknown keyword '" + kw + "'");
    }
  }
  const int n = ip.variable_count();
  Objective obj;
  obj.sense = sense;
  obj.linear.assign(n, 0);
  if (objective) {
    std::vector<Term> lin;
    std::vector<std::tuple<int, int, std::int64_t>> quad;
    parse_expression(objective->text, index, objective->line, lin, quad);
    for (const auto& [v, c] : lin) obj.linear[v] += c;
    if (!quad.empty()) {
      obj.quadratic = std::vector<std::vector<std::int64_t>>(n, std::vector<std::int64_t>(n, 0));
      for (const auto& [u, v, c] : quad) (*obj.quadratic)[u][v] += c;
    }
  }
  ip.set_objective(obj);
  for (const auto& c : cons) {
    std::string body = c.text;
    Relation rel;
    size_t pos;
    if ((pos = body.find("<=")) != std::string::npos) rel = Relation::le;
    else if ((pos = body.find(">=")) != std::string::npos) rel = Relation::ge;
    else if ((pos = body.find('=')) != std::string::npos) rel = Relation::eq;
    else throw SyntaxError(c.line, "constraint needs <=, = or >=");
    size_t width = rel == Relation::eq ? 1 : 2;
    std::int64_t rhs = 0;
    try {
      rhs = std::stoll(body.substr(pos + width));
    } catch (const std::exception&) {
      throw SyntaxError(c.line, "bad right-hand side");
    }
    std::vector<Term> lin;
    std::vector<std::tuple<int, int, std::int64_t>> quad;
    parse_expression(body.substr(0, pos), index, c.line, lin, quad);
    if (quad.empty()) {
      ip.add_constraint(lin, rel, rhs);
    } else {
      QuadraticConstraint qc;
      qc.q.assign(n, std::vector<std::int64_t>(n, 0));
      qc.linear.assign(n, 0);
      for (const auto& [u, v, k] : quad) qc.q[u][v] += k;
      for (const auto& [v, k] : lin) qc.linear[v] += k;
      qc.relation = rel;
      qc.rhs = rhs;
      ip.add_quadratic_constraint(qc);
    }
  }
  return ip;
}

}  // namespace stm::ip
