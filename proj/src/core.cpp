#include "stm/core.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace stm {

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::smti: return "smti";
    case ProblemKind::srti: return "srti";
    case ProblemKind::hrt: return "hrt";
    case ProblemKind::hrc: return "hrc";
  }
  return "?";
}

const char* to_string(Side side) {
  switch (side) {
    case Side::man: return "m";
    case Side::woman: return "w";
    case Side::hospital: return "h";
    case Side::resident: return "r";
    case Side::none: return "none";
  }
  return "?";
}

bool is_bipartite_side(Side side) { return side != Side::none; }

bool sides_compatible(Side a, Side b) {
  switch (a) {
    case Side::man: return b == Side::woman;
    case Side::woman: return b == Side::man;
    case Side::hospital: return b == Side::resident;
    case Side::resident: return b == Side::hospital;
    case Side::none: return b == Side::none;
  }
  return false;
}

TypeId TypedInstance::class_rep(TypeId i, TypeId j) const {
  if (j == dummy() || j < 0) return j;
  int r = rank(i, j);
  if (r == kUnacceptable) return j;
  const auto& g = types[i].pref.groups[r];
  return *std::min_element(g.begin(), g.end());
}

std::optional<AgentId> TypedInstance::find_agent(const std::string& n) const {
  for (AgentId a = 0; a < agent_count(); ++a)
    if (agent_name_[a] == n) return a;
  return std::nullopt;
}

int TypedInstance::capacity(AgentId a) const {
  const auto& t = types[agent_type_[a]];
  return t.side == Side::hospital ? t.capacity : 1;
}

int TypedInstance::slots(TypeId t) const {
  const auto& spec = types[t];
  return spec.side == Side::hospital ? spec.count * spec.capacity : spec.count;
}

namespace {

std::string default_prefix(Side side) {
  switch (side) {
    case Side::man: return "m";
    case Side::woman: return "w";
    case Side::hospital: return "h";
    case Side::resident: return "r";
    case Side::none: return "a";
  }
  return "x";
}

}  // namespace

void TypedInstance::finalize() {
  const int kk = k();
  refinements.resize(kk);
  rank_.assign(kk, std::vector<int>(kk + 1, kUnacceptable));
  for (TypeId i = 0; i < kk; ++i) {
    const auto& groups = types[i].pref.groups;
    for (int g = 0; g < static_cast<int>(groups.size()); ++g)
      for (TypeId j : groups[g]) rank_[i][j] = g;
    rank_[i][kk] = static_cast<int>(groups.size());
  }

  std::map<std::string, int> counters;
  agent_type_.clear();
  agent_name_.clear();
  first_agent_.assign(kk, 0);
  for (TypeId t = 0; t < kk; ++t) {
    auto& spec = types[t];
    if (static_cast<int>(spec.names.size()) != spec.count) {
      spec.names.clear();
      std::string prefix = default_prefix(spec.side);
      for (int c = 0; c < spec.count; ++c)
        spec.names.push_back(prefix + std::to_string(++counters[prefix]));
    } else {
      counters[default_prefix(spec.side)] += spec.count;
    }
    first_agent_[t] = static_cast<AgentId>(agent_type_.size());
    for (int c = 0; c < spec.count; ++c) {
      agent_type_.push_back(t);
      agent_name_.push_back(spec.names[c]);
    }
  }
  couple_index_.assign(agent_type_.size(), -1);
  int couple_no = 0;
  for (int ci = 0; ci < static_cast<int>(couples.size()); ++ci) {
    auto& c = couples[ci];
    c.members.clear();
    for (int u = 0; u < c.count; ++u) {
      ++couple_no;
      AgentId a = static_cast<AgentId>(agent_type_.size());
      agent_type_.push_back(c.first);
      agent_name_.push_back("c" + std::to_string(couple_no) + "a");
      agent_type_.push_back(c.second);
      agent_name_.push_back("c" + std::to_string(couple_no) + "b");
      couple_index_.push_back(ci);
      couple_index_.push_back(ci);
      c.members.emplace_back(a, a + 1);
    }
  }
}

// ---------------------------------------------------------------- parsing

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// "(a b) c (d)" -> {{a,b},{c},{d}}
std::vector<std::vector<std::string>> parse_groups(const std::string& s, int line,
                                                   char open = '(', char close = ')') {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> current;
  bool in_group = false;
  std::string tok;
  auto flush = [&] {
    if (tok.empty()) return;
    if (in_group) {
      current.push_back(tok);
    } else {
      out.push_back({tok});
    }
    tok.clear();
  };
  for (char ch : s) {
    if (ch == open) {
      flush();
      if (in_group) throw SyntaxError(line, "nested group");
      in_group = true;
    } else if (ch == close) {
      flush();
      if (!in_group) throw SyntaxError(line, "unbalanced ')'");
      if (current.empty()) throw SyntaxError(line, "empty tie group");
      out.push_back(current);
      current.clear();
      in_group = false;
    } else if (std::isspace(static_cast<unsigned char>(ch)) || ch == ',') {
      flush();
    } else {
      tok += ch;
    }
  }
  flush();
  if (in_group) throw SyntaxError(line, "unterminated group");
  return out;
}

int parse_int(const std::string& s, int line, const std::string& what) {
  if (s.empty()) throw SyntaxError(line, "missing " + what);
  size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(s, &pos);
  } catch (const std::exception&) {
    throw SyntaxError(line, "bad integer for " + what + ": '" + s + "'");
  }
  if (pos != s.size()) throw SyntaxError(line, "bad integer for " + what + ": '" + s + "'");
  return v;
}

Side parse_side(const std::string& s, int line) {
  if (s == "m") return Side::man;
  if (s == "w") return Side::woman;
  if (s == "h") return Side::hospital;
  if (s == "r") return Side::resident;
  if (s == "none") return Side::none;
  throw SyntaxError(line, "unknown side '" + s + "'");
}

// key=value tokens; the value of `rest_key` swallows the rest of the line.
std::map<std::string, std::string> parse_fields(const std::string& text, int line,
                                                const std::string& rest_key) {
  std::map<std::string, std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    size_t eq = text.find('=', i);
    if (eq == std::string::npos) throw SyntaxError(line, "expected key=value near '" + text.substr(i) + "'");
    std::string key = trim(text.substr(i, eq - i));
    if (key.empty() || key.find(' ') != std::string::npos)
      throw SyntaxError(line, "malformed field near '" + text.substr(i) + "'");
    if (out.count(key)) throw SyntaxError(line, "duplicate field '" + key + "'");
    if (key == rest_key) {
      out[key] = trim(text.substr(eq + 1));
      break;
    }
    size_t end = eq + 1;
    int depth = 0;
    while (end < text.size() && (depth > 0 || !std::isspace(static_cast<unsigned char>(text[end])))) {
      if (text[end] == '(') ++depth;
      if (text[end] == ')') --depth;
      ++end;
    }
    out[key] = text.substr(eq + 1, end - eq - 1);
    i = end;
  }
  return out;
}

struct PendingLine {
  int line;
  std::string text;
};

void validate_prefs(const TypedInstance& inst) {
  const int k = inst.k();
  for (TypeId i = 0; i < k; ++i) {
    const auto& spec = inst.types[i];
    std::set<TypeId> seen;
    bool any = false;
    for (const auto& g : spec.pref.groups) {
      for (TypeId j : g) {
        if (j < 0 || j >= k)
          throw SemanticError("type " + std::to_string(i + 1) + " lists unknown type " + std::to_string(j + 1));
        if (!seen.insert(j).second)
          throw SemanticError("type " + std::to_string(i + 1) + " lists type " + std::to_string(j + 1) + " twice");
        if (!sides_compatible(spec.side, inst.types[j].side))
          throw SemanticError("type " + std::to_string(i + 1) + " lists type " + std::to_string(j + 1) +
                              " from an incompatible side");
        any = true;
      }
    }
    if (!any) throw SemanticError("type " + std::to_string(i + 1) + " finds no type acceptable");
  }
}

void validate_refinement(const TypedInstance& inst, TypeId t) {
  const auto& ref = *inst.refinements[t];
  std::vector<int> group_of(inst.agent_count(), -1);
  for (int g = 0; g < static_cast<int>(ref.groups.size()); ++g) {
    for (AgentId a : ref.groups[g]) {
      if (group_of[a] >= 0) throw SemanticError("refinement of type " + std::to_string(t + 1) + " lists " + inst.name(a) + " twice");
      group_of[a] = g;
      if (!inst.acceptable(t, inst.type_of(a)))
        throw SemanticError("refinement of type " + std::to_string(t + 1) + " lists " + inst.name(a) +
                            " whose type is unacceptable");
    }
  }
  // Each type occupies a contiguous block of groups; blocks of different
  // types overlap only when they coincide (whole-type ties).
  const int k = inst.k();
  std::vector<int> lo(k, 1 << 30), hi(k, -1);
  for (AgentId a = 0; a < inst.agent_count(); ++a) {
    if (group_of[a] < 0) continue;
    TypeId u = inst.type_of(a);
    lo[u] = std::min(lo[u], group_of[a]);
    hi[u] = std::max(hi[u], group_of[a]);
  }
  for (int g = 0; g < static_cast<int>(ref.groups.size()); ++g) {
    std::set<TypeId> in_group;
    for (AgentId a : ref.groups[g]) in_group.insert(inst.type_of(a));
    if (in_group.size() > 1)
      for (TypeId u : in_group)
        if (lo[u] != g || hi[u] != g)
          throw SemanticError("refinement of type " + std::to_string(t + 1) +
                              " ties types that are not whole blocks");
  }
  for (TypeId u = 0; u < k; ++u) {
    if (hi[u] < 0) continue;
    for (int g = lo[u]; g <= hi[u]; ++g)
      for (AgentId a : ref.groups[g])
        if (TypeId v = inst.type_of(a); v != u && (lo[v] != lo[u] || hi[v] != hi[u]))
          throw SemanticError("refinement of type " + std::to_string(t + 1) + " interleaves types");
  }
  for (TypeId u = 0; u < k; ++u) {
    for (TypeId v = 0; v < k; ++v) {
      if (hi[u] < 0 || hi[v] < 0 || u == v) continue;
      bool tied_types = inst.rank(t, u) == inst.rank(t, v);
      bool tied_blocks = lo[u] == lo[v];
      bool before = hi[u] < lo[v];
      if (tied_types != tied_blocks || (inst.rank(t, u) < inst.rank(t, v) && !before))
        throw SemanticError("refinement of type " + std::to_string(t + 1) +
                            " disagrees with its type-level list");
    }
  }
}

void validate_exceptions(const TypedInstance& inst) {
  std::vector<int> per_agent(inst.agent_count(), 0);
  for (const auto& e : inst.exceptions) {
    if (e.agent == e.candidate) throw SemanticError("agent " + inst.name(e.agent) + " cannot be its own exception");
    if (!sides_compatible(inst.types[inst.type_of(e.agent)].side, inst.types[inst.type_of(e.candidate)].side))
      throw SemanticError("exception " + inst.name(e.agent) + " -> " + inst.name(e.candidate) + " crosses incompatible sides");
    TypeId t = inst.type_of(e.agent);
    for (TypeId u : {e.first, e.second})
      if (u >= 0 && !inst.acceptable(t, u))
        throw SemanticError("exception placement for " + inst.name(e.agent) + " names an unacceptable type");
    if (e.placement == Placement::tie_between && !(inst.rank(t, e.first) < inst.rank(t, e.second)))
      throw SemanticError("exception placement for " + inst.name(e.agent) + " needs two types in list order");
    ++per_agent[e.agent];
  }
  for (size_t i = 0; i < inst.exceptions.size(); ++i)
    for (size_t j = 0; j < i; ++j)
      if (inst.exceptions[i].agent == inst.exceptions[j].agent &&
          inst.exceptions[i].candidate == inst.exceptions[j].candidate)
        throw SemanticError("duplicate exception for " + inst.name(inst.exceptions[i].agent));
}

}  // namespace

TypedInstance parse_instance(const std::string& text) {
  TypedInstance inst;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  bool have_problem = false;
  int k = -1;
  std::vector<bool> defined;
  std::vector<std::vector<std::vector<std::string>>> raw_prefs;
  std::vector<PendingLine> refines, excepts, couples;

  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    if (auto hash = s.find('#'); hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    std::istringstream ls(s);
    std::string kw;
    ls >> kw;
    std::string rest = trim(s.substr(kw.size()));
    if (kw == "problem") {
      if (have_problem) throw SyntaxError(line, "duplicate problem line");
      if (rest == "smti") inst.kind = ProblemKind::smti;
      else if (rest == "srti") inst.kind = ProblemKind::srti;
      else if (rest == "hrt") inst.kind = ProblemKind::hrt;
      else if (rest == "hrc") inst.kind = ProblemKind::hrc;
      else throw SyntaxError(line, "unknown problem '" + rest + "'");
      have_problem = true;
    } else if (kw == "types") {
      if (k >= 0) throw SyntaxError(line, "duplicate types line");
      k = parse_int(rest, line, "types");
      if (k < 1) throw SemanticError("types must be at least 1");
      inst.types.resize(k);
      defined.assign(k, false);
      raw_prefs.resize(k);
    } else if (kw == "type") {
      if (!have_problem || k < 0) throw SyntaxError(line, "type line before problem/types");
      std::string id_tok;
      std::istringstream rs(rest);
      rs >> id_tok;
      int id = parse_int(id_tok, line, "type id");
      if (id < 1 || id > k) throw SemanticError("type id " + std::to_string(id) + " out of range");
      if (defined[id - 1]) throw SemanticError("type " + std::to_string(id) + " defined twice");
      defined[id - 1] = true;
      auto fields = parse_fields(trim(rest.substr(id_tok.size())), line, "prefs");
      auto& spec = inst.types[id - 1];
      for (const auto& [key, value] : fields) {
        if (key == "side") spec.side = parse_side(value, line);
        else if (key == "count") spec.count = parse_int(value, line, "count");
        else if (key == "cap") spec.capacity = parse_int(value, line, "cap");
        else if (key == "names") {
          spec.names.clear();
          std::string nm;
          std::istringstream ns(value);
          while (std::getline(ns, nm, ',')) spec.names.push_back(trim(nm));
        } else if (key == "prefs") raw_prefs[id - 1] = parse_groups(value, line);
        else throw SyntaxError(line, "unknown field '" + key + "'");
      }
      if (!fields.count("side") || !fields.count("count") || !fields.count("prefs"))
        throw SyntaxError(line, "type line needs side=, count= and prefs=");
      if (spec.count < 0) throw SemanticError("negative count for type " + std::to_string(id));
      if (fields.count("cap") && spec.side != Side::hospital)
        throw SemanticError("cap= is only valid for hospital types");
      if (spec.capacity < 1) throw SemanticError("capacity must be positive");
      if (!spec.names.empty() && static_cast<int>(spec.names.size()) != spec.count)
        throw SemanticError("type " + std::to_string(id) + " has " + std::to_string(spec.names.size()) +
                            " names but count " + std::to_string(spec.count));
    } else if (kw == "refine") {
      refines.push_back({line, rest});
    } else if (kw == "except") {
      excepts.push_back({line, rest});
    } else if (kw == "couple") {
      couples.push_back({line, rest});
    } else {
      throw SyntaxError(line, "unknown keyword '" + kw + "'");
    }
  }
  if (!have_problem) throw SyntaxError(line, "missing problem line");
  if (k < 0) throw SyntaxError(line, "missing types line");
  for (int t = 0; t < k; ++t)
    if (!defined[t]) throw SemanticError("type " + std::to_string(t + 1) + " is not defined");

  for (int t = 0; t < k; ++t) {
    for (const auto& g : raw_prefs[t]) {
      std::vector<TypeId> group;
      for (const auto& tok : g) {
        int v = 0;
        try {
          v = std::stoi(tok);
        } catch (const std::exception&) {
          throw SemanticError("type " + std::to_string(t + 1) + " prefs contain '" + tok + "'");
        }
        group.push_back(v - 1);
      }
      inst.types[t].pref.groups.push_back(group);
    }
  }

  for (TypeId t = 0; t < k; ++t) {
    Side side = inst.types[t].side;
    bool ok = false;
    switch (inst.kind) {
      case ProblemKind::smti: ok = side == Side::man || side == Side::woman; break;
      case ProblemKind::srti: ok = side == Side::none; break;
      case ProblemKind::hrt:
      case ProblemKind::hrc: ok = side == Side::hospital || side == Side::resident; break;
    }
    if (!ok)
      throw SemanticError("side " + std::string(to_string(side)) + " of type " + std::to_string(t + 1) +
                          " does not fit problem " + to_string(inst.kind));
  }
  validate_prefs(inst);

  for (const auto& c : couples) {
    if (inst.kind != ProblemKind::hrc) throw SemanticError("couples are only valid for hrc");
    auto fields = parse_fields(c.text, c.line, "prefs");
    if (!fields.count("types") || !fields.count("count") || !fields.count("prefs"))
      throw SyntaxError(c.line, "couple line needs types=, count= and prefs=");
    CoupleType ct;
    auto tg = parse_groups(fields["types"], c.line);
    if (tg.size() != 1 || tg[0].size() != 2) throw SyntaxError(c.line, "types= must look like (i,j)");
    ct.first = parse_int(tg[0][0], c.line, "couple type") - 1;
    ct.second = parse_int(tg[0][1], c.line, "couple type") - 1;
    ct.count = parse_int(fields["count"], c.line, "count");
    if (ct.count < 0) throw SemanticError("negative couple count");
    for (TypeId u : {ct.first, ct.second})
      if (u < 0 || u >= k || inst.types[u].side != Side::resident)
        throw SemanticError("couple types must be resident types");
    // Tie groups of pairs are written [ (1,2) (2,1) ].
    std::string body = fields["prefs"];
    std::vector<std::vector<TypePair>> prefs;
    bool in_tie = false;
    std::vector<TypePair> tie;
    size_t i = 0;
    while (i < body.size()) {
      char ch = body[i];
      if (std::isspace(static_cast<unsigned char>(ch))) {
        ++i;
      } else if (ch == '[') {
        if (in_tie) throw SyntaxError(c.line, "nested tie in couple prefs");
        in_tie = true;
        ++i;
      } else if (ch == ']') {
        if (!in_tie || tie.empty()) throw SyntaxError(c.line, "bad tie in couple prefs");
        prefs.push_back(tie);
        tie.clear();
        in_tie = false;
        ++i;
      } else if (ch == '(') {
        size_t close = body.find(')', i);
        if (close == std::string::npos) throw SyntaxError(c.line, "unterminated hospital pair");
        auto parts = parse_groups(body.substr(i + 1, close - i - 1), c.line);
        if (parts.size() != 2) throw SyntaxError(c.line, "hospital pair needs two types");
        TypePair p{parse_int(parts[0][0], c.line, "hospital type") - 1,
                   parse_int(parts[1][0], c.line, "hospital type") - 1};
        for (TypeId u : {p.first, p.second})
          if (u < 0 || u >= k || inst.types[u].side != Side::hospital)
            throw SemanticError("couple preference names a non-hospital type");
        if (in_tie) tie.push_back(p);
        else prefs.push_back({p});
        i = close + 1;
      } else {
        throw SyntaxError(c.line, std::string("unexpected '") + ch + "' in couple prefs");
      }
    }
    if (in_tie) throw SyntaxError(c.line, "unterminated tie in couple prefs");
    if (prefs.empty()) throw SemanticError("couple finds no hospital pair acceptable");
    std::set<TypePair> seen;
    for (const auto& g : prefs)
      for (const auto& p : g)
        if (!seen.insert(p).second) throw SemanticError("couple lists a hospital pair twice");
    // Store couples with the smaller resident type first.
    if (ct.first > ct.second) {
      std::swap(ct.first, ct.second);
      for (auto& g : prefs)
        for (auto& p : g) std::swap(p.first, p.second);
    }
    ct.prefs = std::move(prefs);
    inst.couples.push_back(ct);
  }

  inst.finalize();

  for (const auto& r : refines) {
    if (inst.kind != ProblemKind::smti && inst.kind != ProblemKind::srti)
      throw SemanticError("refinements are only valid for smti and srti");
    auto colon = r.text.find(':');
    if (colon == std::string::npos) throw SyntaxError(r.line, "refine needs '<type>:'");
    int t = parse_int(trim(r.text.substr(0, colon)), r.line, "refine type") - 1;
    if (t < 0 || t >= k) throw SemanticError("refine names unknown type");
    if (inst.refinements[t]) throw SemanticError("type " + std::to_string(t + 1) + " refined twice");
    Refinement ref;
    for (const auto& g : parse_groups(r.text.substr(colon + 1), r.line)) {
      std::vector<AgentId> group;
      for (const auto& nm : g) {
        auto a = inst.find_agent(nm);
        if (!a) throw SemanticError("refinement names unknown agent '" + nm + "'");
        group.push_back(*a);
      }
      ref.groups.push_back(group);
    }
    inst.refinements[t] = ref;
    validate_refinement(inst, t);
  }

  for (const auto& e : excepts) {
    if (inst.kind != ProblemKind::smti && inst.kind != ProblemKind::srti)
      throw SemanticError("exceptions are only valid for smti and srti");
    auto fields = parse_fields(e.text, e.line, "");
    if (!fields.count("agent") || !fields.count("cand") || !fields.count("place"))
      throw SyntaxError(e.line, "except needs agent=, cand= and place=");
    ExceptionEntry entry;
    auto a = inst.find_agent(fields["agent"]);
    auto b = inst.find_agent(fields["cand"]);
    if (!a || !b) throw SemanticError("exception names an unknown agent");
    entry.agent = *a;
    entry.candidate = *b;
    std::string place = fields["place"];
    if (place == "top") {
      entry.placement = Placement::top;
    } else if (place == "bottom") {
      entry.placement = Placement::bottom;
    } else if (place.rfind("after:", 0) == 0) {
      entry.placement = Placement::after_type;
      entry.first = parse_int(place.substr(6), e.line, "after type") - 1;
    } else if (place.rfind("tiebetween:", 0) == 0) {
      entry.placement = Placement::tie_between;
      std::string two = place.substr(11);
      auto comma = two.find(',');
      if (comma == std::string::npos) throw SyntaxError(e.line, "tiebetween needs two types");
      entry.first = parse_int(two.substr(0, comma), e.line, "tiebetween type") - 1;
      entry.second = parse_int(two.substr(comma + 1), e.line, "tiebetween type") - 1;
    } else {
      throw SyntaxError(e.line, "unknown placement '" + place + "'");
    }
    for (TypeId u : {entry.first, entry.second})
      if (u != -1 && (u < 0 || u >= k)) throw SemanticError("placement names unknown type");
    inst.exceptions.push_back(entry);
  }
  bool refined = std::any_of(inst.refinements.begin(), inst.refinements.end(),
                             [](const auto& r) { return r.has_value(); });
  if (refined && !inst.exceptions.empty())
    throw SemanticError("exceptions cannot be combined with refinements");
  validate_exceptions(inst);
  return inst;
}

TypedInstance load_instance(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_instance(ss.str());
}

std::string format_instance(const TypedInstance& inst) {
  std::ostringstream out;
  out << "problem " << to_string(inst.kind) << "\n";
  out << "types " << inst.k() << "\n";
  for (TypeId t = 0; t < inst.k(); ++t) {
    const auto& s = inst.types[t];
    out << "type " << t + 1 << " side=" << to_string(s.side) << " count=" << s.count;
    if (s.side == Side::hospital) out << " cap=" << s.capacity;
    if (s.count > 0) {
      out << " names=";
      for (int c = 0; c < s.count; ++c) out << (c ? "," : "") << s.names[c];
    }
    out << " prefs=";
    bool first = true;
    for (const auto& g : s.pref.groups) {
      out << (first ? "" : " ");
      first = false;
      if (g.size() > 1) out << "(";
      for (size_t x = 0; x < g.size(); ++x) out << (x ? " " : "") << g[x] + 1;
      if (g.size() > 1) out << ")";
    }
    out << "\n";
  }
  for (TypeId t = 0; t < inst.k(); ++t) {
    if (t >= static_cast<int>(inst.refinements.size()) || !inst.refinements[t]) continue;
    out << "refine " << t + 1 << ":";
    for (const auto& g : inst.refinements[t]->groups) {
      out << " ";
      if (g.size() > 1) out << "(";
      for (size_t x = 0; x < g.size(); ++x) out << (x ? " " : "") << inst.name(g[x]);
      if (g.size() > 1) out << ")";
    }
    out << "\n";
  }
  for (const auto& e : inst.exceptions) {
    out << "except agent=" << inst.name(e.agent) << " cand=" << inst.name(e.candidate) << " place=";
    switch (e.placement) {
      case Placement::top: out << "top"; break;
      case Placement::bottom: out << "bottom"; break;
      case Placement::after_type: out << "after:" << e.first + 1; break;
      case Placement::tie_between: out << "tiebetween:" << e.first + 1 << "," << e.second + 1; break;
    }
    out << "\n";
  }
  for (const auto& c : inst.couples) {
    out << "couple types=(" << c.first + 1 << "," << c.second + 1 << ") count=" << c.count << " prefs=";
    bool first = true;
    for (const auto& g : c.prefs) {
      out << (first ? "" : " ");
      first = false;
      if (g.size() > 1) out << "[";
      for (size_t x = 0; x < g.size(); ++x)
        out << (x ? " " : "") << "(" << g[x].first + 1 << "," << g[x].second + 1 << ")";
      if (g.size() > 1) out << "]";
    }
    out << "\n";
  }
  return out.str();
}

// ------------------------------------------------------------ agent prefs

namespace {
constexpr std::int64_t kGroupStride = 1000;
constexpr std::int64_t kBetween = 500;

std::int64_t group_key(int g) { return kGroupStride * (g + 1); }
}  // namespace

AgentPrefs::AgentPrefs(const TypedInstance& inst) : inst_(&inst) {
  exception_keys_.assign(inst.agent_count(), {});
  for (const auto& e : inst.exceptions) {
    auto& list = exception_keys_[e.agent];
    std::int64_t order = static_cast<std::int64_t>(list.size()) + 1;
    TypeId t = inst.type_of(e.agent);
    std::int64_t key = 0;
    switch (e.placement) {
      case Placement::top: key = order; break;
      case Placement::bottom:
        key = group_key(static_cast<int>(inst.types[t].pref.groups.size())) + order;
        break;
      case Placement::after_type: key = group_key(inst.rank(t, e.first)) + kBetween + order; break;
      case Placement::tie_between: key = group_key(inst.rank(t, e.first)) + kBetween; break;
    }
    list.emplace_back(e.candidate, key);
  }
  refined_group_.assign(inst.k(), {});
  for (TypeId t = 0; t < inst.k(); ++t) {
    if (t >= static_cast<int>(inst.refinements.size()) || !inst.refinements[t]) continue;
    auto& map = refined_group_[t];
    map.assign(inst.agent_count(), -1);
    const auto& groups = inst.refinements[t]->groups;
    for (int g = 0; g < static_cast<int>(groups.size()); ++g)
      for (AgentId a : groups[g]) map[a] = g;
  }
}

std::optional<std::int64_t> AgentPrefs::key(AgentId a, AgentId b) const {
  if (a == b) return std::nullopt;
  for (const auto& [cand, key] : exception_keys_[a])
    if (cand == b) return key;
  TypeId t = inst_->type_of(a);
  const auto& map = refined_group_[t];
  if (!map.empty()) {
    if (map[b] < 0) return std::nullopt;
    return group_key(map[b]);
  }
  int r = inst_->rank(t, inst_->type_of(b));
  if (r == kUnacceptable) return std::nullopt;
  return group_key(r);
}

bool AgentPrefs::prefers(AgentId a, AgentId b, AgentId c) const {
  auto kb = key(a, b);
  if (!kb) return false;
  if (c < 0) return true;
  auto kc = key(a, c);
  return !kc || *kb < *kc;
}

bool AgentPrefs::exceptional(AgentId a, AgentId b) const {
  for (const auto& [cand, key] : exception_keys_[a])
    if (cand == b) return true;
  return false;
}

AgentLevelInstance expand_to_agent_level(const TypedInstance& inst) {
  if (inst.kind == ProblemKind::hrc) throw SemanticError("hrc instances have no plain agent-level form");
  AgentPrefs prefs(inst);
  AgentLevelInstance out;
  out.kind = inst.kind;
  const int n = inst.agent_count();
  for (AgentId a = 0; a < n; ++a) {
    out.names.push_back(inst.name(a));
    out.sides.push_back(inst.types[inst.type_of(a)].side);
    out.capacities.push_back(inst.capacity(a));
    std::vector<std::pair<std::int64_t, AgentId>> acc;
    for (AgentId b = 0; b < n; ++b)
      if (auto key = prefs.key(a, b)) acc.emplace_back(*key, b);
    std::sort(acc.begin(), acc.end());
    AgentList list;
    for (size_t x = 0; x < acc.size(); ++x) {
      if (x == 0 || acc[x].first != acc[x - 1].first) list.emplace_back();
      list.back().push_back(acc[x].second);
    }
    out.prefs.push_back(list);
  }
  return out;
}

// ---------------------------------------------------------- derive types

namespace {

// Dense ranks of a sequence, so two lists compare as weak orders.
std::vector<int> dense(const std::vector<int>& v) {
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> out(v.size());
  for (size_t i = 0; i < v.size(); ++i)
    out[i] = v[i] == kUnacceptable ? -1
                                   : static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), v[i]) -
                                                      sorted.begin());
  return out;
}

bool same_agent_lists(const AgentLevelInstance& a, const AgentLevelInstance& b) {
  if (a.names != b.names) return false;
  for (size_t x = 0; x < a.prefs.size(); ++x) {
    if (a.prefs[x].size() != b.prefs[x].size()) return false;
    for (size_t g = 0; g < a.prefs[x].size(); ++g) {
      auto ga = a.prefs[x][g], gb = b.prefs[x][g];
      std::sort(ga.begin(), ga.end());
      std::sort(gb.begin(), gb.end());
      if (ga != gb) return false;
    }
  }
  return true;
}

}  // namespace

TypedInstance derive_types(const AgentLevelInstance& agents) {
  const int n = static_cast<int>(agents.names.size());
  std::vector<std::vector<int>> rank(n, std::vector<int>(n, kUnacceptable));
  for (int a = 0; a < n; ++a)
    for (int g = 0; g < static_cast<int>(agents.prefs[a].size()); ++g)
      for (AgentId b : agents.prefs[a][g]) rank[a][b] = g;

  auto compatible = [&](int x, int y) {
    if (agents.sides[x] != agents.sides[y] || agents.capacities[x] != agents.capacities[y]) return false;
    std::vector<int> rx, ry;
    for (int z = 0; z < n; ++z) {
      if (z == x || z == y) continue;
      if (rank[z][x] != rank[z][y]) return false;
      rx.push_back(rank[x][z]);
      ry.push_back(rank[y][z]);
    }
    rx.push_back(rank[x][y]);
    ry.push_back(rank[y][x]);
    return dense(rx) == dense(ry);
  };

  std::vector<std::vector<int>> classes;
  std::vector<int> class_of(n, -1);
  for (int a = 0; a < n; ++a) {
    for (int c = 0; c < static_cast<int>(classes.size()) && class_of[a] < 0; ++c) {
      bool ok = std::all_of(classes[c].begin(), classes[c].end(), [&](int b) { return compatible(a, b); });
      if (ok) {
        classes[c].push_back(a);
        class_of[a] = c;
      }
    }
    if (class_of[a] < 0) {
      class_of[a] = static_cast<int>(classes.size());
      classes.push_back({a});
    }
  }

  TypedInstance inst;
  inst.kind = agents.kind;
  for (const auto& members : classes) {
    TypeSpec spec;
    int x = members.front();
    spec.side = agents.sides[x];
    spec.count = static_cast<int>(members.size());
    spec.capacity = agents.capacities[x];
    for (int m : members) spec.names.push_back(agents.names[m]);
    for (const auto& g : agents.prefs[x]) {
      std::vector<TypeId> group;
      for (AgentId b : g)
        if (std::find(group.begin(), group.end(), class_of[b]) == group.end()) group.push_back(class_of[b]);
      std::sort(group.begin(), group.end());
      spec.pref.groups.push_back(group);
    }
    inst.types.push_back(spec);
  }
  // Agents are renumbered by type; check the typed form reproduces the input.
  inst.finalize();
  AgentLevelInstance back = expand_to_agent_level(inst);
  AgentLevelInstance permuted = agents;
  std::vector<int> new_index(n);
  for (int a = 0; a < n; ++a) new_index[a] = *inst.find_agent(agents.names[a]);
  for (int a = 0; a < n; ++a) {
    permuted.names[new_index[a]] = agents.names[a];
    AgentList list;
    for (const auto& g : agents.prefs[a]) {
      std::vector<AgentId> mapped;
      for (AgentId b : g) mapped.push_back(new_index[b]);
      list.push_back(mapped);
    }
    permuted.prefs[new_index[a]] = list;
  }
  if (!same_agent_lists(back, permuted))
    throw SemanticError("agent lists are not consistent with any type partition");
  return inst;
}

TypedInstance normalize_with_dummies(const TypedInstance& inst) {
  if (inst.kind == ProblemKind::hrc) throw SemanticError("hrc instances keep the dummy implicit");
  TypedInstance out = inst;
  int n = 0;
  for (TypeId t = 0; t < inst.k(); ++t) n += inst.slots(t);
  const int k = inst.k();
  auto real_types_on = [&](auto pred) {
    std::vector<TypeId> g;
    for (TypeId t = 0; t < k; ++t)
      if (pred(inst.types[t].side)) g.push_back(t);
    return g;
  };
  if (inst.kind == ProblemKind::srti) {
    TypeSpec d;
    d.side = Side::none;
    d.count = n;
    d.pref.groups.push_back(real_types_on([](Side) { return true; }));
    for (int c = 0; c < n; ++c) d.names.push_back("d" + std::to_string(c + 1));
    for (TypeId t = 0; t < k; ++t) out.types[t].pref.groups.push_back({k});
    out.types.push_back(d);
  } else {
    // The first real type's side decides which dummy type comes first.
    Side first = inst.types[0].side;
    Side other = first;
    for (TypeId t = 0; t < k; ++t)
      if (inst.types[t].side != first) other = inst.types[t].side;
    auto make = [&](Side side, Side partners, const std::string& prefix) {
      TypeSpec d;
      d.side = side;
      d.count = n;
      d.capacity = 1;
      d.pref.groups.push_back(real_types_on([&](Side s) { return s == partners; }));
      for (int c = 0; c < n; ++c) d.names.push_back(prefix + std::to_string(c + 1));
      return d;
    };
    TypeSpec d1 = make(other, first, "d");
    TypeSpec d2 = make(first, other, "e");
    if (d1.pref.groups[0].empty() || d2.pref.groups[0].empty())
      throw SemanticError("bipartite instance needs types on both sides");
    for (TypeId t = 0; t < k; ++t) out.types[t].pref.groups.push_back({inst.types[t].side == first ? k : k + 1});
    out.types.push_back(d1);
    out.types.push_back(d2);
  }
  // Keep refinements and exceptions pointing at the same agents.
  out.refinements.resize(out.k());
  for (TypeId t = 0; t < k; ++t) {
    if (!out.refinements[t]) continue;
    out.refinements[t]->groups.push_back({});
  }
  out.finalize();
  for (TypeId t = 0; t < k; ++t) {
    if (!out.refinements[t]) continue;
    auto& last = out.refinements[t]->groups.back();
    TypeId d = out.types[t].pref.groups.back()[0];
    for (int c = 0; c < out.types[d].count; ++c) last.push_back(out.first_agent(d) + c);
  }
  return out;
}

int TypeCountMatrix::row_agents(TypeId i) const {
  int s = 0;
  for (TypeId j = 0; j <= k_; ++j) s += agents(i, j);
  return s;
}

int TypeCountMatrix::size() const {
  int s = 0;
  for (TypeId i = 0; i < k_; ++i)
    for (TypeId j = i; j < k_; ++j) s += get(i, j);
  return s;
}

}  // namespace stm
