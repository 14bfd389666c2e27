#include "stm/matching.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace stm {

std::vector<std::vector<AgentId>> AgentMatching::partners(int agent_count) const {
  std::vector<std::vector<AgentId>> out(agent_count);
  for (const auto& [a, b] : pairs) {
    out[a].push_back(b);
    out[b].push_back(a);
  }
  for (auto& p : out) std::sort(p.begin(), p.end());
  return out;
}

AgentMatching AgentMatching::canonical() const {
  AgentMatching m;
  for (const auto& [a, b] : pairs) m.add(a, b);
  std::sort(m.pairs.begin(), m.pairs.end());
  return m;
}

void validate_matching(const TypedInstance& inst, const AgentMatching& m) {
  const int n = inst.agent_count();
  std::set<std::pair<AgentId, AgentId>> seen;
  std::vector<int> load(n, 0);
  AgentPrefs prefs(inst);
  for (const auto& [a, b] : m.pairs) {
    if (a < 0 || b < 0 || a >= n || b >= n) throw SemanticError("matching names an unknown agent");
    if (a == b) throw SemanticError("agent " + inst.name(a) + " matched to itself");
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second)
      throw SemanticError("pair " + inst.name(a) + " " + inst.name(b) + " listed twice");
    ++load[a];
    ++load[b];
    if (inst.kind == ProblemKind::hrc) {
      Side sa = inst.types[inst.type_of(a)].side, sb = inst.types[inst.type_of(b)].side;
      if (!sides_compatible(sa, sb)) throw SemanticError("pair " + inst.name(a) + " " + inst.name(b) + " is not resident-hospital");
      AgentId r = sa == Side::resident ? a : b;
      AgentId h = sa == Side::resident ? b : a;
      if (!inst.acceptable(inst.type_of(h), inst.type_of(r)))
        throw SemanticError("hospital " + inst.name(h) + " does not accept " + inst.name(r));
      if (inst.couple_of(r) < 0 && !inst.acceptable(inst.type_of(r), inst.type_of(h)))
        throw SemanticError("resident " + inst.name(r) + " does not accept " + inst.name(h));
    } else if (!prefs.mutually_acceptable(a, b)) {
      throw SemanticError("pair " + inst.name(a) + " " + inst.name(b) + " is not mutually acceptable");
    }
  }
  for (AgentId a = 0; a < n; ++a)
    if (load[a] > inst.capacity(a)) throw SemanticError("agent " + inst.name(a) + " exceeds its capacity");
  if (inst.kind == ProblemKind::hrc) {
    auto part = m.partners(n);
    for (const auto& c : inst.couples) {
      for (const auto& [x, y] : c.members) {
        bool mx = !part[x].empty(), my = !part[y].empty();
        if (mx != my) throw SemanticError("couple " + inst.name(x) + "/" + inst.name(y) + " is half matched");
        if (!mx) continue;
        TypePair p{inst.type_of(part[x][0]), inst.type_of(part[y][0])};
        bool listed = false;
        for (const auto& g : c.prefs) listed = listed || std::find(g.begin(), g.end(), p) != g.end();
        if (!listed) throw SemanticError("couple " + inst.name(x) + "/" + inst.name(y) + " does not accept its hospitals");
      }
    }
  }
}

AgentMatching parse_matching(const TypedInstance& inst, const std::string& text) {
  AgentMatching m;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto h = raw.find('#'); h != std::string::npos) raw = raw.substr(0, h);
    std::istringstream ls(raw);
    std::string kw;
    if (!(ls >> kw)) continue;
    if (kw == "size" || kw == "blocking_pairs") continue;
    if (kw != "pair") throw SyntaxError(line, "expected 'pair <a> <b>'");
    std::string x, y, extra;
    if (!(ls >> x >> y) || (ls >> extra)) throw SyntaxError(line, "expected 'pair <a> <b>'");
    auto a = inst.find_agent(x);
    auto b = inst.find_agent(y);
    if (!a) throw SemanticError("unknown agent '" + x + "'");
    if (!b) throw SemanticError("unknown agent '" + y + "'");
    m.add(*a, *b);
  }
  return m;
}

AgentMatching load_matching(const TypedInstance& inst, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_matching(inst, ss.str());
}

}  // namespace stm
