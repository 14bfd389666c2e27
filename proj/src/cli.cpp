#include "stm/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "stm/exceptions.hpp"
#include "stm/gen.hpp"
#include "stm/hrc.hpp"
#include "stm/oracle.hpp"
#include "stm/quality.hpp"
#include "stm/reductions.hpp"
#include "stm/refined.hpp"
#include "stm/smallip.hpp"
#include "stm/typed.hpp"

namespace stm::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

double since_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

Report named_pairs(const TypedInstance& inst, const std::vector<std::pair<AgentId, AgentId>>& pairs) {
  Report out = Report::array();
  for (auto [a, b] : pairs) out.push_back({inst.name(a), inst.name(b)});
  return out;
}

void add_blocking(Report& r, const TypedInstance& inst, const oracle::BlockingReport& br) {
  r["blocking_pairs"] = br.blocking_pairs.size();
  r["blocking_agents"] = br.blocking_agents.size();
  r["blocks"] = named_pairs(inst, {br.blocking_pairs.begin(), br.blocking_pairs.end()});
  if (!br.hrc_cases.empty()) r["hrc_cases"] = br.hrc_cases;
}

struct Objective {
  refined::QualityObjective::Kind kind = refined::QualityObjective::Kind::min_bp;
  bool max_size_objective = true;
  std::int64_t z = 0;
};

Objective parse_objective(const std::string& s) {
  Objective o;
  if (s == "max-size") return o;
  o.max_size_objective = false;
  if (s == "min-bp") {
    o.kind = refined::QualityObjective::Kind::min_bp;
  } else if (s == "min-ba") {
    o.kind = refined::QualityObjective::Kind::min_ba;
  } else if (s.rfind("exact-bp:", 0) == 0) {
    o.kind = refined::QualityObjective::Kind::exact_bp;
    try {
      size_t used = 0;
      o.z = std::stoll(s.substr(9), &used);
      if (used != s.size() - 9 || o.z < 0) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw InputError("exact-bp needs a non-negative integer, e.g. exact-bp:2");
    }
  } else {
    throw InputError("unknown objective '" + s + "' (max-size, min-bp, min-ba, exact-bp:Z)");
  }
  return o;
}

}  // namespace

std::string digest(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string render_text(const Report& r) {
  std::ostringstream out;
  auto scalar = [](const Report& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  for (const auto& [key, value] : r.items()) {
    if (value.is_array() && !value.empty() && value.front().is_array()) {
      std::string prefix = key.back() == 's' ? key.substr(0, key.size() - 1) : key;
      for (const auto& row : value) {
        out << prefix;
        for (const auto& x : row) out << ' ' << scalar(x);
        out << '\n';
      }
    } else if (value.is_array()) {
      out << key;
      for (const auto& x : value) out << ' ' << scalar(x);
      out << '\n';
    } else if (value.is_object()) {
      for (const auto& [sub, v] : value.items()) out << key << '.' << sub << ' ' << scalar(v) << '\n';
    } else {
      out << key << ' ' << scalar(value) << '\n';
    }
  }
  return out.str();
}

Report solve(const TypedInstance& inst, const std::string& text, const SolveOptions& opts, int& exit_code) {
  const Objective obj = parse_objective(opts.objective);
  const typed::SolverOptions so{opts.jobs};
  const bool refined_model = std::any_of(inst.refinements.begin(), inst.refinements.end(),
                                         [](const auto& x) { return x.has_value(); });
  Report r;
  r["instance"] = digest(text);
  r["problem"] = to_string(inst.kind);
  r["objective"] = opts.objective;
  if (!obj.max_size_objective) r["max_size"] = opts.max_size;

  auto unsupported = [&](const std::string& why) -> Report {
    r["result"] = "unsupported";
    r["reason"] = why;
    exit_code = kUnsupported;
    return r;
  };

  const auto t0 = std::chrono::steady_clock::now();
  std::string model, path;
  std::int64_t profiles = 0, optimum = 0;
  bool found = true;
  AgentMatching m;

  if (!inst.exceptions.empty() && !(exceptions::is_one_top(inst) && obj.max_size_objective)) {
    // No dedicated solver: enumerate if the instance is small enough.
    model = "exceptions";
    if (inst.agent_count() > oracle::enumeration_cap(inst))
      return unsupported("oracle only: no solver for this exception model and " +
                         std::to_string(inst.agent_count()) + " agents exceed the enumeration cap of " +
                         std::to_string(oracle::enumeration_cap(inst)));
    path = "oracle";
    if (obj.max_size_objective) {
      auto b = oracle::max_stable_brute(inst);
      if (b) {
        optimum = b->value;
        m = b->matching;
      } else {
        found = false;
      }
    } else if (obj.kind == refined::QualityObjective::Kind::exact_bp) {
      auto b = oracle::exact_bp_brute(inst, static_cast<int>(obj.z), opts.max_size);
      if (b) {
        optimum = obj.z;
        m = *b;
      } else {
        found = false;
      }
    } else {
      auto b = obj.kind == refined::QualityObjective::Kind::min_bp ? oracle::min_bp_brute(inst, opts.max_size)
                                                                   : oracle::min_ba_brute(inst, opts.max_size);
      optimum = b.value;
      m = b.matching;
    }
  } else if (!inst.exceptions.empty()) {
    model = "exceptions";
    auto res = exceptions::solve_1top_max_smti(inst, so);
    path = "matching";
    profiles = res.functions_examined;
    optimum = res.size;
    m = res.matching;
  } else if (inst.kind == ProblemKind::hrc) {
    model = "hrc";
    if (!obj.max_size_objective) return unsupported("quality objectives are not available for couples");
    auto res = hrc::solve_max_hrc(inst, so);
    path = "ip";
    if (res) {
      profiles = res->profiles_examined;
      optimum = res->residents;
      m = res->matching;
    } else {
      found = false;
    }
  } else if (refined_model) {
    model = "refined";
    if (obj.max_size_objective) {
      auto res = refined::solve_max_refined(inst, so);
      path = inst.bipartite() ? "flow" : "ip";
      if (res) {
        profiles = res->profiles_examined;
        optimum = res->size;
        m = res->matching;
      } else {
        found = false;
      }
    } else {
      refined::QualityObjective q{obj.kind, obj.z, opts.max_size};
      auto res = refined::solve_refined_quality(inst, q, so);
      path = "ip";
      if (res) {
        profiles = res->signatures_examined;
        optimum = res->value;
        m = res->matching;
      } else {
        found = false;
      }
    }
  } else {
    model = "typed";
    if (obj.max_size_objective) {
      auto res = inst.bipartite() ? typed::solve_max_smti(inst, so) : typed::solve_max_srti(inst, so);
      path = inst.bipartite() ? "flow" : "ip";
      if (res) {
        profiles = res->profiles_examined;
        optimum = res->size;
        m = res->matching;
      } else {
        found = false;
      }
    } else {
      if (inst.kind == ProblemKind::hrt) return unsupported("quality objectives need smti or srti");
      std::optional<quality::QualityResult> res;
      switch (obj.kind) {
        case refined::QualityObjective::Kind::min_bp: res = quality::solve_min_bp(inst, opts.max_size); break;
        case refined::QualityObjective::Kind::min_ba: res = quality::solve_min_ba(inst, opts.max_size, so); break;
        case refined::QualityObjective::Kind::exact_bp: res = quality::solve_exact_bp(inst, obj.z, opts.max_size); break;
      }
      path = "ip";
      if (res) {
        profiles = res->signatures_examined;
        optimum = res->value;
        m = res->matching;
      } else {
        found = false;
      }
    }
  }
  r["model"] = model;
  r["path"] = path;
  r["wall_ms"] = since_ms(t0);
  if (!found) {
    r["result"] = obj.max_size_objective || obj.kind != refined::QualityObjective::Kind::exact_bp
                      ? "no-stable"
                      : "no matching with exactly " + std::to_string(obj.z) + " blocking pairs";
    exit_code = kNoStable;
    return r;
  }
  r["profiles"] = profiles;
  r["optimum"] = optimum;
  r["pairs"] = named_pairs(inst, m.canonical().pairs);

  // Independent re-check at agent level.
  const auto br = oracle::blocking_report(inst, m);
  const int size = oracle::matching_size(inst, m);
  r["size"] = size;
  if (inst.kind == ProblemKind::smti || inst.kind == ProblemKind::srti) r["complete"] = 2 * size == inst.agent_count();
  add_blocking(r, inst, br);
  bool ok = true;
  if (obj.max_size_objective) {
    ok = br.stable() && size == optimum;
  } else {
    switch (obj.kind) {
      case refined::QualityObjective::Kind::min_bp:
        ok = static_cast<std::int64_t>(br.blocking_pairs.size()) == optimum;
        break;
      case refined::QualityObjective::Kind::min_ba:
        ok = static_cast<std::int64_t>(br.blocking_agents.size()) == optimum;
        break;
      case refined::QualityObjective::Kind::exact_bp:
        ok = static_cast<std::int64_t>(br.blocking_pairs.size()) == obj.z;
        break;
    }
    if (opts.max_size) ok = ok && size == quality::max_cardinality(inst);
  }
  r["verified"] = ok;
  exit_code = ok ? kOk : kVerifyFailed;
  return r;
}

Report check(const TypedInstance& inst, const std::string& matching_text, int& exit_code) {
  AgentMatching m = parse_matching(inst, matching_text);
  const auto br = oracle::blocking_report(inst, m);
  Report r;
  r["size"] = oracle::matching_size(inst, m);
  add_blocking(r, inst, br);
  r["stable"] = br.stable();
  exit_code = br.stable() ? kOk : kUnstable;
  return r;
}

std::vector<ScalingRow> scaling_rows(int k, const std::vector<int>& sizes, std::uint64_t seed) {
  std::vector<ScalingRow> rows;
  for (int n : sizes) {
    gen::Shape shape;
    shape.kind = ProblemKind::smti;
    shape.k = k;
    shape.min_count = shape.max_count = std::max(1, n / k);
    shape.max_agents = n;
    TypedInstance inst = gen::generate(shape, seed);
    const auto t0 = std::chrono::steady_clock::now();
    auto res = typed::solve_max_smti(inst);
    ScalingRow row;
    row.wall_ms = since_ms(t0);
    row.n = inst.agent_count();
    row.profiles = res ? res->profiles_examined : 0;
    row.size = res ? res->size : -1;
    rows.push_back(row);
  }
  return rows;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Typed stable matching solvers, checkers and generators", "stm"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format = "text";
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));

  auto emit = [&](const Report& r) {
    if (format == "json") out << r.dump(2) << '\n';
    else out << render_text(r);
  };
  int code = kOk;

  auto* solve_cmd = app.add_subcommand("solve", "Solve an instance file");
  std::string inst_path;
  SolveOptions so;
  solve_cmd->add_option("instance", inst_path, "Instance file")->required();
  solve_cmd->add_option("--objective", so.objective, "max-size | min-bp | min-ba | exact-bp:Z");
  solve_cmd->add_flag("--max-size", so.max_size, "Restrict quality objectives to maximum-size matchings");
  solve_cmd->add_option("--jobs", so.jobs, "Worker threads for profile evaluation")->check(CLI::PositiveNumber);

  auto* check_cmd = app.add_subcommand("check", "Report the blocking pairs of a matching");
  std::string matching_path;
  check_cmd->add_option("instance", inst_path, "Instance file")->required();
  check_cmd->add_option("matching", matching_path, "Matching file of 'pair a b' lines")->required();

  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force answers by enumeration");
  std::string oracle_what;
  std::int64_t z = 0;
  bool oracle_max = false;
  oracle_cmd->add_option("query", oracle_what, "max-stable | min-bp | min-ba | exact-bp | all-stable | com | strict")
      ->required()
      ->check(CLI::IsMember({"max-stable", "min-bp", "min-ba", "exact-bp", "all-stable", "com", "strict"}));
  oracle_cmd->add_option("instance", inst_path, "Instance file")->required();
  oracle_cmd->add_option("--z", z, "Blocking pair target for exact-bp");
  oracle_cmd->add_flag("--max-size", oracle_max, "Restrict to maximum-size matchings");

  auto* reduce_cmd = app.add_subcommand("reduce", "Clique to complete stable matching gadget");
  std::string graph_path;
  int clique = 0;
  bool reduce_check = false;
  reduce_cmd->add_option("graph", graph_path, "Graph file: 'n m' then m lines 'u v'")->required();
  reduce_cmd->add_option("--r", clique, "Clique size")->required();
  reduce_cmd->add_flag("--check", reduce_check, "Compare clique search with the gadget's answer");

  auto* gen_cmd = app.add_subcommand("gen", "Generate a seeded random instance");
  gen::Shape shape;
  std::string model = "typed", kind = "smti", out_path;
  std::uint64_t seed = 1;
  gen_cmd->add_option("--model", model, "typed | refined | 1top | hrc");
  gen_cmd->add_option("--kind", kind, "smti | srti | hrt (typed and refined)");
  gen_cmd->add_option("--seed", seed, "Seed");
  gen_cmd->add_option("--k", shape.k, "Number of types");
  gen_cmd->add_option("--min-count", shape.min_count, "Fewest agents per type");
  gen_cmd->add_option("--max-count", shape.max_count, "Most agents per type");
  gen_cmd->add_option("--max-agents", shape.max_agents, "Agent budget");
  gen_cmd->add_option("--max-capacity", shape.max_capacity, "Largest hospital capacity");
  gen_cmd->add_option("--accept", shape.accept, "Chance a compatible type is listed");
  gen_cmd->add_option("--ties", shape.ties, "Chance an entry joins the previous tie");
  gen_cmd->add_option("--exceptions", shape.exceptions, "Chance of a top exception per agent (1top)");
  gen_cmd->add_option("--refine", shape.refine, "Chance a type is refined (refined)");
  gen_cmd->add_option("--couples", shape.couples, "Number of couples (hrc)");
  gen_cmd->add_option("-o,--output", out_path, "Write here instead of stdout");

  auto* ip_cmd = app.add_subcommand("ip", "Solve a plain-text integer program");
  std::string ip_path;
  ip_cmd->add_option("--file", ip_path, "Program file")->required();

  auto* scale_cmd = app.add_subcommand("scale", "Time the flow solver as n grows with k fixed");
  int scale_k = 3;
  std::vector<int> sizes{100, 1000, 10000};
  scale_cmd->add_option("--k", scale_k, "Number of types");
  scale_cmd->add_option("--sizes", sizes, "Agent counts")->delimiter(',');
  scale_cmd->add_option("--seed", seed, "Seed");

  std::vector<const char*> argv{"stm"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInputError;
  }

  try {
    if (*solve_cmd) {
      std::string text = read_file(inst_path);
      emit(solve(parse_instance(text), text, so, code));
    } else if (*check_cmd) {
      auto inst = load_instance(inst_path);
      emit(check(inst, read_file(matching_path), code));
    } else if (*oracle_cmd) {
      std::string text = read_file(inst_path);
      auto inst = parse_instance(text);
      Report r;
      r["instance"] = digest(text);
      r["query"] = oracle_what;
      if (oracle_what == "max-stable") {
        auto b = oracle::max_stable_brute(inst);
        if (b) {
          r["optimum"] = b->value;
          r["pairs"] = named_pairs(inst, b->matching.canonical().pairs);
        } else {
          r["result"] = "no-stable";
          code = kNoStable;
        }
      } else if (oracle_what == "min-bp" || oracle_what == "min-ba") {
        auto b = oracle_what == "min-bp" ? oracle::min_bp_brute(inst, oracle_max) : oracle::min_ba_brute(inst, oracle_max);
        r["optimum"] = b.value;
        r["pairs"] = named_pairs(inst, b.matching.canonical().pairs);
      } else if (oracle_what == "exact-bp") {
        auto b = oracle::exact_bp_brute(inst, static_cast<int>(z), oracle_max);
        r["z"] = z;
        if (b) {
          r["pairs"] = named_pairs(inst, b->canonical().pairs);
        } else {
          r["result"] = "none";
          code = kNoStable;
        }
      } else if (oracle_what == "all-stable") {
        auto all = oracle::all_stable_matchings(inst);
        std::set<int> s;
        for (const auto& x : all) s.insert(oracle::matching_size(inst, x));
        r["stable_matchings"] = all.size();
        r["sizes"] = std::vector<int>(s.begin(), s.end());
      } else if (oracle_what == "com") {
        r["complete_stable"] = oracle::com_stable_exists_brute(inst);
      } else {
        auto rep = refined::verify_strict_types(inst);
        r["strict_types"] = rep.strict_types;
        r["sizes"] = std::vector<int>(rep.stable_sizes.begin(), rep.stable_sizes.end());
        r["exists"] = rep.exists;
        r["exists_tie_broken"] = rep.exists_tie_broken;
        r["holds"] = rep.holds();
      }
      emit(r);
    } else if (*reduce_cmd) {
      auto g = reductions::load_graph(graph_path);
      if (reduce_check) {
        auto c = reductions::verify_reduction(g, clique);
        Report r;
        r["vertices"] = g.n;
        r["edges"] = g.edges.size();
        r["r"] = clique;
        r["clique"] = c.clique;
        r["complete_stable"] = c.complete_stable;
        r["agrees"] = c.agrees();
        emit(r);
        if (!c.agrees()) code = kVerifyFailed;
      } else {
        out << reductions::format_gadget(reductions::clique_to_com_smti(g, clique));
      }
    } else if (*gen_cmd) {
      shape.model = gen::parse_model(model);
      if (kind == "smti") shape.kind = ProblemKind::smti;
      else if (kind == "srti") shape.kind = ProblemKind::srti;
      else if (kind == "hrt") shape.kind = ProblemKind::hrt;
      else throw InputError("unknown kind '" + kind + "'");
      std::string text = format_instance(gen::generate(shape, seed));
      if (out_path.empty()) {
        out << text;
      } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw InputError("cannot write " + out_path);
        f << text;
      }
    } else if (*ip_cmd) {
      auto prog = ip::parse_program(read_file(ip_path));
      auto res = ip::solve(prog);
      Report r;
      r["status"] = res.status == ip::Status::optimal ? "optimal" : "infeasible";
      if (res.status == ip::Status::optimal) {
        r["value"] = res.value;
        Report vals = Report::object();
        for (size_t v = 0; v < prog.variables().size(); ++v) vals[prog.variables()[v].name] = res.assignment[v];
        r["x"] = vals;
      }
      r["nodes"] = res.nodes;
      emit(r);
      if (res.status != ip::Status::optimal) code = kNoStable;
    } else if (*scale_cmd) {
      Report r;
      r["k"] = scale_k;
      r["seed"] = seed;
      Report rows = Report::array();
      for (const auto& row : scaling_rows(scale_k, sizes, seed))
        rows.push_back({row.n, row.profiles, row.size, row.wall_ms});
      r["columns"] = {"n", "profiles", "size", "wall_ms"};
      r["rows"] = rows;
      emit(r);
    }
  } catch (const oracle::CapExceeded& e) {
    err << "stm: " << e.what() << '\n';
    return kUnsupported;
  } catch (const ip::BudgetExceeded& e) {
    err << "stm: " << e.what() << '\n';
    return kUnsupported;
  } catch (const InputError& e) {
    err << "stm: " << e.what() << '\n';
    return kInputError;
  }
  return code;
}

}  // namespace stm::cli
