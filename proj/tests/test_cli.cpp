#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "stm/cli.hpp"

using namespace stm;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& body) {
  auto path = std::filesystem::temp_directory_path() / ("stm_test_" + name);
  std::ofstream(path) << body;
  return path.string();
}

}  // namespace

TEST_CASE("cli solve: examples and exit codes") {
  auto e2 = run({"--format", "json", "solve", "data/example2.stm"});
  REQUIRE(e2.code == cli::kOk);
  auto j = nlohmann::json::parse(e2.out);
  CHECK(j["optimum"] == 3);
  CHECK(j["size"] == 3);
  CHECK(j["blocking_pairs"] == 0);
  CHECK(j["verified"] == true);
  CHECK(j["model"] == "refined");

  auto cycle = run({"solve", "data/odd_cycle.stm"});
  CHECK(cycle.code == cli::kNoStable);
  CHECK(cycle.out.find("result no-stable") != std::string::npos);

  CHECK(run({"solve", "data/does_not_exist.stm"}).code == cli::kInputError);
  CHECK(run({"solve", temp_file("bad.stm", "problem smti\ntypes 1\n")}).code == cli::kInputError);
  CHECK(run({"solve", "data/example1.stm", "--objective", "fastest"}).code == cli::kInputError);
}

TEST_CASE("cli solve: gadget from the triangle is complete") {
  auto gadget = run({"reduce", "data/triangle.graph", "--r", "3"});
  REQUIRE(gadget.code == cli::kOk);
  auto path = temp_file("triangle.stm", gadget.out);
  auto j = nlohmann::json::parse(run({"--format", "json", "solve", path}).out);
  CHECK(j["optimum"] == 6);
  CHECK(j["complete"] == true);
}

TEST_CASE("cli solve: exception models beyond the enumeration cap") {
  std::string text = "problem smti\ntypes 2\ntype 1 side=m count=20 prefs=2\ntype 2 side=w count=20 prefs=1\n"
                     "except agent=m1 cand=w2 place=top\nexcept agent=m1 cand=w1 place=bottom\n";
  auto r = run({"solve", temp_file("two_any_big.stm", text)});
  CHECK(r.code == cli::kUnsupported);
  CHECK(r.out.find("oracle only") != std::string::npos);
  CHECK(run({"solve", "data/two_any.stm"}).code == cli::kOk);
}

TEST_CASE("cli solve: quality objectives") {
  auto j = nlohmann::json::parse(run({"--format", "json", "solve", "data/example1.stm", "--objective", "min-bp",
                                      "--max-size"}).out);
  CHECK(j["optimum"] == 0);
  auto exact = run({"solve", "data/example1.stm", "--objective", "exact-bp:1000"});
  CHECK(exact.code == cli::kNoStable);
  CHECK(run({"solve", "data/couples.stm", "--objective", "min-ba"}).code == cli::kUnsupported);
}

TEST_CASE("cli check: stable, unstable, invalid") {
  auto stable = temp_file("stable.match", "pair m1 w1\npair m2 w2\npair m3 w3\n");
  CHECK(run({"check", "data/example1.stm", stable}).code == cli::kOk);
  auto empty = temp_file("empty.match", "");
  auto r = run({"check", "data/example1.stm", empty});
  CHECK(r.code == cli::kUnstable);
  CHECK(r.out.find("block m1 w1") != std::string::npos);
  auto twice = temp_file("twice.match", "pair m1 w1\npair m1 w2\n");
  CHECK(run({"check", "data/example1.stm", twice}).code == cli::kInputError);
}

TEST_CASE("cli: text output mirrors json") {
  auto text = run({"solve", "data/example1.stm"}).out;
  auto j = nlohmann::ordered_json::parse(run({"--format", "json", "solve", "data/example1.stm"}).out);
  for (const auto& [key, value] : j.items()) {
    if (key == "wall_ms") continue;
    if (value.is_array()) continue;
    std::string line = key + " " + (value.is_string() ? value.get<std::string>() : value.dump());
    CHECK_MESSAGE(text.find(line + "\n") != std::string::npos, line);
  }
  CHECK(text.find("pair m1 w1\n") != std::string::npos);
  cli::Report r;
  r["a"]["b"] = 1;
  r["pairs"] = cli::Report::array({cli::Report::array({"x", "y"})});
  CHECK(cli::render_text(r) == "a.b 1\npair x y\n");
}

TEST_CASE("cli: oracle, reduce, gen, ip, scale") {
  auto o = nlohmann::json::parse(run({"--format", "json", "oracle", "max-stable", "data/example1.stm"}).out);
  CHECK(o["optimum"] == 3);
  CHECK(run({"oracle", "strict", "data/example1.stm"}).code == cli::kOk);
  CHECK(run({"oracle", "nonsense", "data/example1.stm"}).code == cli::kInputError);

  auto red = run({"reduce", "data/path3.graph", "--r", "2", "--check"});
  CHECK(red.code == cli::kOk);

  auto g1 = run({"gen", "--model", "typed", "--seed", "1", "--k", "4"});
  CHECK(g1.code == cli::kOk);
  CHECK(g1.out == run({"gen", "--model", "typed", "--seed", "1", "--k", "4"}).out);
  CHECK(run({"gen", "--model", "mystery"}).code == cli::kInputError);

  auto ip = run({"ip", "--file", "data/tiny.ip"});
  CHECK(ip.code == cli::kOk);
  CHECK(ip.out.find("value 3") != std::string::npos);

  auto sc = nlohmann::json::parse(run({"--format", "json", "scale", "--sizes", "30,60"}).out);
  CHECK(sc.is_object());
}

TEST_CASE("cli: digest is stable") {
  CHECK(cli::digest("") == "cbf29ce484222325");
  CHECK(cli::digest("a") == "af63dc4c8601ec8c");
}
