#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "stm/core.hpp"

namespace stm::gen {

enum class Model { typed, refined, one_top, hrc };

Model parse_model(const std::string& s);
const char* to_string(Model m);

struct Shape {
  Model model = Model::typed;
  ProblemKind kind = ProblemKind::smti;  // typed and refined only
  int k = 3;
  int min_count = 1;
  int max_count = 2;
  int max_agents = 8;     // couples count two each
  int max_capacity = 2;   // hospitals
  double accept = 0.8;    // chance a compatible type is listed
  double ties = 0.3;      // chance an entry joins the previous tie group
  double exceptions = 0.3;  // 1top: chance an agent gets a top exception
  double refine = 0.6;      // refined: chance a type gets a refinement
  int couples = 1;          // hrc: couple types
};

// mt19937_64 with its own bounded draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  int between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1))); }
  bool chance(double p);

 private:
  std::mt19937_64 engine_;
};

// Throws SemanticError on an inconsistent shape.
TypedInstance generate(const Shape& shape, std::uint64_t seed);

}  // namespace stm::gen
