#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stm::ip {

enum class Relation { le, eq, ge };
enum class Sense { minimize, maximize };

using Term = std::pair<int, std::int64_t>;  // (variable, coefficient)

struct Variable {
  std::string name;
  std::int64_t lower = 0;
  std::int64_t upper = 0;
};

struct LinearConstraint {
  std::vector<Term> terms;
  Relation relation = Relation::le;
  std::int64_t rhs = 0;
};

// sum_{u,v} q[u][v] x_u x_v + sum_u linear[u] x_u  (relation)  rhs
struct QuadraticConstraint {
  std::vector<std::vector<std::int64_t>> q;
  std::vector<std::int64_t> linear;
  Relation relation = Relation::eq;
  std::int64_t rhs = 0;
};

struct Objective {
  Sense sense = Sense::maximize;
  std::vector<std::int64_t> linear;                            // may be empty
  std::optional<std::vector<std::vector<std::int64_t>>> quadratic;
};

class IntegerProgram {
 public:
  int add_variable(std::string name, std::int64_t lower, std::int64_t upper);
  void add_constraint(std::vector<Term> terms, Relation rel, std::int64_t rhs);
  // Dense form; coefficients must match the variable count.
  void add_dense_constraint(const std::vector<std::int64_t>& coefs, Relation rel, std::int64_t rhs);
  // sum(terms) > rhs, stored as >= rhs + 1.
  void add_strictly_greater(std::vector<Term> terms, std::int64_t rhs);
  void add_quadratic_constraint(QuadraticConstraint c);
  void set_objective(Objective obj);

  int variable_count() const { return static_cast<int>(vars_.size()); }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<LinearConstraint>& constraints() const { return cons_; }
  const std::vector<QuadraticConstraint>& quadratic_constraints() const { return quad_; }
  const Objective& objective() const { return obj_; }

  std::int64_t evaluate(const std::vector<std::int64_t>& x) const;
  bool feasible(const std::vector<std::int64_t>& x) const;

 private:
  std::vector<Variable> vars_;
  std::vector<LinearConstraint> cons_;
  std::vector<QuadraticConstraint> quad_;
  Objective obj_;
};

enum class Status { optimal, infeasible };

struct Result {
  Status status = Status::infeasible;
  std::int64_t value = 0;
  std::vector<std::int64_t> assignment;
  std::int64_t nodes = 0;
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::int64_t node_limit = 20'000'000;
  std::int64_t max_domain = 1'000'000;  // per-variable range guard
};

Result solve(const IntegerProgram& ip, const Options& opts = {});

// Plain-text program format used by `stm ip`:
//   var <name> <lo> <hi>
//   max|min: <c> <var> + <c> <var> ...   [optional quad terms "<c> <var>*<var>"]
//   con: <c> <var> + ... <=|=|>= <rhs>
IntegerProgram parse_program(const std::string& text);

}  // namespace stm::ip
