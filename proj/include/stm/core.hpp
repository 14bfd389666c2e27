#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stm {

enum class ProblemKind { smti, srti, hrt, hrc };
enum class Side { man, woman, hospital, resident, none };

// Types are 0-based internally. For an instance with k real types the
// dummy type (an unmatched slot) has id k. Files use 1-based ids.
using TypeId = int;
using AgentId = int;

inline constexpr int kUnacceptable = 1 << 28;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised with a 1-based line number when the text cannot be tokenised.
class SyntaxError : public InputError {
 public:
  SyntaxError(int line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class SemanticError : public InputError {
 public:
  using InputError::InputError;
};

struct TypePreference {
  std::vector<std::vector<TypeId>> groups;
};

struct TypeSpec {
  Side side = Side::none;
  int count = 0;
  int capacity = 1;  // hospitals only
  TypePreference pref;
  std::vector<std::string> names;
};

enum class Placement { top, bottom, after_type, tie_between };

struct ExceptionEntry {
  AgentId agent = -1;
  AgentId candidate = -1;
  Placement placement = Placement::top;
  TypeId first = -1;   // after_type / tie_between
  TypeId second = -1;  // tie_between
};

// Agent-level tie groups replacing a type's list.
struct Refinement {
  std::vector<std::vector<AgentId>> groups;
};

using TypePair = std::pair<TypeId, TypeId>;

struct CoupleType {
  TypeId first = -1;
  TypeId second = -1;
  int count = 0;
  std::vector<std::vector<TypePair>> prefs;
  std::vector<std::pair<AgentId, AgentId>> members;
};

class TypedInstance {
 public:
  ProblemKind kind = ProblemKind::smti;
  std::vector<TypeSpec> types;
  std::vector<std::optional<Refinement>> refinements;  // one slot per type
  std::vector<ExceptionEntry> exceptions;
  std::vector<CoupleType> couples;

  int k() const { return static_cast<int>(types.size()); }
  TypeId dummy() const { return k(); }
  bool bipartite() const { return kind != ProblemKind::srti; }

  // Rank of type j in type i's list: group index, k-th group for the dummy,
  // kUnacceptable otherwise. Smaller is better.
  int rank(TypeId i, TypeId j) const { return rank_[i][j]; }
  bool prefers(TypeId i, TypeId j, TypeId l) const { return rank(i, j) < rank(i, l); }
  bool weakly_prefers(TypeId i, TypeId j, TypeId l) const {
    return rank(i, j) != kUnacceptable && rank(i, j) <= rank(i, l);
  }
  bool acceptable(TypeId i, TypeId j) const { return rank(i, j) != kUnacceptable; }
  bool mutually_acceptable(TypeId i, TypeId j) const {
    return acceptable(i, j) && acceptable(j, i);
  }
  // Smallest type id tied with j in i's list (j itself for the dummy).
  TypeId class_rep(TypeId i, TypeId j) const;

  int agent_count() const { return static_cast<int>(agent_type_.size()); }
  TypeId type_of(AgentId a) const { return agent_type_[a]; }
  const std::string& name(AgentId a) const { return agent_name_[a]; }
  std::optional<AgentId> find_agent(const std::string& name) const;
  // Single agents of type t occupy [first_agent(t), first_agent(t) + count).
  AgentId first_agent(TypeId t) const { return first_agent_[t]; }
  int capacity(AgentId a) const;
  // Number of matching slots of type t (hospital capacity is summed).
  int slots(TypeId t) const;
  int couple_of(AgentId a) const { return couple_index_[a]; }

  // Recomputes agent tables and rank tables. Called by the parser and by
  // anyone who edits the public fields.
  void finalize();

 private:
  std::vector<std::vector<int>> rank_;
  std::vector<TypeId> agent_type_;
  std::vector<std::string> agent_name_;
  std::vector<AgentId> first_agent_;
  std::vector<int> couple_index_;
};

const char* to_string(ProblemKind kind);
const char* to_string(Side side);
bool is_bipartite_side(Side side);
// Two sides that may be matched with each other.
bool sides_compatible(Side a, Side b);

TypedInstance parse_instance(const std::string& text);
TypedInstance load_instance(const std::string& path);
std::string format_instance(const TypedInstance& inst);

// Agent-level view with exceptions and refinements applied.
class AgentPrefs {
 public:
  explicit AgentPrefs(const TypedInstance& inst);
  // Lower key is better; nullopt if b is unacceptable to a.
  std::optional<std::int64_t> key(AgentId a, AgentId b) const;
  bool acceptable(AgentId a, AgentId b) const { return key(a, b).has_value(); }
  bool mutually_acceptable(AgentId a, AgentId b) const {
    return acceptable(a, b) && acceptable(b, a);
  }
  // b strictly better than c for a; c may be -1 for "unmatched".
  bool prefers(AgentId a, AgentId b, AgentId c) const;
  // True if a has an exception entry naming b.
  bool exceptional(AgentId a, AgentId b) const;
  const TypedInstance& instance() const { return *inst_; }

 private:
  const TypedInstance* inst_;
  std::vector<std::vector<std::pair<AgentId, std::int64_t>>> exception_keys_;
  std::vector<std::vector<int>> refined_group_;  // per type; empty if unrefined
};

using AgentList = std::vector<std::vector<AgentId>>;

struct AgentLevelInstance {
  ProblemKind kind = ProblemKind::smti;
  std::vector<std::string> names;
  std::vector<Side> sides;
  std::vector<int> capacities;
  std::vector<AgentList> prefs;
};

AgentLevelInstance expand_to_agent_level(const TypedInstance& inst);

// Coarsest partition of agents into types consistent with the lists.
TypedInstance derive_types(const AgentLevelInstance& agents);

// Makes the dummy explicit: bipartite kinds get one dummy type per side
// (k+1 partners the first side, k+2 the other), SRTI gets a single
// side-neutral dummy type. Dummies never accept each other.
TypedInstance normalize_with_dummies(const TypedInstance& inst);

// Symmetric counts n{i,j} over [k+1] x [k+1]; the dummy is index k.
class TypeCountMatrix {
 public:
  TypeCountMatrix() = default;
  explicit TypeCountMatrix(int k) : k_(k), n_((k + 1) * (k + 1), 0) {}
  int k() const { return k_; }
  int get(TypeId i, TypeId j) const { return n_[i * (k_ + 1) + j]; }
  void set(TypeId i, TypeId j, int v) {
    n_[i * (k_ + 1) + j] = v;
    n_[j * (k_ + 1) + i] = v;
  }
  void add(TypeId i, TypeId j, int v) { set(i, j, get(i, j) + v); }
  // Agents of type i whose partner has type j.
  int agents(TypeId i, TypeId j) const { return i == j ? 2 * get(i, i) : get(i, j); }
  int row_agents(TypeId i) const;
  // Pairs between real types.
  int size() const;
  bool operator==(const TypeCountMatrix&) const = default;

 private:
  int k_ = 0;
  std::vector<int> n_;
};

}  // namespace stm
