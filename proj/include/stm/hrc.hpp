#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "stm/core.hpp"
#include "stm/matching.hpp"
#include "stm/oracle.hpp"
#include "stm/typed.hpp"

namespace stm::hrc {

inline oracle::BlockingReport hrc_blocking_report(const TypedInstance& inst, const AgentMatching& m) {
  return oracle::hrc_blocking_report(inst, m);
}

// Listed hospital-type pairs of a couple type, in list order.
std::vector<TypePair> listed_pairs(const CoupleType& c);
// Group index of (p,q) in the couple's list; the list length for the
// jointly unmatched outcome; kUnacceptable if unlisted.
int couple_rank(const CoupleType& c, TypeId p, TypeId q, TypeId dummy);

struct HrcProfile {
  // Resident types: worst hospital class of single residents. Hospital
  // types: worst resident class over all slots. kAbsent when empty.
  std::vector<TypeId> worst;
  std::vector<TypeId> secondworst;  // hospital types with >= 2 slots
  std::vector<int> couple_worst;     // group index, or list length; -1 when empty
  std::vector<std::vector<bool>> assigned;  // per couple type, per listed pair
  bool operator==(const HrcProfile&) const = default;
};

HrcProfile hrc_profile_of(const TypedInstance& inst, const AgentMatching& m);
bool hrc_profile_feasible(const TypedInstance& inst, const HrcProfile& p);
enum class CoupleRule {
  // Conditions 1-4 exactly as stated: a member moving next to its partner
  // is compared with worst(l) even when that slot is the partner's own.
  literal,
  // The hospital a member joins keeps the partner, so the partner's slot
  // is left out: when the partner's class is worst(l), secondworst(l)
  // is the slot to beat.
  partner_aware,
};
// True iff none of the four couple-aware blocking conditions holds.
bool hrc_profile_stable(const TypedInstance& inst, const HrcProfile& p,
                        CoupleRule rule = CoupleRule::partner_aware);

struct HrcRealised {
  int residents = 0;
  AgentMatching matching;
};
std::optional<HrcRealised> max_realising_hrc(const TypedInstance& inst, const HrcProfile& p);

struct HrcResult {
  int residents = 0;
  AgentMatching matching;
  HrcProfile profile;
  std::int64_t profiles_examined = 0;
  std::int64_t profiles_stable = 0;
};
std::optional<HrcResult> solve_max_hrc(const TypedInstance& inst, const typed::SolverOptions& opts = {});

}  // namespace stm::hrc
