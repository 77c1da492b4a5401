#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mechcheck/instance.h"
#include "mechcheck/lp.h"
#include "mechcheck/mechanism.h"

namespace mechcheck {

// A profitable deviation: `agent` of type `type` gains strictly by reporting
// `deviation` instead of what the profile prescribes.
struct Witness {
  int agent = 0;
  int type = 0;
  int deviation = 0;
  friend bool operator==(const Witness&, const Witness&) = default;
};

struct ProfileLabel {
  bool equilibrium = false;
  std::optional<Witness> witness;  // present iff !equilibrium
  friend bool operator==(const ProfileLabel&, const ProfileLabel&) = default;
};

// One label per strategy profile of the direct mechanism, indexed by
// StrategySpace::Direct order.
struct Labeling {
  std::vector<ProfileLabel> labels;
  friend bool operator==(const Labeling&, const Labeling&) = default;
};

// Flag offered to `agent` to break the bad equilibrium at `profile`: when the
// others report co-profile c the flag yields outcome flag_outcome[c] and the
// elimination payment for c. `threatened_type` is the type that strictly
// prefers the flag under the bad equilibrium.
struct PlanEntry {
  std::size_t profile = 0;
  int agent = 0;
  int threatened_type = 0;
  std::vector<int> flag_outcome;
  friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

// Entries sorted by profile, one per bad equilibrium of the labeling.
struct EliminationPlan {
  std::vector<PlanEntry> entries;
  friend bool operator==(const EliminationPlan&, const EliminationPlan&) = default;
};

struct StrongCertificate {
  PaymentScheme payments;
  Labeling labeling;
  EliminationPlan plan;
  // elimination_payments[e][c] pairs with plan.entries[e].
  std::vector<std::vector<Rational>> elimination_payments;
  Rational strict_slack;
  friend bool operator==(const StrongCertificate&, const StrongCertificate&) = default;
};

// f(alpha(theta)) != f(theta) for some theta.
bool IsBadProfile(const Instance& instance, const StrategyProfile& profile);

// Variable layout of BuildSystem: P_i(theta) is i * |Theta| + theta, followed
// by one block of |Theta_-i| elimination payments per plan entry.
int PaymentVariable(const Instance& instance, int agent, std::size_t profile);
std::vector<int> EliminationBlockOffsets(const Instance& instance, const EliminationPlan& plan);

// The strict/non-strict system fixing exactly which profiles are equilibria
// (one strict row per non-equilibrium at its witness, one non-strict row per
// equilibrium, agent, type and alternative report) together with the
// selective-elimination rows of every bad equilibrium (one strict flag-gain
// row and one non-strict truthful row per type of the flagging agent).
// Throws IncompleteLabeling or MissingPlanEntry.
LinearSystem BuildSystem(const Instance& instance, const Beliefs& beliefs,
                         const Labeling& labeling, const EliminationPlan& plan);

// Both selective-elimination conditions, evaluated exactly.
bool SelectivelyEliminable(const Instance& instance, const Beliefs& beliefs,
                           const PaymentScheme& payments, const StrategyProfile& profile,
                           const PlanEntry& entry, const std::vector<Rational>& elimination_payments);

// Re-derives everything independently: the labeling matches brute-force
// enumeration, truthful play is an equilibrium, every bad equilibrium is
// selectively eliminated by its plan entry, and the point satisfies
// BuildSystem.
bool VerifyCertificate(const Instance& instance, const Beliefs& beliefs,
                       const StrongCertificate& certificate);

struct SearchLimits {
  std::size_t max_profiles = 1'000'000;
  std::size_t max_branches = 200'000'000;
  double max_seconds = 600.0;
  int workers = 1;
};

struct SearchStatistics {
  std::size_t profiles = 0;
  // Realizable best-response patterns per agent.
  std::vector<std::size_t> patterns;
  std::size_t combinations_total = 0;
  // Combinations decided before the verdict: all of them for a no.
  std::size_t combinations_examined = 0;
  // The counters below depend on scheduling when workers > 1.
  std::size_t branches = 0;
  std::size_t lp_solves = 0;
};

struct StrongDecision {
  enum class Status { kYes, kNo, kResourceExceeded };

  Status status = Status::kNo;
  std::optional<StrongCertificate> certificate;
  SearchStatistics statistics;
  std::string exceeded;  // which limit, for kResourceExceeded
};

// Exhaustive, exact decision of strong implementability. Each agent's payment
// space is first split into the realizable patterns of best-response sets
// (argmax over reports for every co-strategy and own type), searched
// depth-first with feasibility pruning. Patterns of different agents touch
// disjoint payment variables, so every combination is a feasible labeling;
// combinations are scanned in lexicographic order and each bad equilibrium
// is assigned a flagging agent, threatened type and flag outcome map, again
// with incremental feasibility pruning. The first feasible combination is
// returned as the certificate.
StrongDecision DecideStrong(const Instance& instance, const SearchLimits& limits = {});

}  // namespace mechcheck
