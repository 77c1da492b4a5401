#pragma once

#include <optional>
#include <vector>

#include "mechcheck/instance.h"
#include "mechcheck/lp.h"

namespace mechcheck {

// Variables P(theta) indexed by type. For every ordered pair (t, u), t != u:
//   V(f(u), t) + P(u) <  V(f(t), t) + P(t)   if f(t) != f(u)
//   V(f(u), t) + P(u) <= V(f(t), t) + P(t)   otherwise.
// Self-pairs are tautologies and the non-strict twin of a strict row is
// implied, so neither is emitted. Throws NotSingleAgent.
LinearSystem BuildSingleSystem(const Instance& instance);

struct SingleAgentVerdict {
  bool implementable = false;
  std::optional<std::vector<Rational>> payments;  // indexed by type
  std::optional<Rational> strict_slack;
  std::optional<std::vector<Rational>> refutation;  // over BuildSingleSystem rows
};

// Strong implementability for one agent: some incentive compatible direct
// mechanism has no bad equilibrium iff the system above is strictly feasible.
SingleAgentVerdict DecideStrongSingle(const Instance& instance);

}  // namespace mechcheck
