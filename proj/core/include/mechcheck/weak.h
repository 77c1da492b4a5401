#pragma once

#include <optional>
#include <vector>

#include "mechcheck/instance.h"
#include "mechcheck/lp.h"
#include "mechcheck/mechanism.h"

namespace mechcheck {

// Incentive-compatibility rows of Gamma_(f,P): one non-strict row per
// (agent, true type, misreport), in that order. Variable
// agent * |Theta| + profile is P_agent(profile).
LinearSystem BuildIcSystem(const Instance& instance, const Beliefs& beliefs);

// The rows of one agent only, over that agent's |Theta| payment variables.
LinearSystem BuildAgentIcSystem(const Instance& instance, const Beliefs& beliefs, int agent);

struct WeakVerdict {
  bool implementable = false;
  std::optional<PaymentScheme> payments;
  // Multipliers over the rows of BuildIcSystem.
  std::optional<std::vector<Rational>> refutation;
  // Negative-cycle cross-check; empty when the prior is not a product prior.
  std::optional<bool> cycle_check;
};

WeakVerdict DecideWeak(const Instance& instance);

struct TypeGraph {
  struct Edge {
    int from = 0;
    int to = 0;
    Rational weight;
  };
  int node_count = 0;
  std::vector<Edge> edges;
};

// Complete digraph on the agent's types; the edge from t to u weighs the
// expected valuation lost by type t when reporting u instead of t.
TypeGraph BuildTypeGraph(const Instance& instance, const Beliefs& beliefs, int agent);

// Bellman-Ford from a virtual source joined to every node.
bool HasNegativeCycle(const TypeGraph& graph);

// Weak implementability via the negative-cycle test, valid for product
// priors only; returns nullopt (skipped) otherwise.
std::optional<bool> CycleCheck(const Instance& instance, const Beliefs& beliefs);

}  // namespace mechcheck
