#include "mechcheck/weak.h"

#include <variant>

#include "mechcheck/affine.h"

namespace mechcheck {

namespace {

void AppendAgentRows(const Instance& instance, const Beliefs& beliefs, int agent,
                     int payment_base, LinearSystem& system) {
  const StrategyProfile truthful = TruthfulProfile(instance);
  for (int own = 0; own < instance.type_count(agent); ++own) {
    const AffineForm honest = DirectUtility(instance, beliefs, truthful, agent, own, own, payment_base);
    for (int lie = 0; lie < instance.type_count(agent); ++lie) {
      if (lie == own) continue;
      const AffineForm deviation =
          DirectUtility(instance, beliefs, truthful, agent, own, lie, payment_base);
      system.Add(DifferenceRow(deviation, honest, Relation::kLessEqual));
    }
  }
}

}  // namespace

LinearSystem BuildIcSystem(const Instance& instance, const Beliefs& beliefs) {
  const int stride = static_cast<int>(instance.profile_count());
  LinearSystem system(instance.agent_count() * stride);
  for (int i = 0; i < instance.agent_count(); ++i) {
    AppendAgentRows(instance, beliefs, i, i * stride, system);
  }
  return system;
}

LinearSystem BuildAgentIcSystem(const Instance& instance, const Beliefs& beliefs, int agent) {
  LinearSystem system(static_cast<int>(instance.profile_count()));
  AppendAgentRows(instance, beliefs, agent, 0, system);
  return system;
}

WeakVerdict DecideWeak(const Instance& instance) {
  const Beliefs beliefs = ConditionalBeliefs(instance);
  WeakVerdict verdict;
  verdict.cycle_check = CycleCheck(instance, beliefs);

  PaymentScheme payments;
  std::size_t row_offset = 0;
  std::size_t total_rows = 0;
  for (int i = 0; i < instance.agent_count(); ++i) {
    total_rows += static_cast<std::size_t>(instance.type_count(i)) * (instance.type_count(i) - 1);
  }
  for (int i = 0; i < instance.agent_count(); ++i) {
    const LinearSystem agent_system = BuildAgentIcSystem(instance, beliefs, i);
    auto outcome = SolveMixedSystem(agent_system);
    if (auto* refuted = std::get_if<Infeasible>(&outcome)) {
      std::vector<Rational> multipliers(total_rows, Rational(0));
      for (std::size_t k = 0; k < refuted->multipliers.size(); ++k) {
        multipliers[row_offset + k] = refuted->multipliers[k];
      }
      verdict.refutation = std::move(multipliers);
      return verdict;
    }
    payments.push_back(std::get<StrictlyFeasible>(outcome).point);
    row_offset += agent_system.size();
  }
  verdict.implementable = true;
  verdict.payments = std::move(payments);
  return verdict;
}

TypeGraph BuildTypeGraph(const Instance& instance, const Beliefs& beliefs, int agent) {
  TypeGraph graph;
  graph.node_count = instance.type_count(agent);
  for (int from = 0; from < graph.node_count; ++from) {
    for (int to = 0; to < graph.node_count; ++to) {
      if (from == to) continue;
      Rational weight;
      for (std::size_t co = 0; co < instance.co_profile_count(agent); ++co) {
        const Rational& q = beliefs(agent, from, co);
        if (q.is_zero()) continue;
        const std::size_t theta = instance.Combine(agent, co, from);
        const std::size_t misreport = instance.Combine(agent, co, to);
        weight += q * (instance.valuation(agent, instance.scf(theta), theta) -
                       instance.valuation(agent, instance.scf(misreport), theta));
      }
      graph.edges.push_back({from, to, weight});
    }
  }
  return graph;
}

bool HasNegativeCycle(const TypeGraph& graph) {
  std::vector<Rational> distance(graph.node_count, Rational(0));
  for (int round = 0; round < graph.node_count; ++round) {
    bool changed = false;
    for (const auto& edge : graph.edges) {
      Rational candidate = distance[edge.from] + edge.weight;
      if (candidate < distance[edge.to]) {
        distance[edge.to] = std::move(candidate);
        changed = true;
      }
    }
    if (!changed) return false;
  }
  return true;
}

std::optional<bool> CycleCheck(const Instance& instance, const Beliefs& beliefs) {
  if (!IsProductPrior(instance)) return std::nullopt;
  for (int i = 0; i < instance.agent_count(); ++i) {
    if (HasNegativeCycle(BuildTypeGraph(instance, beliefs, i))) return false;
  }
  return true;
}

}  // namespace mechcheck
