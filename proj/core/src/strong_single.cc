#include "mechcheck/strong_single.h"

#include <variant>

#include "mechcheck/error.h"

namespace mechcheck {

LinearSystem BuildSingleSystem(const Instance& instance) {
  if (instance.agent_count() != 1) {
    throw Error(ErrorKind::kNotSingleAgent, "single-agent system needs exactly one agent");
  }
  const int types = instance.type_count(0);
  LinearSystem system(types);
  for (int truth = 0; truth < types; ++truth) {
    for (int other = 0; other < types; ++other) {
      if (other == truth) continue;
      const int x_truth = instance.scf(truth);
      const int x_other = instance.scf(other);
      LinearConstraint row;
      row.coefficients[other] = Rational(1);
      row.coefficients[truth] = Rational(-1);
      row.bound = instance.valuation(0, x_truth, truth) - instance.valuation(0, x_other, truth);
      row.relation = x_truth != x_other ? Relation::kLess : Relation::kLessEqual;
      system.Add(std::move(row));
    }
  }
  return system;
}

SingleAgentVerdict DecideStrongSingle(const Instance& instance) {
  const LinearSystem system = BuildSingleSystem(instance);
  SingleAgentVerdict verdict;
  auto outcome = SolveMixedSystem(system);
  if (auto* feasible = std::get_if<StrictlyFeasible>(&outcome)) {
    verdict.implementable = true;
    verdict.payments = std::move(feasible->point);
    verdict.strict_slack = std::move(feasible->min_strict_slack);
  } else {
    verdict.refutation = std::move(std::get<Infeasible>(outcome).multipliers);
  }
  return verdict;
}

}  // namespace mechcheck
