#include "mechcheck/affine.h"

namespace mechcheck {

LinearConstraint DifferenceRow(const AffineForm& lhs, const AffineForm& rhs, Relation relation) {
  LinearConstraint row;
  row.relation = relation;
  for (const auto& [var, coeff] : lhs.coefficients) row.coefficients[var] += coeff;
  for (const auto& [var, coeff] : rhs.coefficients) row.coefficients[var] -= coeff;
  std::erase_if(row.coefficients, [](const auto& entry) { return entry.second.is_zero(); });
  row.bound = rhs.constant - lhs.constant;
  return row;
}

std::size_t ReportedProfile(const Instance& instance, const StrategyProfile& profile, int agent,
                            std::size_t co, int report) {
  const std::size_t theta = instance.Combine(agent, co, 0);
  std::vector<int> digits(instance.agent_count());
  for (int j = 0; j < instance.agent_count(); ++j) {
    digits[j] = (j == agent) ? report : profile.bid(j, instance.TypeOf(theta, j));
  }
  return instance.profiles().Encode(digits);
}

AffineForm DirectUtility(const Instance& instance, const Beliefs& beliefs,
                         const StrategyProfile& profile, int agent, int own_type, int report,
                         int payment_base) {
  AffineForm form;
  for (std::size_t co = 0; co < instance.co_profile_count(agent); ++co) {
    const Rational& weight = beliefs(agent, own_type, co);
    if (weight.is_zero()) continue;
    const std::size_t theta = instance.Combine(agent, co, own_type);
    const std::size_t reported = ReportedProfile(instance, profile, agent, co, report);
    form.constant += weight * instance.valuation(agent, instance.scf(reported), theta);
    form.AddTerm(payment_base + static_cast<int>(reported), weight);
  }
  return form;
}

}  // namespace mechcheck
