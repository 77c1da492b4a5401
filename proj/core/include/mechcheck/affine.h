#pragma once

#include <cstddef>
#include <map>

#include "mechcheck/instance.h"
#include "mechcheck/lp.h"
#include "mechcheck/mechanism.h"
#include "mechcheck/rational.h"

namespace mechcheck {

// constant + sum coefficients[var] * var, with payments as unknowns.
struct AffineForm {
  Rational constant;
  std::map<int, Rational> coefficients;

  void AddTerm(int var, const Rational& coeff) { coefficients[var] += coeff; }
};

// lhs - rhs (<= | <) 0, rearranged into a constraint row.
LinearConstraint DifferenceRow(const AffineForm& lhs, const AffineForm& rhs, Relation relation);

// Interim utility in the direct mechanism Gamma_(f,P) of `agent` with type
// own_type who reports `report` while the others follow `profile`. Payment
// P_agent(theta) is variable payment_base + theta.
AffineForm DirectUtility(const Instance& instance, const Beliefs& beliefs,
                         const StrategyProfile& profile, int agent, int own_type, int report,
                         int payment_base);

// Type profile reported when the others follow `profile` at co-profile `co`
// of `agent`, and the agent reports `report`.
std::size_t ReportedProfile(const Instance& instance, const StrategyProfile& profile, int agent,
                            std::size_t co, int report);

}  // namespace mechcheck
