#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mechcheck/rational.h"

namespace mechcheck {

enum class Relation { kLessEqual, kLess };

// sum_j coefficients[j] * z_j  (<= | <)  bound. Zero coefficients are never stored.
struct LinearConstraint {
  std::map<int, Rational> coefficients;
  Rational bound;
  Relation relation = Relation::kLessEqual;

  bool strict() const { return relation == Relation::kLess; }
  friend bool operator==(const LinearConstraint&, const LinearConstraint&) = default;
};

class LinearSystem {
 public:
  explicit LinearSystem(int variable_count = 0) : variable_count_(variable_count) {}

  int variable_count() const { return variable_count_; }
  int AddVariables(int count);
  const std::vector<LinearConstraint>& constraints() const { return constraints_; }
  std::size_t size() const { return constraints_.size(); }
  std::size_t strict_count() const;

  // Drops zero coefficients; throws DimensionMismatch on an unknown variable.
  void Add(LinearConstraint constraint);
  void Append(const LinearSystem& other);
  // Drops every row after the first `size`.
  void Truncate(std::size_t size) { constraints_.resize(std::min(size, constraints_.size())); }

  friend bool operator==(const LinearSystem&, const LinearSystem&) = default;

 private:
  int variable_count_ = 0;
  std::vector<LinearConstraint> constraints_;
};

struct StrictlyFeasible {
  std::vector<Rational> point;
  // Minimum of bound - lhs over strict rows (1 when there are none).
  Rational min_strict_slack;
};

// y >= 0 with y^T A = 0 and either y^T b < 0, or y^T b = 0 with positive
// weight on some strict row.
struct Infeasible {
  std::vector<Rational> multipliers;
};

using FeasibilityOutcome = std::variant<StrictlyFeasible, Infeasible>;

// Exact decision of the mixed strict/non-strict system. Strict rows share one
// slack variable that is maximized (capped at 1) by a Bland-rule simplex over
// rationals. Refutation multipliers are scaled to coprime integers.
FeasibilityOutcome SolveMixedSystem(const LinearSystem& system);

bool CheckPoint(const LinearSystem& system, std::span<const Rational> point);
bool ValidateRefutation(const LinearSystem& system, std::span<const Rational> multipliers);

// Minimum slack over strict rows at `point`; 1 if the system has no strict row.
Rational MinStrictSlack(const LinearSystem& system, std::span<const Rational> point);

// One row per line: "c*x<j> ... <=|< bound".
std::string ToText(const LinearSystem& system);

}  // namespace mechcheck
