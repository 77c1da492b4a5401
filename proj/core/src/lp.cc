#include "mechcheck/lp.h"

#include <optional>
#include <sstream>

#include "mechcheck/error.h"

namespace mechcheck {

int LinearSystem::AddVariables(int count) {
  const int first = variable_count_;
  variable_count_ += count;
  return first;
}

std::size_t LinearSystem::strict_count() const {
  std::size_t count = 0;
  for (const auto& row : constraints_) count += row.strict() ? 1 : 0;
  return count;
}

void LinearSystem::Add(LinearConstraint constraint) {
  for (auto it = constraint.coefficients.begin(); it != constraint.coefficients.end();) {
    if (it->first < 0 || it->first >= variable_count_) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "constraint references variable " + std::to_string(it->first));
    }
    it = it->second.is_zero() ? constraint.coefficients.erase(it) : std::next(it);
  }
  constraints_.push_back(std::move(constraint));
}

void LinearSystem::Append(const LinearSystem& other) {
  if (other.variable_count_ > variable_count_) {
    throw Error(ErrorKind::kDimensionMismatch, "appended system has more variables");
  }
  for (const auto& row : other.constraints_) constraints_.push_back(row);
}

namespace {

// Dense tableau simplex for  min c^T x  s.t.  A x = b, x >= 0  with Bland's
// rule. Artificial columns are kept so that B^-1 is available at the end.
class StandardFormSimplex {
 public:
  enum class Status { kOptimal, kUnbounded, kInfeasible };

  StandardFormSimplex(std::vector<std::vector<mpq_class>> a, std::vector<mpq_class> b,
                      std::vector<mpq_class> c)
      : rows_(static_cast<int>(a.size())), cols_(static_cast<int>(c.size())), cost_(std::move(c)) {
    sign_.assign(rows_, 1);
    tableau_.assign(rows_, std::vector<mpq_class>(cols_ + rows_));
    rhs_.resize(rows_);
    for (int r = 0; r < rows_; ++r) {
      if (sgn(b[r]) < 0) sign_[r] = -1;
      for (int j = 0; j < cols_; ++j) tableau_[r][j] = sign_[r] < 0 ? mpq_class(-a[r][j]) : a[r][j];
      tableau_[r][cols_ + r] = 1;
      rhs_[r] = sign_[r] < 0 ? mpq_class(-b[r]) : b[r];
    }
    basis_.resize(rows_);
    for (int r = 0; r < rows_; ++r) basis_[r] = cols_ + r;
  }

  Status Run() {
    // Phase 1: minimize the sum of artificials.
    std::vector<mpq_class> phase1(cols_ + rows_);
    for (int r = 0; r < rows_; ++r) phase1[cols_ + r] = 1;
    LoadObjective(phase1);
    if (Iterate(cols_ + rows_) == Status::kUnbounded) return Status::kInfeasible;
    if (sgn(objective_value_) != 0) return Status::kInfeasible;
    DriveOutArtificials();

    std::vector<mpq_class> phase2(cols_ + rows_);
    for (int j = 0; j < cols_; ++j) phase2[j] = cost_[j];
    LoadObjective(phase2);
    return Iterate(cols_);
  }

  std::vector<mpq_class> Solution() const {
    std::vector<mpq_class> x(cols_);
    for (int r = 0; r < rows_; ++r) {
      if (basis_[r] < cols_) x[basis_[r]] = rhs_[r];
    }
    return x;
  }

  // Simplex multipliers pi with A^T pi <= c at optimality.
  std::vector<mpq_class> Multipliers() const {
    std::vector<mpq_class> pi(rows_);
    for (int k = 0; k < rows_; ++k) {
      mpq_class sum = 0;
      for (int r = 0; r < rows_; ++r) {
        if (basis_[r] < cols_ && sgn(cost_[basis_[r]]) != 0) sum += cost_[basis_[r]] * tableau_[r][cols_ + k];
      }
      pi[k] = sign_[k] < 0 ? mpq_class(-sum) : sum;
    }
    return pi;
  }

  // Direction d >= 0 with A d = 0 and c^T d < 0, valid after kUnbounded.
  std::vector<mpq_class> Ray() const {
    std::vector<mpq_class> d(cols_);
    d[unbounded_column_] = 1;
    for (int r = 0; r < rows_; ++r) {
      if (basis_[r] < cols_) d[basis_[r]] = -tableau_[r][unbounded_column_];
    }
    return d;
  }

  const mpq_class& objective_value() const { return objective_value_; }

 private:
  void LoadObjective(const std::vector<mpq_class>& costs) {
    current_cost_ = costs;
    reduced_.assign(cols_ + rows_, 0);
    objective_value_ = 0;
    for (int j = 0; j < cols_ + rows_; ++j) reduced_[j] = costs[j];
    for (int r = 0; r < rows_; ++r) {
      const mpq_class& cb = costs[basis_[r]];
      if (sgn(cb) == 0) continue;
      for (int j = 0; j < cols_ + rows_; ++j) {
        if (sgn(tableau_[r][j]) != 0) reduced_[j] -= cb * tableau_[r][j];
      }
      objective_value_ += cb * rhs_[r];
    }
  }

  Status Iterate(int eligible_columns) {
    while (true) {
      int entering = -1;
      for (int j = 0; j < eligible_columns; ++j) {
        if (sgn(reduced_[j]) < 0) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return Status::kOptimal;
      int leaving = -1;
      mpq_class best_ratio;
      for (int r = 0; r < rows_; ++r) {
        if (sgn(tableau_[r][entering]) <= 0) continue;
        mpq_class ratio = rhs_[r] / tableau_[r][entering];
        if (leaving < 0 || ratio < best_ratio || (ratio == best_ratio && basis_[r] < basis_[leaving])) {
          leaving = r;
          best_ratio = ratio;
        }
      }
      if (leaving < 0) {
        unbounded_column_ = entering;
        return Status::kUnbounded;
      }
      Pivot(leaving, entering);
    }
  }

  void Pivot(int row, int col) {
    const int width = cols_ + rows_;
    const mpq_class pivot = tableau_[row][col];
    for (int j = 0; j < width; ++j) {
      if (sgn(tableau_[row][j]) != 0) tableau_[row][j] /= pivot;
    }
    rhs_[row] /= pivot;
    for (int r = 0; r < rows_; ++r) {
      if (r == row || sgn(tableau_[r][col]) == 0) continue;
      const mpq_class factor = tableau_[r][col];
      for (int j = 0; j < width; ++j) {
        if (sgn(tableau_[row][j]) != 0) tableau_[r][j] -= factor * tableau_[row][j];
      }
      rhs_[r] -= factor * rhs_[row];
    }
    if (sgn(reduced_[col]) != 0) {
      const mpq_class factor = reduced_[col];
      for (int j = 0; j < width; ++j) {
        if (sgn(tableau_[row][j]) != 0) reduced_[j] -= factor * tableau_[row][j];
      }
      objective_value_ += factor * rhs_[row];
    }
    basis_[row] = col;
  }

  void DriveOutArtificials() {
    for (int r = 0; r < rows_; ++r) {
      if (basis_[r] < cols_) continue;
      for (int j = 0; j < cols_; ++j) {
        if (sgn(tableau_[r][j]) != 0) {
          Pivot(r, j);
          break;
        }
      }
      // Otherwise the row is redundant and its artificial stays basic at zero.
    }
  }

  int rows_;
  int cols_;
  std::vector<mpq_class> cost_;
  std::vector<mpq_class> current_cost_;
  std::vector<int> sign_;
  std::vector<std::vector<mpq_class>> tableau_;
  std::vector<mpq_class> rhs_;
  std::vector<mpq_class> reduced_;
  std::vector<int> basis_;
  mpq_class objective_value_;
  int unbounded_column_ = -1;
};

mpq_class RowValue(const LinearConstraint& row, std::span<const Rational> point) {
  mpq_class value = 0;
  for (const auto& [var, coeff] : row.coefficients) value += coeff.raw() * point[var].raw();
  return value;
}

std::vector<Rational> PrimitiveIntegers(const std::vector<mpq_class>& values) {
  mpz_class lcm_den = 1;
  for (const auto& v : values) mpz_lcm(lcm_den.get_mpz_t(), lcm_den.get_mpz_t(), v.get_den_mpz_t());
  std::vector<mpz_class> scaled;
  mpz_class gcd_num = 0;
  for (const auto& v : values) {
    mpz_class s = v.get_num() * (lcm_den / v.get_den());
    mpz_gcd(gcd_num.get_mpz_t(), gcd_num.get_mpz_t(), s.get_mpz_t());
    scaled.push_back(s);
  }
  std::vector<Rational> out;
  out.reserve(values.size());
  for (auto& s : scaled) {
    if (gcd_num != 0) s /= gcd_num;
    out.emplace_back(mpq_class(s));
  }
  return out;
}

}  // namespace

Rational MinStrictSlack(const LinearSystem& system, std::span<const Rational> point) {
  std::optional<mpq_class> best;
  for (const auto& row : system.constraints()) {
    if (!row.strict()) continue;
    mpq_class slack = row.bound.raw() - RowValue(row, point);
    if (!best || slack < *best) best = slack;
  }
  return best ? Rational(*best) : Rational(1);
}

bool CheckPoint(const LinearSystem& system, std::span<const Rational> point) {
  if (point.size() != static_cast<std::size_t>(system.variable_count())) {
    throw Error(ErrorKind::kDimensionMismatch, "point has " + std::to_string(point.size()) +
                                                   " entries, system has " +
                                                   std::to_string(system.variable_count()) +
                                                   " variables");
  }
  for (const auto& row : system.constraints()) {
    const int c = cmp(RowValue(row, point), row.bound.raw());
    if (row.strict() ? c >= 0 : c > 0) return false;
  }
  return true;
}

bool ValidateRefutation(const LinearSystem& system, std::span<const Rational> multipliers) {
  if (multipliers.size() != system.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "expected one multiplier per constraint");
  }
  std::vector<mpq_class> combined(system.variable_count());
  mpq_class bound = 0;
  mpq_class strict_weight = 0;
  for (std::size_t k = 0; k < system.size(); ++k) {
    const auto& y = multipliers[k];
    if (y.sign() < 0) return false;
    if (y.is_zero()) continue;
    const auto& row = system.constraints()[k];
    for (const auto& [var, coeff] : row.coefficients) combined[var] += y.raw() * coeff.raw();
    bound += y.raw() * row.bound.raw();
    if (row.strict()) strict_weight += y.raw();
  }
  for (const auto& v : combined) {
    if (sgn(v) != 0) return false;
  }
  return sgn(bound) < 0 || (sgn(bound) == 0 && sgn(strict_weight) > 0);
}

FeasibilityOutcome SolveMixedSystem(const LinearSystem& system) {
  const int n = system.variable_count();
  const auto k_rows = static_cast<int>(system.size());

  std::vector<Rational> origin(n, Rational(0));
  if (CheckPoint(system, origin)) return StrictlyFeasible{origin, MinStrictSlack(system, origin)};

  // Dual of  max eps  s.t.  a_k z + s_k eps <= b_k,  eps <= 1:
  //   min b^T y + w  s.t.  sum_k y_k a_k = 0,  s^T y + w = 1,  y, w >= 0.
  // It is always feasible (y = 0, w = 1).
  std::vector<std::vector<mpq_class>> a(n + 1, std::vector<mpq_class>(k_rows + 1));
  std::vector<mpq_class> b(n + 1);
  std::vector<mpq_class> c(k_rows + 1);
  for (int k = 0; k < k_rows; ++k) {
    const auto& row = system.constraints()[k];
    for (const auto& [var, coeff] : row.coefficients) a[var][k] = coeff.raw();
    a[n][k] = row.strict() ? 1 : 0;
    c[k] = row.bound.raw();
  }
  a[n][k_rows] = 1;
  b[n] = 1;
  c[k_rows] = 1;

  StandardFormSimplex simplex(std::move(a), std::move(b), std::move(c));
  const auto status = simplex.Run();
  if (status == StandardFormSimplex::Status::kInfeasible) {
    throw Error(ErrorKind::kContractViolation, "dual feasibility LP reported infeasible");
  }
  if (status == StandardFormSimplex::Status::kUnbounded) {
    auto ray = simplex.Ray();
    ray.pop_back();
    return Infeasible{PrimitiveIntegers(ray)};
  }
  if (sgn(simplex.objective_value()) <= 0) {
    auto y = simplex.Solution();
    y.pop_back();
    return Infeasible{PrimitiveIntegers(y)};
  }
  const auto pi = simplex.Multipliers();
  std::vector<Rational> point;
  point.reserve(n);
  for (int j = 0; j < n; ++j) point.emplace_back(pi[j]);
  if (!CheckPoint(system, point)) {
    throw Error(ErrorKind::kContractViolation, "simplex multipliers failed the primal system");
  }
  return StrictlyFeasible{point, MinStrictSlack(system, point)};
}

std::string ToText(const LinearSystem& system) {
  std::ostringstream out;
  for (const auto& row : system.constraints()) {
    bool first = true;
    for (const auto& [var, coeff] : row.coefficients) {
      if (!first) out << ' ';
      out << coeff << "*x" << var;
      first = false;
    }
    if (first) out << '0';
    out << (row.strict() ? " < " : " <= ") << row.bound << '\n';
  }
  return out.str();
}

}  // namespace mechcheck
