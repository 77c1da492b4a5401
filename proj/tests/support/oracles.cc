#include "support/oracles.h"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <variant>

#include "mechcheck/io.h"

#ifndef MECHCHECK_FIXTURE_DIR
#error "MECHCHECK_FIXTURE_DIR must point at data/fixtures"
#endif

namespace mechcheck::testing {

std::string FixturePath(const std::string& name) {
  return std::string(MECHCHECK_FIXTURE_DIR) + "/" + name;
}

Instance LoadFixture(const std::string& name) { return ParseInstance(ReadJsonFile(FixturePath(name))); }

Instance SingleAgent(const std::vector<std::vector<int>>& v, const std::vector<int>& f) {
  std::vector<std::string> outcomes;
  for (std::size_t x = 0; x < v.size(); ++x) outcomes.push_back(std::string(1, static_cast<char>('a' + x)));
  std::vector<std::string> types;
  for (std::size_t t = 0; t < f.size(); ++t) types.push_back("t" + std::to_string(t + 1));
  std::vector<std::vector<std::vector<Rational>>> valuations(1);
  for (const auto& row : v) {
    auto& out = valuations[0].emplace_back();
    for (int value : row) out.push_back(Rational(value));
  }
  return Instance::Create(outcomes, {types}, std::nullopt, valuations, f);
}

namespace {

struct DenseRow {
  std::vector<Rational> a;
  Rational b;
  bool strict = false;
};

// Scales so that the first nonzero coefficient has magnitude one.
DenseRow Normalize(DenseRow row) {
  for (const auto& c : row.a) {
    if (c.is_zero()) continue;
    const Rational scale = c.abs();
    for (auto& x : row.a) x /= scale;
    row.b /= scale;
    break;
  }
  return row;
}

std::string Key(const DenseRow& row) {
  std::string key = row.strict ? "<" : "<=";
  for (const auto& c : row.a) key += c.ToString() + " ";
  return key + "|" + row.b.ToString();
}

}  // namespace

bool FourierMotzkinFeasible(const LinearSystem& system) {
  const int n = system.variable_count();
  std::vector<DenseRow> rows;
  for (const auto& c : system.constraints()) {
    DenseRow row{std::vector<Rational>(n), c.bound, c.strict()};
    for (const auto& [var, coeff] : c.coefficients) row.a[var] = coeff;
    rows.push_back(row);
  }
  for (int j = 0; j < n; ++j) {
    std::vector<DenseRow> pos, neg, next;
    for (const auto& row : rows) {
      const int s = row.a[j].sign();
      if (s == 0) {
        next.push_back(row);
        continue;
      }
      DenseRow scaled = row;
      const Rational scale = row.a[j].abs();
      for (auto& x : scaled.a) x /= scale;
      scaled.b /= scale;
      (s > 0 ? pos : neg).push_back(scaled);
    }
    for (const auto& p : pos) {
      for (const auto& q : neg) {
        DenseRow sum{std::vector<Rational>(n), p.b + q.b, p.strict || q.strict};
        for (int k = 0; k < n; ++k) sum.a[k] = p.a[k] + q.a[k];
        next.push_back(sum);
      }
    }
    std::set<std::string> seen;
    rows.clear();
    for (auto& row : next) {
      DenseRow normalized = Normalize(row);
      bool constant = std::all_of(normalized.a.begin(), normalized.a.end(),
                                  [](const Rational& c) { return c.is_zero(); });
      if (constant) {
        if (normalized.strict ? normalized.b.sign() <= 0 : normalized.b.sign() < 0) return false;
        continue;
      }
      if (seen.insert(Key(normalized)).second) rows.push_back(std::move(normalized));
    }
  }
  for (const auto& row : rows) {
    if (row.strict ? row.b.sign() <= 0 : row.b.sign() < 0) return false;
  }
  return true;
}

Instance RandomInstance(std::mt19937_64& rng, const InstanceShape& shape) {
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int n = uniform(shape.min_agents, shape.max_agents);
  const int outcome_count = uniform(1, shape.max_outcomes);
  std::vector<std::string> outcomes;
  for (int x = 0; x < outcome_count; ++x) outcomes.push_back(std::string(1, static_cast<char>('a' + x)));
  std::vector<std::vector<std::string>> types(n);
  std::vector<int> counts(n);
  std::size_t profiles = 1;
  for (int i = 0; i < n; ++i) {
    counts[i] = uniform(1, shape.max_types);
    for (int t = 0; t < counts[i]; ++t) {
      types[i].push_back(std::string(1, "tuvw"[i % 4]) + std::to_string(t + 1));
    }
    profiles *= static_cast<std::size_t>(counts[i]);
  }

  auto digits_of = [&](std::size_t profile) {
    std::vector<int> digits(n);
    for (int i = n - 1; i >= 0; --i) {
      digits[i] = static_cast<int>(profile % counts[i]);
      profile /= counts[i];
    }
    return digits;
  };

  std::vector<Rational> prior(profiles);
  if (shape.product_prior) {
    std::vector<std::vector<Rational>> marginals(n);
    for (int i = 0; i < n; ++i) {
      Rational total;
      for (int t = 0; t < counts[i]; ++t) {
        marginals[i].push_back(Rational(uniform(1, 4)));
        total += marginals[i].back();
      }
      for (auto& m : marginals[i]) m /= total;
    }
    for (std::size_t p = 0; p < profiles; ++p) {
      Rational mass(1);
      const auto digits = digits_of(p);
      for (int i = 0; i < n; ++i) mass *= marginals[i][digits[i]];
      prior[p] = mass;
    }
  } else {
    while (true) {
      std::vector<int> weights(profiles);
      for (auto& w : weights) w = uniform(shape.allow_zero_profiles ? 0 : 1, 4);
      bool marginals_positive = true;
      for (int i = 0; i < n && marginals_positive; ++i) {
        std::vector<int> mass(counts[i], 0);
        for (std::size_t p = 0; p < profiles; ++p) mass[digits_of(p)[i]] += weights[p];
        marginals_positive = std::all_of(mass.begin(), mass.end(), [](int m) { return m > 0; });
      }
      if (!marginals_positive) continue;
      int total = 0;
      for (int w : weights) total += w;
      for (std::size_t p = 0; p < profiles; ++p) prior[p] = Rational(weights[p], total);
      break;
    }
  }

  std::vector<std::vector<std::vector<Rational>>> valuations(n);
  for (int i = 0; i < n; ++i) {
    for (int x = 0; x < outcome_count; ++x) {
      auto& row = valuations[i].emplace_back();
      for (std::size_t p = 0; p < profiles; ++p) row.push_back(Rational(uniform(-shape.value_range, shape.value_range)));
    }
  }
  std::vector<int> scf(profiles);
  for (auto& f : scf) f = uniform(0, outcome_count - 1);
  return Instance::Create(outcomes, types, prior, valuations, scf);
}

LinearSystem RandomSystem(std::mt19937_64& rng, int variables, int rows, int range) {
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  LinearSystem system(variables);
  for (int r = 0; r < rows; ++r) {
    LinearConstraint c;
    for (int j = 0; j < variables; ++j) {
      const int value = uniform(-range, range);
      if (value != 0) c.coefficients[j] = Rational(value);
    }
    c.bound = Rational(uniform(-range, range));
    c.relation = uniform(0, 1) ? Relation::kLess : Relation::kLessEqual;
    system.Add(c);
  }
  return system;
}

namespace {

std::vector<int> Digits(std::size_t index, const std::vector<int>& radices) {
  std::vector<int> digits(radices.size());
  for (std::size_t k = radices.size(); k-- > 0;) {
    digits[k] = static_cast<int>(index % radices[k]);
    index /= radices[k];
  }
  return digits;
}

std::size_t Index(const std::vector<int>& digits, const std::vector<int>& radices) {
  std::size_t index = 0;
  for (std::size_t k = 0; k < radices.size(); ++k) index = index * radices[k] + digits[k];
  return index;
}

std::vector<int> TypeRadices(const Instance& instance) {
  std::vector<int> radices;
  for (int i = 0; i < instance.agent_count(); ++i) radices.push_back(instance.type_count(i));
  return radices;
}

// Every strategy profile in lexicographic (agent, type) slot order.
std::vector<StrategyProfile> AllProfiles(const Instance& instance, const std::vector<int>& bid_counts) {
  std::vector<int> slots;
  for (int i = 0; i < instance.agent_count(); ++i) {
    for (int t = 0; t < instance.type_count(i); ++t) slots.push_back(bid_counts[i]);
  }
  std::size_t total = 1;
  for (int s : slots) total *= static_cast<std::size_t>(s);
  std::vector<StrategyProfile> out;
  for (std::size_t k = 0; k < total; ++k) {
    const auto digits = Digits(k, slots);
    StrategyProfile profile;
    std::size_t next = 0;
    for (int i = 0; i < instance.agent_count(); ++i) {
      auto& row = profile.bids.emplace_back();
      for (int t = 0; t < instance.type_count(i); ++t) row.push_back(digits[next++]);
    }
    out.push_back(std::move(profile));
  }
  return out;
}

}  // namespace

Rational PriorUtility(const Instance& instance, const Mechanism& mechanism,
                      const StrategyProfile& profile, int agent, int own_type, int bid) {
  const auto radices = TypeRadices(instance);
  std::vector<int> bid_radices;
  for (int i = 0; i < instance.agent_count(); ++i) bid_radices.push_back(mechanism.bid_count(i));
  Rational mass, total;
  for (std::size_t theta = 0; theta < instance.profile_count(); ++theta) {
    const auto types = Digits(theta, radices);
    if (types[agent] != own_type) continue;
    std::vector<int> bids(types.size());
    for (int j = 0; j < instance.agent_count(); ++j) bids[j] = j == agent ? bid : profile.bid(j, types[j]);
    const std::size_t b = Index(bids, bid_radices);
    const Rational& p = instance.prior(theta);
    mass += p;
    total += p * (instance.valuation(agent, mechanism.outcome(b), theta) + mechanism.payment(agent, b));
  }
  return total / mass;
}

std::vector<StrategyProfile> BruteForceEquilibria(const Instance& instance, const Mechanism& mechanism) {
  std::vector<int> bid_counts;
  for (int i = 0; i < instance.agent_count(); ++i) bid_counts.push_back(mechanism.bid_count(i));
  std::vector<StrategyProfile> out;
  for (const auto& profile : AllProfiles(instance, bid_counts)) {
    bool equilibrium = true;
    for (int i = 0; i < instance.agent_count() && equilibrium; ++i) {
      for (int t = 0; t < instance.type_count(i) && equilibrium; ++t) {
        const Rational played = PriorUtility(instance, mechanism, profile, i, t, profile.bid(i, t));
        for (int s = 0; s < mechanism.bid_count(i) && equilibrium; ++s) {
          equilibrium = PriorUtility(instance, mechanism, profile, i, t, s) <= played;
        }
      }
    }
    if (equilibrium) out.push_back(profile);
  }
  return out;
}

bool SingleAgentGood(const Instance& instance, const std::vector<Rational>& payments) {
  const int types = instance.type_count(0);
  auto utility = [&](int truth, int report) {
    return instance.valuation(0, instance.scf(report), truth) + payments[report];
  };
  for (int t = 0; t < types; ++t) {
    for (int s = 0; s < types; ++s) {
      if (utility(t, s) > utility(t, t)) return false;
    }
  }
  for (const auto& profile : AllProfiles(instance, {types})) {
    bool equilibrium = true;
    bool bad = false;
    for (int t = 0; t < types; ++t) {
      const int played = profile.bid(0, t);
      for (int s = 0; s < types; ++s) equilibrium = equilibrium && utility(t, s) <= utility(t, played);
      bad = bad || instance.scf(played) != instance.scf(t);
    }
    if (equilibrium && bad) return false;
  }
  return true;
}

std::optional<std::vector<Rational>> SingleAgentGridWitness(const Instance& instance) {
  int max_value = 0;
  for (int x = 0; x < instance.outcome_count(); ++x) {
    for (std::size_t t = 0; t < instance.profile_count(); ++t) {
      const Rational v = instance.valuation(0, x, t).abs();
      max_value = std::max<int>(max_value, static_cast<int>(v.numerator().get_si()));
    }
  }
  std::set<Rational> grid;
  for (int d = 1; d <= 4; ++d) {
    for (int k = -4 * max_value; k <= 4 * max_value; ++k) grid.insert(Rational(k, d));
  }
  const std::vector<Rational> values(grid.begin(), grid.end());
  const int types = instance.type_count(0);
  std::vector<int> radices(types, static_cast<int>(values.size()));
  std::size_t total = 1;
  for (int r : radices) total *= static_cast<std::size_t>(r);
  for (std::size_t k = 0; k < total; ++k) {
    std::vector<Rational> payments;
    for (int digit : Digits(k, radices)) payments.push_back(values[digit]);
    if (SingleAgentGood(instance, payments)) return payments;
  }
  return std::nullopt;
}

namespace {

struct Form {
  Rational constant;
  std::map<int, Rational> coefficients;
};

struct BudgetExhausted {};

class Reference {
 public:
  Reference(const Instance& instance, std::uint64_t max_branches)
      : instance_(instance), radices_(TypeRadices(instance)), max_branches_(max_branches) {
    profiles_ = AllProfiles(instance, radices_);
    payment_variables_ = instance.agent_count() * static_cast<int>(instance.profile_count());
  }

  bool Run() {
    const StrategyProfile truthful = Truthful();
    return Label(0, truthful);
  }

 private:
  StrategyProfile Truthful() const {
    StrategyProfile profile;
    for (int i = 0; i < instance_.agent_count(); ++i) {
      auto& row = profile.bids.emplace_back();
      for (int t = 0; t < instance_.type_count(i); ++t) row.push_back(t);
    }
    return profile;
  }

  Rational Weight(std::size_t theta, int agent) const {
    Rational marginal;
    const int own = Digits(theta, radices_)[agent];
    for (std::size_t other = 0; other < instance_.profile_count(); ++other) {
      if (Digits(other, radices_)[agent] == own) marginal += instance_.prior(other);
    }
    return instance_.prior(theta) / marginal;
  }

  // Interim utility of reporting `report` in the direct mechanism.
  Form Utility(const StrategyProfile& alpha, int agent, int own, int report) const {
    Form form;
    for (std::size_t theta = 0; theta < instance_.profile_count(); ++theta) {
      auto digits = Digits(theta, radices_);
      if (digits[agent] != own) continue;
      const Rational w = Weight(theta, agent);
      for (int j = 0; j < instance_.agent_count(); ++j) digits[j] = j == agent ? report : alpha.bid(j, digits[j]);
      const std::size_t reported = Index(digits, radices_);
      form.constant += w * instance_.valuation(agent, instance_.scf(reported), theta);
      form.coefficients[agent * static_cast<int>(instance_.profile_count()) + static_cast<int>(reported)] += w;
    }
    return form;
  }

  // Flag utility; flag variables start at `base`, indexed by the co-profile
  // the others report.
  Form FlagUtility(const StrategyProfile& alpha, int agent, int own, const std::vector<int>& h,
                   int base) const {
    std::vector<int> co_radices;
    for (int j = 0; j < instance_.agent_count(); ++j) {
      if (j != agent) co_radices.push_back(radices_[j]);
    }
    Form form;
    for (std::size_t theta = 0; theta < instance_.profile_count(); ++theta) {
      const auto digits = Digits(theta, radices_);
      if (digits[agent] != own) continue;
      const Rational w = Weight(theta, agent);
      std::vector<int> co;
      for (int j = 0; j < instance_.agent_count(); ++j) {
        if (j != agent) co.push_back(alpha.bid(j, digits[j]));
      }
      const std::size_t c = Index(co, co_radices);
      form.constant += w * instance_.valuation(agent, h[c], theta);
      form.coefficients[base + static_cast<int>(c)] += w;
    }
    return form;
  }

  void Push(const Form& lhs, const Form& rhs, Relation relation) {
    LinearConstraint row;
    row.relation = relation;
    row.bound = rhs.constant - lhs.constant;
    for (const auto& [v, c] : lhs.coefficients) row.coefficients[v] += c;
    for (const auto& [v, c] : rhs.coefficients) row.coefficients[v] -= c;
    rows_.push_back(row);
  }

  bool Feasible() {
    if (++branches_ > max_branches_) throw BudgetExhausted{};
    LinearSystem system(payment_variables_ + flag_variables_);
    for (const auto& row : rows_) system.Add(row);
    return std::holds_alternative<StrictlyFeasible>(SolveMixedSystem(system));
  }

  bool IsBad(const StrategyProfile& alpha) const {
    for (std::size_t theta = 0; theta < instance_.profile_count(); ++theta) {
      auto digits = Digits(theta, radices_);
      for (int j = 0; j < instance_.agent_count(); ++j) digits[j] = alpha.bid(j, digits[j]);
      if (instance_.scf(Index(digits, radices_)) != instance_.scf(theta)) return true;
    }
    return false;
  }

  bool Label(std::size_t k, const StrategyProfile& truthful) {
    if (k == profiles_.size()) return Plan();
    const StrategyProfile& alpha = profiles_[k];
    const std::size_t mark = rows_.size();

    for (int i = 0; i < instance_.agent_count(); ++i) {
      for (int t = 0; t < instance_.type_count(i); ++t) {
        const Form played = Utility(alpha, i, t, alpha.bid(i, t));
        for (int r = 0; r < instance_.type_count(i); ++r) {
          if (r != alpha.bid(i, t)) Push(Utility(alpha, i, t, r), played, Relation::kLessEqual);
        }
      }
    }
    if (Feasible()) {
      equilibria_.push_back(k);
      if (Label(k + 1, truthful)) return true;
      equilibria_.pop_back();
    }
    rows_.resize(mark);
    if (alpha == truthful) return false;

    for (int i = 0; i < instance_.agent_count(); ++i) {
      for (int t = 0; t < instance_.type_count(i); ++t) {
        for (int r = 0; r < instance_.type_count(i); ++r) {
          if (r == alpha.bid(i, t)) continue;
          Push(Utility(alpha, i, t, alpha.bid(i, t)), Utility(alpha, i, t, r), Relation::kLess);
          if (Feasible() && Label(k + 1, truthful)) return true;
          rows_.resize(mark);
        }
      }
    }
    return false;
  }

  bool Plan() {
    std::vector<std::size_t> bad;
    for (std::size_t k : equilibria_) {
      if (IsBad(profiles_[k])) bad.push_back(k);
    }
    return Eliminate(bad, 0);
  }

  bool Eliminate(const std::vector<std::size_t>& bad, std::size_t e) {
    if (e == bad.size()) return true;
    const StrategyProfile& alpha = profiles_[bad[e]];
    const StrategyProfile truthful = Truthful();
    const std::size_t mark = rows_.size();
    for (int i = 0; i < instance_.agent_count(); ++i) {
      int co_size = 1;
      for (int j = 0; j < instance_.agent_count(); ++j) {
        if (j != i) co_size *= radices_[j];
      }
      std::size_t maps = 1;
      for (int c = 0; c < co_size; ++c) maps *= static_cast<std::size_t>(instance_.outcome_count());
      const int base = payment_variables_ + flag_variables_;
      flag_variables_ += co_size;
      for (int threatened = 0; threatened < instance_.type_count(i); ++threatened) {
        for (std::size_t m = 0; m < maps; ++m) {
          const auto h = Digits(m, std::vector<int>(co_size, instance_.outcome_count()));
          Push(Utility(alpha, i, threatened, alpha.bid(i, threatened)),
               FlagUtility(alpha, i, threatened, h, base), Relation::kLess);
          for (int t = 0; t < instance_.type_count(i); ++t) {
            Push(FlagUtility(truthful, i, t, h, base), Utility(truthful, i, t, t), Relation::kLessEqual);
          }
          if (Feasible() && Eliminate(bad, e + 1)) return true;
          rows_.resize(mark);
        }
      }
      flag_variables_ -= co_size;
    }
    return false;
  }

  const Instance& instance_;
  std::vector<int> radices_;
  std::uint64_t max_branches_;
  std::uint64_t branches_ = 0;
  std::vector<StrategyProfile> profiles_;
  std::vector<std::size_t> equilibria_;
  std::vector<LinearConstraint> rows_;
  int payment_variables_ = 0;
  int flag_variables_ = 0;
};

}  // namespace

std::optional<bool> ReferenceStrong(const Instance& instance, std::uint64_t max_branches) {
  try {
    return Reference(instance, max_branches).Run();
  } catch (const BudgetExhausted&) {
    return std::nullopt;
  }
}

}  // namespace mechcheck::testing
