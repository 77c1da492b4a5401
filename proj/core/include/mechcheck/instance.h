#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mechcheck/rational.h"

namespace mechcheck {

// Mixed-radix enumeration of a finite product space. Position 0 is the most
// significant digit, so increasing indices are lexicographic order.
class ProductSpace {
 public:
  ProductSpace() = default;
  explicit ProductSpace(std::vector<int> radices);

  std::size_t size() const { return size_; }
  int positions() const { return static_cast<int>(radices_.size()); }
  int radix(int position) const { return radices_[position]; }

  std::size_t Encode(std::span<const int> digits) const;
  std::vector<int> Decode(std::size_t index) const;
  int Digit(std::size_t index, int position) const;

  friend bool operator==(const ProductSpace&, const ProductSpace&) = default;

 private:
  std::vector<int> radices_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
};

// Label-level description of an instance, as read from the file format.
// Profile keys are type labels joined by ',' in agent order. Rationals are
// kept as text so that validation reports malformed numbers.
struct RawInstance {
  int agents = 0;
  std::vector<std::string> outcomes;
  std::vector<std::vector<std::string>> types;
  std::optional<std::map<std::string, std::string>> prior;
  // agent -> outcome label -> profile key -> rational
  std::vector<std::map<std::string, std::map<std::string, std::string>>> valuations;
  std::map<std::string, std::string> scf;
};

// Validated, immutable problem instance. Types and outcomes are addressed by
// dense indices fixed by declaration order; type profiles by their
// lexicographic index (agent 0 most significant).
class Instance {
 public:
  // valuations[i][x][profile], scf[profile] = outcome index.
  static Instance Create(std::vector<std::string> outcomes,
                         std::vector<std::vector<std::string>> types,
                         std::optional<std::vector<Rational>> prior,
                         std::vector<std::vector<std::vector<Rational>>> valuations,
                         std::vector<int> scf);

  int agent_count() const { return static_cast<int>(types_.size()); }
  int outcome_count() const { return static_cast<int>(outcomes_.size()); }
  int type_count(int agent) const { return static_cast<int>(types_[agent].size()); }
  std::size_t profile_count() const { return profiles_.size(); }
  std::size_t co_profile_count(int agent) const { return co_spaces_[agent].size(); }

  const std::vector<std::string>& outcomes() const { return outcomes_; }
  const std::vector<std::vector<std::string>>& types() const { return types_; }
  const std::vector<Rational>& prior() const { return prior_; }
  bool prior_explicit() const { return prior_explicit_; }
  const std::vector<int>& scf() const { return scf_; }

  const Rational& prior(std::size_t profile) const { return prior_[profile]; }
  const Rational& valuation(int agent, int outcome, std::size_t profile) const {
    return valuations_[agent][outcome][profile];
  }
  const std::vector<std::vector<std::vector<Rational>>>& valuations() const {
    return valuations_;
  }
  int scf(std::size_t profile) const { return scf_[profile]; }

  const ProductSpace& profiles() const { return profiles_; }
  const ProductSpace& co_profiles(int agent) const { return co_spaces_[agent]; }

  int TypeOf(std::size_t profile, int agent) const { return profiles_.Digit(profile, agent); }
  std::size_t CoProfileOf(std::size_t profile, int agent) const {
    return co_of_[agent][profile];
  }
  // Full profile assembled from agent's own type and a co-profile index.
  std::size_t Combine(int agent, std::size_t co_profile, int own_type) const {
    return combine_[agent][co_profile * types_[agent].size() + own_type];
  }

  std::string ProfileKey(std::size_t profile) const;
  std::string CoProfileKey(int agent, std::size_t co_profile) const;
  std::optional<std::size_t> FindProfile(const std::string& key) const;
  std::optional<int> FindType(int agent, const std::string& label) const;
  std::optional<int> FindOutcome(const std::string& label) const;

  friend bool operator==(const Instance& lhs, const Instance& rhs) {
    return lhs.outcomes_ == rhs.outcomes_ && lhs.types_ == rhs.types_ &&
           lhs.prior_ == rhs.prior_ && lhs.prior_explicit_ == rhs.prior_explicit_ &&
           lhs.valuations_ == rhs.valuations_ && lhs.scf_ == rhs.scf_;
  }

 private:
  Instance() = default;
  void BuildIndex();

  std::vector<std::string> outcomes_;
  std::vector<std::vector<std::string>> types_;
  std::vector<Rational> prior_;
  bool prior_explicit_ = true;
  std::vector<std::vector<std::vector<Rational>>> valuations_;
  std::vector<int> scf_;

  ProductSpace profiles_;
  std::vector<ProductSpace> co_spaces_;
  std::vector<std::vector<std::size_t>> co_of_;
  std::vector<std::vector<std::size_t>> combine_;
};

// Resolves labels, parses rationals and checks every instance invariant.
// Throws Error with kinds PriorNotNormalized, NegativePrior, ZeroMarginal,
// MissingEntry, UnknownLabel, DuplicateLabel or Parse.
Instance ValidateInstance(const RawInstance& raw);
RawInstance ToRaw(const Instance& instance);

// p_i(theta_i): total prior mass of profiles in which agent has own_type.
Rational Marginal(const Instance& instance, int agent, int own_type);

// Conditional beliefs q_i(theta_-i | theta_i) = p(theta) / p_i(theta_i).
class Beliefs {
 public:
  Beliefs() = default;
  explicit Beliefs(std::vector<std::vector<std::vector<Rational>>> table)
      : table_(std::move(table)) {}

  const Rational& operator()(int agent, int own_type, std::size_t co_profile) const {
    return table_[agent][own_type][co_profile];
  }
  const std::vector<Rational>& row(int agent, int own_type) const {
    return table_[agent][own_type];
  }

  friend bool operator==(const Beliefs&, const Beliefs&) = default;

 private:
  std::vector<std::vector<std::vector<Rational>>> table_;
};

Beliefs ConditionalBeliefs(const Instance& instance);

// True iff the prior factors as the product of its marginals.
bool IsProductPrior(const Instance& instance);

}  // namespace mechcheck
