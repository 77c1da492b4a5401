#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mechcheck/instance.h"
#include "mechcheck/rational.h"

namespace mechcheck {

// payments[agent][type profile] for direct revelation mechanisms.
using PaymentScheme = std::vector<std::vector<Rational>>;

PaymentScheme ZeroPayments(const Instance& instance);

// A finite mechanism over the outcomes of an instance. Bid profiles are
// indexed lexicographically like type profiles.
class Mechanism {
 public:
  // outcome[bid profile] indexes instance.outcomes(); payments[agent][bid profile].
  static Mechanism Create(const Instance& instance, std::vector<std::vector<std::string>> bid_sets,
                          std::vector<int> outcome, std::vector<std::vector<Rational>> payments);
  // Direct revelation mechanism with outcome function f and the given payments.
  static Mechanism Direct(const Instance& instance, PaymentScheme payments);

  int agent_count() const { return static_cast<int>(bid_sets_.size()); }
  int bid_count(int agent) const { return static_cast<int>(bid_sets_[agent].size()); }
  const std::vector<std::vector<std::string>>& bid_sets() const { return bid_sets_; }
  const ProductSpace& profiles() const { return profiles_; }
  std::size_t profile_count() const { return profiles_.size(); }

  int outcome(std::size_t bid_profile) const { return outcome_[bid_profile]; }
  const Rational& payment(int agent, std::size_t bid_profile) const {
    return payments_[agent][bid_profile];
  }
  const std::vector<int>& outcomes() const { return outcome_; }
  const std::vector<std::vector<Rational>>& payments() const { return payments_; }

  bool is_direct() const { return direct_; }

  std::string ProfileKey(std::size_t bid_profile) const;
  std::optional<std::size_t> FindProfile(const std::string& key) const;
  std::optional<int> FindBid(int agent, const std::string& label) const;

  friend bool operator==(const Mechanism& lhs, const Mechanism& rhs) {
    return lhs.bid_sets_ == rhs.bid_sets_ && lhs.outcome_ == rhs.outcome_ &&
           lhs.payments_ == rhs.payments_;
  }

 private:
  std::vector<std::vector<std::string>> bid_sets_;
  ProductSpace profiles_;
  std::vector<int> outcome_;
  std::vector<std::vector<Rational>> payments_;
  bool direct_ = false;
};

// One bid per type for every agent: bids[agent][type] indexes the bid set.
struct StrategyProfile {
  std::vector<std::vector<int>> bids;

  int bid(int agent, int type) const { return bids[agent][type]; }
  friend bool operator==(const StrategyProfile&, const StrategyProfile&) = default;
  friend auto operator<=>(const StrategyProfile&, const StrategyProfile&) = default;
};

StrategyProfile TruthfulProfile(const Instance& instance);

// Lexicographic enumeration of all strategy profiles of a mechanism; the slot
// order is (agent, type) and each slot ranges over that agent's bids.
class StrategySpace {
 public:
  StrategySpace(const Instance& instance, const Mechanism& mechanism);
  StrategySpace(std::vector<int> type_counts, std::vector<int> bid_counts);
  // Strategy space of the direct revelation mechanism (bids are types).
  static StrategySpace Direct(const Instance& instance);

  // Saturates at SIZE_MAX instead of overflowing.
  std::size_t size() const { return size_; }
  StrategyProfile Decode(std::size_t index) const;
  std::size_t Encode(const StrategyProfile& profile) const;

 private:
  std::vector<int> type_counts_;
  std::vector<int> bid_counts_;
  std::size_t size_ = 1;
};

// Bid profile reached when every agent j plays profile.bid(j, theta_j),
// except that `agent` bids `bid` instead.
std::size_t BidProfileFor(const Instance& instance, const Mechanism& mechanism,
                          const StrategyProfile& profile, std::size_t type_profile, int agent,
                          int bid);

// Interim expected utility of `agent` of type own_type bidding `bid` while the
// others follow `profile` (the agent's own strategy in `profile` is ignored).
Rational ExpectedUtility(const Instance& instance, const Beliefs& beliefs,
                         const Mechanism& mechanism, const StrategyProfile& profile, int agent,
                         int own_type, int bid);

enum class Classification { kGood, kBad };

struct Violation {
  int agent = 0;
  int type = 0;
  int bid = 0;
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct EquilibriumReport {
  StrategyProfile profile;
  bool is_equilibrium = false;
  std::optional<Violation> violation;
  std::optional<Classification> classification;
};

// g(alpha(theta)) == f(theta) for every type profile.
bool RealizesScf(const Instance& instance, const Mechanism& mechanism,
                 const StrategyProfile& profile);

// Exact best-response check; the violation reported is the first in
// (agent, type, bid) order with strictly higher utility.
EquilibriumReport IsEquilibrium(const Instance& instance, const Beliefs& beliefs,
                                const Mechanism& mechanism, const StrategyProfile& profile);

struct EnumerationOptions {
  std::size_t budget = 1'000'000;
  int workers = 1;
};

// All equilibria in lexicographic profile order. Throws BudgetExceeded when
// the strategy space is larger than options.budget.
std::vector<EquilibriumReport> EnumerateEquilibria(const Instance& instance,
                                                   const Beliefs& beliefs,
                                                   const Mechanism& mechanism,
                                                   const EnumerationOptions& options = {});

bool IsIncentiveCompatible(const Instance& instance, const Beliefs& beliefs,
                           const PaymentScheme& payments);

struct StrongVerdict {
  enum class Witness { kNone, kNoEquilibrium, kBadEquilibrium };

  bool implements = false;
  Witness witness = Witness::kNone;
  std::optional<StrategyProfile> bad_equilibrium;
  std::size_t equilibrium_count = 0;
};

// Brute-force check that the mechanism has an equilibrium and that every
// equilibrium realizes the social choice function.
StrongVerdict VerifyStrongImplementation(const Instance& instance, const Beliefs& beliefs,
                                         const Mechanism& mechanism,
                                         const EnumerationOptions& options = {});

}  // namespace mechcheck
