#include "mechcheck/mechanism.h"

#include <limits>
#include <set>
#include <thread>

#include "mechcheck/error.h"

namespace mechcheck {

PaymentScheme ZeroPayments(const Instance& instance) {
  return PaymentScheme(instance.agent_count(),
                       std::vector<Rational>(instance.profile_count(), Rational(0)));
}

Mechanism Mechanism::Create(const Instance& instance,
                            std::vector<std::vector<std::string>> bid_sets,
                            std::vector<int> outcome,
                            std::vector<std::vector<Rational>> payments) {
  const int n = instance.agent_count();
  if (bid_sets.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorKind::kMissingEntry, "mechanism must define a bid set per agent");
  }
  std::vector<int> radices;
  for (const auto& bids : bid_sets) {
    if (bids.empty()) throw Error(ErrorKind::kMissingEntry, "bid sets must be non-empty");
    std::set<std::string> seen;
    for (const auto& label : bids) {
      if (label.empty() || label.find(',') != std::string::npos) {
        throw Error(ErrorKind::kParse, "bid label '" + label + "' is empty or contains ','");
      }
      if (!seen.insert(label).second) {
        throw Error(ErrorKind::kDuplicateLabel, "duplicate bid label '" + label + "'");
      }
    }
    radices.push_back(static_cast<int>(bids.size()));
  }
  Mechanism mech;
  mech.bid_sets_ = std::move(bid_sets);
  mech.profiles_ = ProductSpace(radices);
  if (outcome.size() != mech.profiles_.size()) {
    throw Error(ErrorKind::kMissingEntry, "outcome function must be total over bid profiles");
  }
  for (int x : outcome) {
    if (x < 0 || x >= instance.outcome_count()) {
      throw Error(ErrorKind::kUnknownLabel, "outcome index out of range");
    }
  }
  if (payments.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorKind::kMissingEntry, "payments must be given for every agent");
  }
  for (const auto& row : payments) {
    if (row.size() != mech.profiles_.size()) {
      throw Error(ErrorKind::kMissingEntry, "payments must be total over bid profiles");
    }
  }
  mech.outcome_ = std::move(outcome);
  mech.payments_ = std::move(payments);
  mech.direct_ = mech.bid_sets_ == instance.types();
  return mech;
}

Mechanism Mechanism::Direct(const Instance& instance, PaymentScheme payments) {
  return Create(instance, instance.types(), instance.scf(), std::move(payments));
}

std::string Mechanism::ProfileKey(std::size_t bid_profile) const {
  std::string key;
  for (int i = 0; i < agent_count(); ++i) {
    if (i > 0) key += ',';
    key += bid_sets_[i][profiles_.Digit(bid_profile, i)];
  }
  return key;
}

std::optional<std::size_t> Mechanism::FindProfile(const std::string& key) const {
  std::vector<int> digits;
  std::size_t start = 0;
  for (int i = 0; i < agent_count(); ++i) {
    const std::size_t end = (i + 1 == agent_count()) ? key.size() : key.find(',', start);
    if (end == std::string::npos) return std::nullopt;
    auto bid = FindBid(i, key.substr(start, end - start));
    if (!bid) return std::nullopt;
    digits.push_back(*bid);
    start = end + 1;
  }
  return profiles_.Encode(digits);
}

std::optional<int> Mechanism::FindBid(int agent, const std::string& label) const {
  const auto& bids = bid_sets_[agent];
  for (std::size_t k = 0; k < bids.size(); ++k) {
    if (bids[k] == label) return static_cast<int>(k);
  }
  return std::nullopt;
}

StrategyProfile TruthfulProfile(const Instance& instance) {
  StrategyProfile profile;
  for (int i = 0; i < instance.agent_count(); ++i) {
    std::vector<int> identity(instance.type_count(i));
    for (int k = 0; k < instance.type_count(i); ++k) identity[k] = k;
    profile.bids.push_back(std::move(identity));
  }
  return profile;
}

namespace {

std::vector<int> TypeCounts(const Instance& instance) {
  std::vector<int> counts;
  for (int i = 0; i < instance.agent_count(); ++i) counts.push_back(instance.type_count(i));
  return counts;
}

std::vector<int> BidCounts(const Mechanism& mechanism) {
  std::vector<int> counts;
  for (int i = 0; i < mechanism.agent_count(); ++i) counts.push_back(mechanism.bid_count(i));
  return counts;
}

}  // namespace

StrategySpace::StrategySpace(const Instance& instance, const Mechanism& mechanism)
    : StrategySpace(TypeCounts(instance), BidCounts(mechanism)) {}

StrategySpace::StrategySpace(std::vector<int> type_counts, std::vector<int> bid_counts)
    : type_counts_(std::move(type_counts)), bid_counts_(std::move(bid_counts)) {
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < type_counts_.size(); ++i) {
    const auto radix = static_cast<std::size_t>(bid_counts_[i]);
    for (int k = 0; k < type_counts_[i]; ++k) {
      size_ = (size_ > kMax / radix) ? kMax : size_ * radix;
    }
  }
}

StrategySpace StrategySpace::Direct(const Instance& instance) {
  return StrategySpace(TypeCounts(instance), TypeCounts(instance));
}

StrategyProfile StrategySpace::Decode(std::size_t index) const {
  StrategyProfile profile;
  profile.bids.resize(type_counts_.size());
  for (int i = static_cast<int>(type_counts_.size()) - 1; i >= 0; --i) {
    profile.bids[i].resize(type_counts_[i]);
    for (int k = type_counts_[i] - 1; k >= 0; --k) {
      profile.bids[i][k] = static_cast<int>(index % bid_counts_[i]);
      index /= bid_counts_[i];
    }
  }
  return profile;
}

std::size_t StrategySpace::Encode(const StrategyProfile& profile) const {
  std::size_t index = 0;
  for (std::size_t i = 0; i < type_counts_.size(); ++i) {
    for (int k = 0; k < type_counts_[i]; ++k) {
      index = index * bid_counts_[i] + profile.bids[i][k];
    }
  }
  return index;
}

std::size_t BidProfileFor(const Instance& instance, const Mechanism& mechanism,
                          const StrategyProfile& profile, std::size_t type_profile, int agent,
                          int bid) {
  std::vector<int> digits(instance.agent_count());
  for (int j = 0; j < instance.agent_count(); ++j) {
    digits[j] = (j == agent) ? bid : profile.bid(j, instance.TypeOf(type_profile, j));
  }
  return mechanism.profiles().Encode(digits);
}

Rational ExpectedUtility(const Instance& instance, const Beliefs& beliefs,
                         const Mechanism& mechanism, const StrategyProfile& profile, int agent,
                         int own_type, int bid) {
  Rational total;
  for (std::size_t co = 0; co < instance.co_profile_count(agent); ++co) {
    const Rational& weight = beliefs(agent, own_type, co);
    if (weight.is_zero()) continue;
    const std::size_t theta = instance.Combine(agent, co, own_type);
    const std::size_t b = BidProfileFor(instance, mechanism, profile, theta, agent, bid);
    total += weight * (instance.valuation(agent, mechanism.outcome(b), theta) +
                       mechanism.payment(agent, b));
  }
  return total;
}

bool RealizesScf(const Instance& instance, const Mechanism& mechanism,
                 const StrategyProfile& profile) {
  for (std::size_t theta = 0; theta < instance.profile_count(); ++theta) {
    const std::size_t b = BidProfileFor(instance, mechanism, profile, theta, 0,
                                        profile.bid(0, instance.TypeOf(theta, 0)));
    if (mechanism.outcome(b) != instance.scf(theta)) return false;
  }
  return true;
}

EquilibriumReport IsEquilibrium(const Instance& instance, const Beliefs& beliefs,
                                const Mechanism& mechanism, const StrategyProfile& profile) {
  EquilibriumReport report{profile, true, std::nullopt, std::nullopt};
  for (int i = 0; i < instance.agent_count() && report.is_equilibrium; ++i) {
    for (int own = 0; own < instance.type_count(i) && report.is_equilibrium; ++own) {
      const int played = profile.bid(i, own);
      const Rational current = ExpectedUtility(instance, beliefs, mechanism, profile, i, own, played);
      for (int s = 0; s < mechanism.bid_count(i); ++s) {
        if (s == played) continue;
        if (ExpectedUtility(instance, beliefs, mechanism, profile, i, own, s) > current) {
          report.is_equilibrium = false;
          report.violation = Violation{i, own, s};
          break;
        }
      }
    }
  }
  if (report.is_equilibrium && mechanism.is_direct()) {
    report.classification = RealizesScf(instance, mechanism, profile) ? Classification::kGood
                                                                      : Classification::kBad;
  }
  return report;
}

std::vector<EquilibriumReport> EnumerateEquilibria(const Instance& instance,
                                                   const Beliefs& beliefs,
                                                   const Mechanism& mechanism,
                                                   const EnumerationOptions& options) {
  const StrategySpace space(instance, mechanism);
  if (space.size() > options.budget) {
    throw Error(ErrorKind::kBudgetExceeded,
                "strategy space exceeds the enumeration budget of " +
                    std::to_string(options.budget) + " profiles");
  }
  auto scan = [&](std::size_t begin, std::size_t end) {
    std::vector<EquilibriumReport> found;
    for (std::size_t k = begin; k < end; ++k) {
      auto report = IsEquilibrium(instance, beliefs, mechanism, space.Decode(k));
      if (report.is_equilibrium) found.push_back(std::move(report));
    }
    return found;
  };
  const std::size_t total = space.size();
  const auto workers = static_cast<std::size_t>(std::max(1, options.workers));
  if (workers == 1 || total < 2 * workers) return scan(0, total);

  std::vector<std::vector<EquilibriumReport>> parts(workers);
  std::vector<std::thread> threads;
  const std::size_t chunk = (total + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(total, w * chunk);
    const std::size_t end = std::min(total, begin + chunk);
    threads.emplace_back([&, w, begin, end] { parts[w] = scan(begin, end); });
  }
  for (auto& t : threads) t.join();
  std::vector<EquilibriumReport> merged;
  for (auto& part : parts) {
    for (auto& report : part) merged.push_back(std::move(report));
  }
  return merged;
}

bool IsIncentiveCompatible(const Instance& instance, const Beliefs& beliefs,
                           const PaymentScheme& payments) {
  const Mechanism direct = Mechanism::Direct(instance, payments);
  return IsEquilibrium(instance, beliefs, direct, TruthfulProfile(instance)).is_equilibrium;
}

StrongVerdict VerifyStrongImplementation(const Instance& instance, const Beliefs& beliefs,
                                         const Mechanism& mechanism,
                                         const EnumerationOptions& options) {
  StrongVerdict verdict;
  const auto equilibria = EnumerateEquilibria(instance, beliefs, mechanism, options);
  verdict.equilibrium_count = equilibria.size();
  if (equilibria.empty()) {
    verdict.witness = StrongVerdict::Witness::kNoEquilibrium;
    return verdict;
  }
  for (const auto& report : equilibria) {
    if (!RealizesScf(instance, mechanism, report.profile)) {
      verdict.witness = StrongVerdict::Witness::kBadEquilibrium;
      verdict.bad_equilibrium = report.profile;
      return verdict;
    }
  }
  verdict.implements = true;
  return verdict;
}

}  // namespace mechcheck
