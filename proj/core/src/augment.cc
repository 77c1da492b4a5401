#include "mechcheck/augment.h"

#include "mechcheck/error.h"

namespace mechcheck {

AugmentationResult AugmentFromMechanism(const Instance& instance, const Beliefs& beliefs,
                                        const Mechanism& mechanism, const StrategyProfile& alpha,
                                        const EnumerationOptions& options) {
  const int n = instance.agent_count();
  if (mechanism.agent_count() != n || alpha.bids.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorKind::kDimensionMismatch, "strategy profile does not match the mechanism");
  }
  for (int i = 0; i < n; ++i) {
    if (alpha.bids[i].size() != static_cast<std::size_t>(instance.type_count(i))) {
      throw Error(ErrorKind::kDimensionMismatch, "strategy must give one bid per type");
    }
    for (int bid : alpha.bids[i]) {
      if (bid < 0 || bid >= mechanism.bid_count(i)) {
        throw Error(ErrorKind::kDimensionMismatch, "strategy bid outside the bid set");
      }
    }
  }
  const EquilibriumReport report = IsEquilibrium(instance, beliefs, mechanism, alpha);
  if (!report.is_equilibrium) {
    const Violation& v = *report.violation;
    throw Error(ErrorKind::kNotAnEquilibrium,
                "agent " + std::to_string(v.agent + 1) + " of type " +
                    instance.types()[v.agent][v.type] + " prefers bid " +
                    mechanism.bid_sets()[v.agent][v.bid]);
  }

  AugmentationResult result;
  std::vector<std::vector<std::string>> bid_sets(n);
  result.bid_map.resize(n);
  result.flags.resize(n);
  for (int i = 0; i < n; ++i) {
    std::vector<char> used(mechanism.bid_count(i), 0);
    for (int type = 0; type < instance.type_count(i); ++type) {
      bid_sets[i].push_back(instance.types()[i][type]);
      result.bid_map[i].push_back(alpha.bid(i, type));
      used[alpha.bid(i, type)] = 1;
    }
    for (int s = 0; s < mechanism.bid_count(i); ++s) {
      if (used[s]) continue;
      bid_sets[i].push_back(std::string(kFlagPrefix) + mechanism.bid_sets()[i][s]);
      result.bid_map[i].push_back(s);
      result.flags[i].push_back(s);
    }
  }

  std::vector<int> radices;
  for (const auto& bids : bid_sets) radices.push_back(static_cast<int>(bids.size()));
  const ProductSpace augmented(radices);
  std::vector<int> outcome(augmented.size());
  std::vector<std::vector<Rational>> payments(n, std::vector<Rational>(augmented.size()));
  std::vector<int> original(n);
  for (std::size_t b = 0; b < augmented.size(); ++b) {
    const std::vector<int> digits = augmented.Decode(b);
    for (int i = 0; i < n; ++i) original[i] = result.bid_map[i][digits[i]];
    const std::size_t source = mechanism.profiles().Encode(original);
    outcome[b] = mechanism.outcome(source);
    for (int i = 0; i < n; ++i) payments[i][b] = mechanism.payment(i, source);
  }
  result.mechanism = Mechanism::Create(instance, std::move(bid_sets), std::move(outcome),
                                       std::move(payments));

  if (StrategySpace(instance, mechanism).size() <= options.budget) {
    result.source_implements = VerifyStrongImplementation(instance, beliefs, mechanism, options).implements;
  }
  return result;
}

}  // namespace mechcheck
