#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mechcheck/instance.h"
#include "mechcheck/mechanism.h"

namespace mechcheck {

inline constexpr std::string_view kFlagPrefix = "flag:";

struct AugmentationResult {
  // Bids of agent i are its type labels followed by one "flag:<bid>" per
  // unused original bid.
  Mechanism mechanism;
  // bid_map[i][augmented bid] = original bid of agent i.
  std::vector<std::vector<int>> bid_map;
  // flags[i]: original bids outside the image of alpha_i, in bid order.
  std::vector<std::vector<int>> flags;
  // Brute-force verdict on the source mechanism, when its strategy space fits
  // the enumeration budget.
  std::optional<bool> source_implements;
};

// Revelation mechanism in which type bids route through alpha and unused bids
// survive as flags: g' = g o phi, P' = P o phi. Throws NotAnEquilibrium when
// alpha is not an equilibrium of the mechanism.
AugmentationResult AugmentFromMechanism(const Instance& instance, const Beliefs& beliefs,
                                        const Mechanism& mechanism, const StrategyProfile& alpha,
                                        const EnumerationOptions& options = {});

}  // namespace mechcheck
