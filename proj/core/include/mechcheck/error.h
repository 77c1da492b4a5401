#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mechcheck {

enum class ErrorKind {
  kParse,
  kPriorNotNormalized,
  kNegativePrior,
  kZeroMarginal,
  kMissingEntry,
  kUnknownLabel,
  kDuplicateLabel,
  kBudgetExceeded,
  kDimensionMismatch,
  kNotSingleAgent,
  kIncompleteLabeling,
  kMissingPlanEntry,
  kNotAnEquilibrium,
  kContractViolation,
};

std::string_view ErrorKindName(ErrorKind kind);

// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mechcheck
