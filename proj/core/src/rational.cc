#include "mechcheck/rational.h"

#include <cctype>

#include "mechcheck/error.h"

namespace mechcheck {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "ParseError";
    case ErrorKind::kPriorNotNormalized: return "PriorNotNormalized";
    case ErrorKind::kNegativePrior: return "NegativePrior";
    case ErrorKind::kZeroMarginal: return "ZeroMarginal";
    case ErrorKind::kMissingEntry: return "MissingEntry";
    case ErrorKind::kUnknownLabel: return "UnknownLabel";
    case ErrorKind::kDuplicateLabel: return "DuplicateLabel";
    case ErrorKind::kBudgetExceeded: return "BudgetExceeded";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kNotSingleAgent: return "NotSingleAgent";
    case ErrorKind::kIncompleteLabeling: return "IncompleteLabeling";
    case ErrorKind::kMissingPlanEntry: return "MissingPlanEntry";
    case ErrorKind::kNotAnEquilibrium: return "NotAnEquilibrium";
    case ErrorKind::kContractViolation: return "ContractViolation";
  }
  return "Unknown";
}

Rational::Rational(std::int64_t value) {
  value_ = mpz_class(std::to_string(value));
}

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorKind::kContractViolation, "zero denominator");
  value_ = mpq_class(mpz_class(std::to_string(num)), mpz_class(std::to_string(den)));
  value_.canonicalize();
}

Rational::Rational(mpq_class value) : value_(std::move(value)) { value_.canonicalize(); }

namespace {

bool AllDigits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Rational Rational::Parse(std::string_view text) {
  const std::string original(text);
  bool negative = false;
  if (!text.empty() && text.front() == '-') {
    negative = true;
    text.remove_prefix(1);
  }
  std::string_view num_text = text;
  std::string_view den_text = "1";
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    num_text = text.substr(0, slash);
    den_text = text.substr(slash + 1);
  }
  if (!AllDigits(num_text) || !AllDigits(den_text)) {
    throw Error(ErrorKind::kParse, "malformed rational '" + original + "'");
  }
  mpz_class num{std::string(num_text)};
  mpz_class den{std::string(den_text)};
  if (den == 0) {
    throw Error(ErrorKind::kParse, "non-positive denominator in '" + original + "'");
  }
  if (negative) num = -num;
  return Rational(mpq_class(num, den));
}

std::string Rational::ToString() const {
  if (is_integer()) return numerator().get_str();
  return numerator().get_str() + "/" + denominator().get_str();
}

std::size_t Rational::BitLength() const {
  mpz_class magnitude = ::abs(numerator());
  return mpz_sizeinbase(magnitude.get_mpz_t(), 2) +
         mpz_sizeinbase(denominator().get_mpz_t(), 2);
}

Rational Rational::abs() const { return Rational(mpq_class(::abs(value_))); }

Rational& Rational::operator+=(const Rational& other) {
  value_ += other.value_;
  return *this;
}

Rational& Rational::operator-=(const Rational& other) {
  value_ -= other.value_;
  return *this;
}

Rational& Rational::operator*=(const Rational& other) {
  value_ *= other.value_;
  return *this;
}

Rational& Rational::operator/=(const Rational& other) {
  if (other.is_zero()) throw Error(ErrorKind::kContractViolation, "division by zero");
  value_ /= other.value_;
  return *this;
}

Rational Rational::operator-() const { return Rational(mpq_class(-value_)); }

}  // namespace mechcheck
