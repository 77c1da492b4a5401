#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "mechcheck/instance.h"
#include "mechcheck/mechanism.h"
#include "mechcheck/strong_general.h"

namespace mechcheck {

// Insertion-ordered so that emitted documents are byte-stable.
using Json = nlohmann::ordered_json;

// Throws Error(kParse) for unreadable files and malformed JSON.
Json ReadJsonFile(const std::string& path);
Json ParseJsonText(const std::string& text);

RawInstance ParseRawInstance(const Json& doc);
Instance ParseInstance(const Json& doc);
Json InstanceToJson(const Instance& instance);

// "bids" + "outcome" + "payments", or "payments" alone for a direct
// mechanism. Unknown keys such as "flags" are ignored.
Mechanism ParseMechanism(const Instance& instance, const Json& doc);
Json MechanismToJson(const Mechanism& mechanism, const Instance& instance);

// Profile key -> array of per-agent rationals; with one agent a bare string
// is accepted and emitted. A top-level {"payments": ...} wrapper is accepted.
PaymentScheme ParsePayments(const Instance& instance, const Json& doc);
Json PaymentsToJson(const Instance& instance, const PaymentScheme& payments);

// Strategy profiles as text: each agent's bids in type order joined by ',',
// agents joined by ';'. Example: "t1,t1;u2,u1".
std::string StrategyKey(const std::vector<std::vector<std::string>>& bid_sets,
                        const StrategyProfile& profile);
StrategyProfile ParseStrategyKey(const Instance& instance,
                                 const std::vector<std::vector<std::string>>& bid_sets,
                                 const std::string& key);

Json CertificateToJson(const Instance& instance, const StrongCertificate& certificate);
StrongCertificate ParseCertificate(const Instance& instance, const Json& doc);

Json RationalsToJson(const std::vector<Rational>& values);

}  // namespace mechcheck
