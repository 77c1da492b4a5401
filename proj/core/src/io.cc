#include "mechcheck/io.h"

#include <fstream>
#include <map>
#include <sstream>

#include "mechcheck/error.h"

namespace mechcheck {
namespace {

[[noreturn]] void ParseFail(const std::string& message) { throw Error(ErrorKind::kParse, message); }

const Json& Member(const Json& doc, const char* key) {
  if (!doc.is_object()) ParseFail("expected a JSON object");
  auto it = doc.find(key);
  if (it == doc.end()) ParseFail(std::string("missing key '") + key + "'");
  return *it;
}

std::string Text(const Json& value, const std::string& what) {
  if (!value.is_string()) ParseFail(what + ": expected a string");
  return value.get<std::string>();
}

// Rationals are strings; plain JSON integers are accepted as well.
std::string RationalText(const Json& value, const std::string& what) {
  if (value.is_number_integer()) return value.dump();
  return Text(value, what);
}

Rational ParseRational(const Json& value, const std::string& what) {
  return Rational::Parse(RationalText(value, what));
}

std::vector<std::string> Labels(const Json& value, const std::string& what) {
  if (!value.is_array()) ParseFail(what + ": expected an array of labels");
  std::vector<std::string> labels;
  for (const auto& item : value) labels.push_back(Text(item, what));
  return labels;
}

std::map<std::string, std::string> RationalMap(const Json& value, const std::string& what) {
  if (!value.is_object()) ParseFail(what + ": expected an object");
  std::map<std::string, std::string> out;
  for (const auto& [key, item] : value.items()) out[key] = RationalText(item, what);
  return out;
}

int AgentNumber(const Json& value, int agents) {
  if (!value.is_number_integer()) ParseFail("agent: expected an integer");
  const int agent = value.get<int>();
  if (agent < 1 || agent > agents) throw Error(ErrorKind::kUnknownLabel, "agent out of range");
  return agent - 1;
}

int TypeIndex(const Instance& instance, int agent, const Json& value, const std::string& what) {
  auto type = instance.FindType(agent, Text(value, what));
  if (!type) throw Error(ErrorKind::kUnknownLabel, what + ": unknown type '" + value.get<std::string>() + "'");
  return *type;
}

std::size_t CoProfileIndex(const Instance& instance, int agent, const std::string& key) {
  for (std::size_t c = 0; c < instance.co_profile_count(agent); ++c) {
    if (instance.CoProfileKey(agent, c) == key) return c;
  }
  throw Error(ErrorKind::kUnknownLabel, "unknown co-profile '" + key + "'");
}

// Per-agent payments keyed by profile; `find` resolves a key to its index.
template <typename Find>
std::vector<std::vector<Rational>> ParsePaymentTable(const Json& doc, int agents, std::size_t profiles,
                                                     Find find) {
  if (!doc.is_object()) ParseFail("payments: expected an object");
  std::vector<std::vector<std::optional<Rational>>> slots(agents,
                                                          std::vector<std::optional<Rational>>(profiles));
  for (const auto& [key, value] : doc.items()) {
    const std::optional<std::size_t> profile = find(key);
    if (!profile) throw Error(ErrorKind::kUnknownLabel, "payments: unknown profile '" + key + "'");
    if (agents == 1 && !value.is_array()) {
      slots[0][*profile] = ParseRational(value, "payments");
      continue;
    }
    if (!value.is_array() || value.size() != static_cast<std::size_t>(agents)) {
      ParseFail("payments: '" + key + "' needs one entry per agent");
    }
    for (int i = 0; i < agents; ++i) slots[i][*profile] = ParseRational(value[i], "payments");
  }
  std::vector<std::vector<Rational>> table(agents);
  for (int i = 0; i < agents; ++i) {
    for (auto& slot : slots[i]) {
      if (!slot) throw Error(ErrorKind::kMissingEntry, "payments must be total over profiles");
      table[i].push_back(*slot);
    }
  }
  return table;
}

template <typename KeyOf>
Json PaymentTableToJson(const std::vector<std::vector<Rational>>& table, std::size_t profiles,
                        KeyOf key_of) {
  Json out = Json::object();
  for (std::size_t b = 0; b < profiles; ++b) {
    if (table.size() == 1) {
      out[key_of(b)] = table[0][b].ToString();
      continue;
    }
    Json row = Json::array();
    for (const auto& agent : table) row.push_back(agent[b].ToString());
    out[key_of(b)] = std::move(row);
  }
  return out;
}

const Json& Unwrap(const Json& doc, const char* key) {
  if (doc.is_object() && doc.contains(key)) return doc.at(key);
  return doc;
}

std::vector<std::string> Split(const std::string& text, char separator) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = text.find(separator, start);
    parts.push_back(text.substr(start, end - start));
    if (end == std::string::npos) return parts;
    start = end + 1;
  }
}

}  // namespace

Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) ParseFail("cannot read '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseJsonText(buffer.str());
}

Json ParseJsonText(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    ParseFail(std::string("malformed JSON: ") + e.what());
  }
}

RawInstance ParseRawInstance(const Json& doc) {
  RawInstance raw;
  const Json& agents = Member(doc, "agents");
  if (!agents.is_number_integer()) ParseFail("agents: expected an integer");
  raw.agents = agents.get<int>();
  raw.outcomes = Labels(Member(doc, "outcomes"), "outcomes");
  const Json& types = Member(doc, "types");
  if (!types.is_array()) ParseFail("types: expected an array");
  for (const auto& t : types) raw.types.push_back(Labels(t, "types"));
  if (auto it = doc.find("prior"); it != doc.end()) raw.prior = RationalMap(*it, "prior");
  const Json& valuations = Member(doc, "valuations");
  if (!valuations.is_array()) ParseFail("valuations: expected an array");
  for (const auto& per_agent : valuations) {
    if (!per_agent.is_object()) ParseFail("valuations: expected an object per agent");
    auto& row = raw.valuations.emplace_back();
    for (const auto& [outcome, table] : per_agent.items()) row[outcome] = RationalMap(table, "valuations");
  }
  const Json& scf = Member(doc, "scf");
  if (!scf.is_object()) ParseFail("scf: expected an object");
  for (const auto& [key, value] : scf.items()) raw.scf[key] = Text(value, "scf");
  return raw;
}

Instance ParseInstance(const Json& doc) { return ValidateInstance(ParseRawInstance(doc)); }

Json InstanceToJson(const Instance& instance) {
  Json doc;
  doc["agents"] = instance.agent_count();
  doc["outcomes"] = instance.outcomes();
  doc["types"] = instance.types();
  if (instance.prior_explicit()) {
    Json prior = Json::object();
    for (std::size_t t = 0; t < instance.profile_count(); ++t) {
      prior[instance.ProfileKey(t)] = instance.prior(t).ToString();
    }
    doc["prior"] = std::move(prior);
  }
  Json valuations = Json::array();
  for (int i = 0; i < instance.agent_count(); ++i) {
    Json per_agent = Json::object();
    for (int x = 0; x < instance.outcome_count(); ++x) {
      Json row = Json::object();
      for (std::size_t t = 0; t < instance.profile_count(); ++t) {
        row[instance.ProfileKey(t)] = instance.valuation(i, x, t).ToString();
      }
      per_agent[instance.outcomes()[x]] = std::move(row);
    }
    valuations.push_back(std::move(per_agent));
  }
  doc["valuations"] = std::move(valuations);
  Json scf = Json::object();
  for (std::size_t t = 0; t < instance.profile_count(); ++t) {
    scf[instance.ProfileKey(t)] = instance.outcomes()[instance.scf(t)];
  }
  doc["scf"] = std::move(scf);
  return doc;
}

Mechanism ParseMechanism(const Instance& instance, const Json& doc) {
  if (!doc.is_object()) ParseFail("mechanism: expected an object");
  if (!doc.contains("bids")) {
    const PaymentScheme payments = ParsePayments(instance, Member(doc, "payments"));
    return Mechanism::Direct(instance, payments);
  }
  const Json& bids = Member(doc, "bids");
  if (!bids.is_array()) ParseFail("bids: expected an array");
  std::vector<std::vector<std::string>> bid_sets;
  for (const auto& b : bids) bid_sets.push_back(Labels(b, "bids"));
  if (bid_sets.size() != static_cast<std::size_t>(instance.agent_count())) {
    throw Error(ErrorKind::kDimensionMismatch, "bids: one bid set per agent expected");
  }
  // Outcomes are resolved against a shell mechanism that only fixes the bid sets.
  std::vector<int> radices;
  for (const auto& b : bid_sets) {
    if (b.empty()) throw Error(ErrorKind::kMissingEntry, "bids: empty bid set");
    radices.push_back(static_cast<int>(b.size()));
  }
  const ProductSpace space(radices);
  const Mechanism shell = Mechanism::Create(
      instance, bid_sets, std::vector<int>(space.size(), 0),
      std::vector<std::vector<Rational>>(instance.agent_count(), std::vector<Rational>(space.size())));
  auto find = [&](const std::string& key) { return shell.FindProfile(key); };

  const Json& outcome = Member(doc, "outcome");
  if (!outcome.is_object()) ParseFail("outcome: expected an object");
  std::vector<std::optional<int>> slots(space.size());
  for (const auto& [key, value] : outcome.items()) {
    auto profile = find(key);
    if (!profile) throw Error(ErrorKind::kUnknownLabel, "outcome: unknown bid profile '" + key + "'");
    auto x = instance.FindOutcome(Text(value, "outcome"));
    if (!x) throw Error(ErrorKind::kUnknownLabel, "outcome: unknown outcome '" + value.get<std::string>() + "'");
    slots[*profile] = *x;
  }
  std::vector<int> outcomes;
  for (const auto& slot : slots) {
    if (!slot) throw Error(ErrorKind::kMissingEntry, "outcome must be total over bid profiles");
    outcomes.push_back(*slot);
  }
  auto payments = ParsePaymentTable(Member(doc, "payments"), instance.agent_count(), space.size(), find);
  return Mechanism::Create(instance, std::move(bid_sets), std::move(outcomes), std::move(payments));
}

Json MechanismToJson(const Mechanism& mechanism, const Instance& instance) {
  Json doc;
  doc["bids"] = mechanism.bid_sets();
  Json outcome = Json::object();
  for (std::size_t b = 0; b < mechanism.profile_count(); ++b) {
    outcome[mechanism.ProfileKey(b)] = instance.outcomes()[mechanism.outcome(b)];
  }
  doc["outcome"] = std::move(outcome);
  doc["payments"] = PaymentTableToJson(mechanism.payments(), mechanism.profile_count(),
                                       [&](std::size_t b) { return mechanism.ProfileKey(b); });
  return doc;
}

PaymentScheme ParsePayments(const Instance& instance, const Json& doc) {
  return ParsePaymentTable(Unwrap(doc, "payments"), instance.agent_count(), instance.profile_count(),
                           [&](const std::string& key) { return instance.FindProfile(key); });
}

Json PaymentsToJson(const Instance& instance, const PaymentScheme& payments) {
  return PaymentTableToJson(payments, instance.profile_count(),
                            [&](std::size_t t) { return instance.ProfileKey(t); });
}

std::string StrategyKey(const std::vector<std::vector<std::string>>& bid_sets,
                        const StrategyProfile& profile) {
  std::string key;
  for (std::size_t i = 0; i < profile.bids.size(); ++i) {
    if (i > 0) key += ';';
    for (std::size_t t = 0; t < profile.bids[i].size(); ++t) {
      if (t > 0) key += ',';
      key += bid_sets[i][profile.bids[i][t]];
    }
  }
  return key;
}

StrategyProfile ParseStrategyKey(const Instance& instance,
                                 const std::vector<std::vector<std::string>>& bid_sets,
                                 const std::string& key) {
  const std::vector<std::string> agents = Split(key, ';');
  if (agents.size() != static_cast<std::size_t>(instance.agent_count())) {
    ParseFail("strategy '" + key + "': one bid list per agent expected");
  }
  StrategyProfile profile;
  for (int i = 0; i < instance.agent_count(); ++i) {
    const std::vector<std::string> bids = Split(agents[i], ',');
    if (bids.size() != static_cast<std::size_t>(instance.type_count(i))) {
      ParseFail("strategy '" + key + "': one bid per type expected");
    }
    auto& row = profile.bids.emplace_back();
    for (const auto& label : bids) {
      auto it = std::find(bid_sets[i].begin(), bid_sets[i].end(), label);
      if (it == bid_sets[i].end()) throw Error(ErrorKind::kUnknownLabel, "unknown bid '" + label + "'");
      row.push_back(static_cast<int>(it - bid_sets[i].begin()));
    }
  }
  return profile;
}

Json CertificateToJson(const Instance& instance, const StrongCertificate& certificate) {
  const StrategySpace space = StrategySpace::Direct(instance);
  const auto& types = instance.types();
  Json doc;
  doc["payments"] = PaymentsToJson(instance, certificate.payments);
  Json labeling = Json::array();
  for (std::size_t k = 0; k < certificate.labeling.labels.size(); ++k) {
    const ProfileLabel& label = certificate.labeling.labels[k];
    Json entry;
    entry["profile"] = StrategyKey(types, space.Decode(k));
    entry["equilibrium"] = label.equilibrium;
    if (label.witness) {
      const Witness& w = *label.witness;
      entry["witness"] = {{"agent", w.agent + 1},
                          {"type", types[w.agent][w.type]},
                          {"deviation", types[w.agent][w.deviation]}};
    }
    labeling.push_back(std::move(entry));
  }
  doc["labeling"] = std::move(labeling);
  Json plan = Json::array();
  Json elimination = Json::object();
  for (std::size_t e = 0; e < certificate.plan.entries.size(); ++e) {
    const PlanEntry& p = certificate.plan.entries[e];
    const std::string key = StrategyKey(types, space.Decode(p.profile));
    Json flag = Json::object();
    Json pay = Json::object();
    for (std::size_t c = 0; c < p.flag_outcome.size(); ++c) {
      flag[instance.CoProfileKey(p.agent, c)] = instance.outcomes()[p.flag_outcome[c]];
      pay[instance.CoProfileKey(p.agent, c)] = certificate.elimination_payments[e][c].ToString();
    }
    plan.push_back({{"profile", key},
                    {"agent", p.agent + 1},
                    {"threatenedType", types[p.agent][p.threatened_type]},
                    {"flagOutcome", std::move(flag)}});
    elimination[key] = std::move(pay);
  }
  doc["eliminationPlan"] = std::move(plan);
  doc["eliminationPayments"] = std::move(elimination);
  doc["strictSlack"] = certificate.strict_slack.ToString();
  return doc;
}

StrongCertificate ParseCertificate(const Instance& instance, const Json& doc) {
  const StrategySpace space = StrategySpace::Direct(instance);
  const auto& types = instance.types();
  const int n = instance.agent_count();
  StrongCertificate cert;
  cert.payments = ParsePayments(instance, Member(doc, "payments"));

  const Json& labeling = Member(doc, "labeling");
  if (!labeling.is_array()) ParseFail("labeling: expected an array");
  std::vector<std::optional<ProfileLabel>> labels(space.size());
  for (const auto& entry : labeling) {
    const std::size_t k = space.Encode(ParseStrategyKey(instance, types, Text(Member(entry, "profile"), "profile")));
    if (labels[k]) ParseFail("labeling: duplicate profile");
    ProfileLabel label;
    const Json& eq = Member(entry, "equilibrium");
    if (!eq.is_boolean()) ParseFail("equilibrium: expected a boolean");
    label.equilibrium = eq.get<bool>();
    if (auto it = entry.find("witness"); it != entry.end()) {
      Witness w;
      w.agent = AgentNumber(Member(*it, "agent"), n);
      w.type = TypeIndex(instance, w.agent, Member(*it, "type"), "witness");
      w.deviation = TypeIndex(instance, w.agent, Member(*it, "deviation"), "witness");
      label.witness = w;
    }
    labels[k] = label;
  }
  for (auto& label : labels) {
    if (!label) throw Error(ErrorKind::kIncompleteLabeling, "labeling must cover every strategy profile");
    cert.labeling.labels.push_back(*label);
  }

  const Json& plan = Member(doc, "eliminationPlan");
  if (!plan.is_array()) ParseFail("eliminationPlan: expected an array");
  const Json& elimination = Member(doc, "eliminationPayments");
  if (!elimination.is_object()) ParseFail("eliminationPayments: expected an object");
  std::map<std::size_t, std::pair<PlanEntry, std::vector<Rational>>> entries;
  for (const auto& entry : plan) {
    const std::string key = Text(Member(entry, "profile"), "profile");
    PlanEntry p;
    p.profile = space.Encode(ParseStrategyKey(instance, types, key));
    p.agent = AgentNumber(Member(entry, "agent"), n);
    p.threatened_type = TypeIndex(instance, p.agent, Member(entry, "threatenedType"), "threatenedType");
    const std::size_t co_count = instance.co_profile_count(p.agent);
    std::vector<std::optional<int>> flag(co_count);
    const Json& flag_doc = Member(entry, "flagOutcome");
    if (!flag_doc.is_object()) ParseFail("flagOutcome: expected an object");
    for (const auto& [co_key, value] : flag_doc.items()) {
      auto x = instance.FindOutcome(Text(value, "flagOutcome"));
      if (!x) throw Error(ErrorKind::kUnknownLabel, "flagOutcome: unknown outcome");
      flag[CoProfileIndex(instance, p.agent, co_key)] = *x;
    }
    std::vector<std::optional<Rational>> pay(co_count);
    auto it = elimination.find(key);
    if (it == elimination.end()) throw Error(ErrorKind::kMissingPlanEntry, "no elimination payments for '" + key + "'");
    if (!it->is_object()) ParseFail("eliminationPayments: expected an object per profile");
    for (const auto& [co_key, value] : it->items()) {
      pay[CoProfileIndex(instance, p.agent, co_key)] = ParseRational(value, "eliminationPayments");
    }
    std::vector<Rational> resolved;
    for (std::size_t c = 0; c < co_count; ++c) {
      if (!flag[c] || !pay[c]) throw Error(ErrorKind::kMissingEntry, "plan entry must cover every co-profile");
      p.flag_outcome.push_back(*flag[c]);
      resolved.push_back(*pay[c]);
    }
    if (entries.contains(p.profile)) ParseFail("eliminationPlan: duplicate profile");
    entries.emplace(p.profile, std::make_pair(std::move(p), std::move(resolved)));
  }
  for (auto& [_, entry] : entries) {
    cert.plan.entries.push_back(std::move(entry.first));
    cert.elimination_payments.push_back(std::move(entry.second));
  }
  cert.strict_slack = ParseRational(Member(doc, "strictSlack"), "strictSlack");
  return cert;
}

Json RationalsToJson(const std::vector<Rational>& values) {
  Json out = Json::array();
  for (const auto& v : values) out.push_back(v.ToString());
  return out;
}

}  // namespace mechcheck
