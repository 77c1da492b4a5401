#include "mechcheck/instance.h"

#include <set>

#include "mechcheck/error.h"

namespace mechcheck {

ProductSpace::ProductSpace(std::vector<int> radices) : radices_(std::move(radices)) {
  strides_.assign(radices_.size(), 1);
  size_ = 1;
  for (int p = static_cast<int>(radices_.size()) - 1; p >= 0; --p) {
    strides_[p] = size_;
    size_ *= static_cast<std::size_t>(radices_[p]);
  }
}

std::size_t ProductSpace::Encode(std::span<const int> digits) const {
  std::size_t index = 0;
  for (std::size_t p = 0; p < radices_.size(); ++p) index += strides_[p] * digits[p];
  return index;
}

std::vector<int> ProductSpace::Decode(std::size_t index) const {
  std::vector<int> digits(radices_.size());
  for (std::size_t p = 0; p < radices_.size(); ++p) digits[p] = Digit(index, static_cast<int>(p));
  return digits;
}

int ProductSpace::Digit(std::size_t index, int position) const {
  return static_cast<int>((index / strides_[position]) % radices_[position]);
}

namespace {

[[noreturn]] void Fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

void CheckLabels(const std::vector<std::string>& labels, const std::string& what) {
  if (labels.empty()) Fail(ErrorKind::kMissingEntry, what + " must not be empty");
  std::set<std::string> seen;
  for (const auto& label : labels) {
    if (label.empty() || label.find(',') != std::string::npos) {
      Fail(ErrorKind::kParse, what + " label '" + label + "' is empty or contains ','");
    }
    if (!seen.insert(label).second) {
      Fail(ErrorKind::kDuplicateLabel, "duplicate " + what + " label '" + label + "'");
    }
  }
}

}  // namespace

Instance Instance::Create(std::vector<std::string> outcomes,
                          std::vector<std::vector<std::string>> types,
                          std::optional<std::vector<Rational>> prior,
                          std::vector<std::vector<std::vector<Rational>>> valuations,
                          std::vector<int> scf) {
  if (types.empty()) Fail(ErrorKind::kMissingEntry, "instance needs at least one agent");
  CheckLabels(outcomes, "outcome");
  for (const auto& agent_types : types) CheckLabels(agent_types, "type");

  Instance inst;
  inst.outcomes_ = std::move(outcomes);
  inst.types_ = std::move(types);
  inst.BuildIndex();
  const std::size_t profile_count = inst.profile_count();
  const int n = inst.agent_count();

  if (prior.has_value()) {
    inst.prior_ = std::move(*prior);
    inst.prior_explicit_ = true;
  } else {
    if (n != 1) Fail(ErrorKind::kMissingEntry, "prior is required for more than one agent");
    inst.prior_.assign(profile_count, Rational(1, static_cast<std::int64_t>(profile_count)));
    inst.prior_explicit_ = false;
  }
  if (inst.prior_.size() != profile_count) {
    Fail(ErrorKind::kMissingEntry, "prior must cover every type profile");
  }
  Rational total;
  for (std::size_t t = 0; t < profile_count; ++t) {
    if (inst.prior_[t].sign() < 0) {
      Fail(ErrorKind::kNegativePrior, "negative prior on profile " + inst.ProfileKey(t));
    }
    total += inst.prior_[t];
  }
  if (total != Rational(1)) {
    Fail(ErrorKind::kPriorNotNormalized, "prior sums to " + total.ToString());
  }

  if (valuations.size() != static_cast<std::size_t>(n)) {
    Fail(ErrorKind::kMissingEntry, "valuations must be given for every agent");
  }
  for (const auto& per_agent : valuations) {
    if (per_agent.size() != inst.outcomes_.size()) {
      Fail(ErrorKind::kMissingEntry, "valuations must cover every outcome");
    }
    for (const auto& per_outcome : per_agent) {
      if (per_outcome.size() != profile_count) {
        Fail(ErrorKind::kMissingEntry, "valuations must cover every type profile");
      }
    }
  }
  inst.valuations_ = std::move(valuations);

  if (scf.size() != profile_count) Fail(ErrorKind::kMissingEntry, "scf must be total");
  for (int x : scf) {
    if (x < 0 || x >= inst.outcome_count()) Fail(ErrorKind::kUnknownLabel, "scf outcome out of range");
  }
  inst.scf_ = std::move(scf);

  for (int i = 0; i < n; ++i) {
    for (int own = 0; own < inst.type_count(i); ++own) {
      if (Marginal(inst, i, own).is_zero()) {
        Fail(ErrorKind::kZeroMarginal,
             "zero marginal probability for type '" + inst.types_[i][own] + "' of agent " +
                 std::to_string(i + 1));
      }
    }
  }
  return inst;
}

void Instance::BuildIndex() {
  const int n = agent_count();
  std::vector<int> radices;
  for (const auto& t : types_) radices.push_back(static_cast<int>(t.size()));
  profiles_ = ProductSpace(radices);

  co_spaces_.clear();
  co_of_.assign(n, std::vector<std::size_t>(profiles_.size()));
  combine_.assign(n, {});
  for (int i = 0; i < n; ++i) {
    std::vector<int> co_radices;
    for (int j = 0; j < n; ++j) {
      if (j != i) co_radices.push_back(radices[j]);
    }
    co_spaces_.emplace_back(co_radices);
    combine_[i].assign(co_spaces_[i].size() * radices[i], 0);
    for (std::size_t t = 0; t < profiles_.size(); ++t) {
      auto digits = profiles_.Decode(t);
      const int own = digits[i];
      digits.erase(digits.begin() + i);
      const std::size_t co = co_spaces_[i].Encode(digits);
      co_of_[i][t] = co;
      combine_[i][co * radices[i] + own] = t;
    }
  }
}

std::string Instance::ProfileKey(std::size_t profile) const {
  std::string key;
  for (int i = 0; i < agent_count(); ++i) {
    if (i > 0) key += ',';
    key += types_[i][TypeOf(profile, i)];
  }
  return key;
}

std::string Instance::CoProfileKey(int agent, std::size_t co_profile) const {
  std::string key;
  int position = 0;
  bool first = true;
  for (int j = 0; j < agent_count(); ++j) {
    if (j == agent) continue;
    if (!first) key += ',';
    key += types_[j][co_spaces_[agent].Digit(co_profile, position++)];
    first = false;
  }
  return key;
}

std::optional<std::size_t> Instance::FindProfile(const std::string& key) const {
  std::vector<int> digits;
  std::size_t start = 0;
  for (int i = 0; i < agent_count(); ++i) {
    const std::size_t end = (i + 1 == agent_count()) ? key.size() : key.find(',', start);
    if (end == std::string::npos) return std::nullopt;
    auto type = FindType(i, key.substr(start, end - start));
    if (!type) return std::nullopt;
    digits.push_back(*type);
    start = end + 1;
  }
  return profiles_.Encode(digits);
}

std::optional<int> Instance::FindType(int agent, const std::string& label) const {
  const auto& labels = types_[agent];
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] == label) return static_cast<int>(k);
  }
  return std::nullopt;
}

std::optional<int> Instance::FindOutcome(const std::string& label) const {
  for (std::size_t k = 0; k < outcomes_.size(); ++k) {
    if (outcomes_[k] == label) return static_cast<int>(k);
  }
  return std::nullopt;
}

namespace {

// Instance without numeric data, used only to resolve profile keys.
struct KeyResolver {
  std::vector<std::vector<std::string>> types;
  ProductSpace space;

  std::size_t Resolve(const std::string& key, const std::string& what) const {
    std::vector<int> digits;
    std::size_t start = 0;
    const int n = static_cast<int>(types.size());
    for (int i = 0; i < n; ++i) {
      std::size_t end = (i + 1 == n) ? key.size() : key.find(',', start);
      if (end == std::string::npos || (i + 1 == n && key.find(',', start) != std::string::npos)) {
        Fail(ErrorKind::kUnknownLabel, what + ": malformed profile key '" + key + "'");
      }
      const std::string label = key.substr(start, end - start);
      int found = -1;
      for (std::size_t k = 0; k < types[i].size(); ++k) {
        if (types[i][k] == label) found = static_cast<int>(k);
      }
      if (found < 0) Fail(ErrorKind::kUnknownLabel, what + ": unknown type '" + label + "'");
      digits.push_back(found);
      start = end + 1;
    }
    return space.Encode(digits);
  }
};

std::vector<Rational> ResolveProfileMap(const KeyResolver& resolver,
                                        const std::map<std::string, std::string>& values,
                                        const std::string& what) {
  std::vector<std::optional<Rational>> slots(resolver.space.size());
  for (const auto& [key, text] : values) {
    const std::size_t t = resolver.Resolve(key, what);
    slots[t] = Rational::Parse(text);
  }
  std::vector<Rational> out;
  out.reserve(slots.size());
  for (std::size_t t = 0; t < slots.size(); ++t) {
    if (!slots[t]) {
      auto digits = resolver.space.Decode(t);
      std::string key;
      for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i > 0) key += ',';
        key += resolver.types[i][digits[i]];
      }
      Fail(ErrorKind::kMissingEntry, what + ": missing profile '" + key + "'");
    }
    out.push_back(*slots[t]);
  }
  return out;
}

}  // namespace

Instance ValidateInstance(const RawInstance& raw) {
  if (raw.agents <= 0) Fail(ErrorKind::kMissingEntry, "agents must be positive");
  if (raw.types.size() != static_cast<std::size_t>(raw.agents)) {
    Fail(ErrorKind::kMissingEntry, "types must list one type space per agent");
  }
  CheckLabels(raw.outcomes, "outcome");
  for (const auto& t : raw.types) CheckLabels(t, "type");

  KeyResolver resolver;
  resolver.types = raw.types;
  std::vector<int> radices;
  for (const auto& t : raw.types) radices.push_back(static_cast<int>(t.size()));
  resolver.space = ProductSpace(radices);

  std::optional<std::vector<Rational>> prior;
  if (raw.prior) prior = ResolveProfileMap(resolver, *raw.prior, "prior");

  if (raw.valuations.size() != static_cast<std::size_t>(raw.agents)) {
    Fail(ErrorKind::kMissingEntry, "valuations must be given for every agent");
  }
  std::vector<std::vector<std::vector<Rational>>> valuations(raw.agents);
  for (int i = 0; i < raw.agents; ++i) {
    const auto& per_agent = raw.valuations[i];
    for (const auto& [label, _] : per_agent) {
      bool known = false;
      for (const auto& x : raw.outcomes) known = known || x == label;
      if (!known) Fail(ErrorKind::kUnknownLabel, "valuations: unknown outcome '" + label + "'");
    }
    for (const auto& x : raw.outcomes) {
      auto it = per_agent.find(x);
      if (it == per_agent.end()) {
        Fail(ErrorKind::kMissingEntry, "valuations: agent " + std::to_string(i + 1) +
                                           " lacks outcome '" + x + "'");
      }
      valuations[i].push_back(ResolveProfileMap(resolver, it->second, "valuations"));
    }
  }

  std::vector<std::optional<int>> scf_slots(resolver.space.size());
  for (const auto& [key, outcome] : raw.scf) {
    const std::size_t t = resolver.Resolve(key, "scf");
    int found = -1;
    for (std::size_t k = 0; k < raw.outcomes.size(); ++k) {
      if (raw.outcomes[k] == outcome) found = static_cast<int>(k);
    }
    if (found < 0) Fail(ErrorKind::kUnknownLabel, "scf: unknown outcome '" + outcome + "'");
    scf_slots[t] = found;
  }
  std::vector<int> scf;
  for (const auto& slot : scf_slots) {
    if (!slot) Fail(ErrorKind::kMissingEntry, "scf must be total over type profiles");
    scf.push_back(*slot);
  }

  return Instance::Create(raw.outcomes, raw.types, std::move(prior), std::move(valuations),
                          std::move(scf));
}

RawInstance ToRaw(const Instance& instance) {
  RawInstance raw;
  raw.agents = instance.agent_count();
  raw.outcomes = instance.outcomes();
  raw.types = instance.types();
  if (instance.prior_explicit()) {
    std::map<std::string, std::string> prior;
    for (std::size_t t = 0; t < instance.profile_count(); ++t) {
      prior[instance.ProfileKey(t)] = instance.prior(t).ToString();
    }
    raw.prior = std::move(prior);
  }
  raw.valuations.resize(raw.agents);
  for (int i = 0; i < raw.agents; ++i) {
    for (int x = 0; x < instance.outcome_count(); ++x) {
      auto& row = raw.valuations[i][instance.outcomes()[x]];
      for (std::size_t t = 0; t < instance.profile_count(); ++t) {
        row[instance.ProfileKey(t)] = instance.valuation(i, x, t).ToString();
      }
    }
  }
  for (std::size_t t = 0; t < instance.profile_count(); ++t) {
    raw.scf[instance.ProfileKey(t)] = instance.outcomes()[instance.scf(t)];
  }
  return raw;
}

Rational Marginal(const Instance& instance, int agent, int own_type) {
  Rational total;
  for (std::size_t co = 0; co < instance.co_profile_count(agent); ++co) {
    total += instance.prior(instance.Combine(agent, co, own_type));
  }
  return total;
}

Beliefs ConditionalBeliefs(const Instance& instance) {
  std::vector<std::vector<std::vector<Rational>>> table(instance.agent_count());
  for (int i = 0; i < instance.agent_count(); ++i) {
    for (int own = 0; own < instance.type_count(i); ++own) {
      const Rational marginal = Marginal(instance, i, own);
      std::vector<Rational> row;
      row.reserve(instance.co_profile_count(i));
      for (std::size_t co = 0; co < instance.co_profile_count(i); ++co) {
        row.push_back(instance.prior(instance.Combine(i, co, own)) / marginal);
      }
      table[i].push_back(std::move(row));
    }
  }
  return Beliefs(std::move(table));
}

bool IsProductPrior(const Instance& instance) {
  std::vector<std::vector<Rational>> marginals(instance.agent_count());
  for (int i = 0; i < instance.agent_count(); ++i) {
    for (int own = 0; own < instance.type_count(i); ++own) {
      marginals[i].push_back(Marginal(instance, i, own));
    }
  }
  for (std::size_t t = 0; t < instance.profile_count(); ++t) {
    Rational product(1);
    for (int i = 0; i < instance.agent_count(); ++i) product *= marginals[i][instance.TypeOf(t, i)];
    if (product != instance.prior(t)) return false;
  }
  return true;
}

}  // namespace mechcheck
