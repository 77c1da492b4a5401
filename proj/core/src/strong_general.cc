#include "mechcheck/strong_general.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <variant>

#include "mechcheck/affine.h"
#include "mechcheck/error.h"

namespace mechcheck {

bool IsBadProfile(const Instance& instance, const StrategyProfile& profile) {
  for (std::size_t theta = 0; theta < instance.profile_count(); ++theta) {
    std::vector<int> reported(instance.agent_count());
    for (int j = 0; j < instance.agent_count(); ++j) {
      reported[j] = profile.bid(j, instance.TypeOf(theta, j));
    }
    if (instance.scf(instance.profiles().Encode(reported)) != instance.scf(theta)) return true;
  }
  return false;
}

int PaymentVariable(const Instance& instance, int agent, std::size_t profile) {
  return agent * static_cast<int>(instance.profile_count()) + static_cast<int>(profile);
}

std::vector<int> EliminationBlockOffsets(const Instance& instance, const EliminationPlan& plan) {
  std::vector<int> offsets;
  int next = instance.agent_count() * static_cast<int>(instance.profile_count());
  for (const auto& entry : plan.entries) {
    offsets.push_back(next);
    next += static_cast<int>(instance.co_profile_count(entry.agent));
  }
  return offsets;
}

namespace {

// Expected flag utility of `agent` of type `type` when the others follow
// `profile`; the flag pays variable flag_base + c at reported co-profile c.
AffineForm FlagUtility(const Instance& instance, const Beliefs& beliefs,
                       const StrategyProfile& profile, int agent, int type,
                       const std::vector<int>& flag_outcome, int flag_base) {
  AffineForm form;
  for (std::size_t co = 0; co < instance.co_profile_count(agent); ++co) {
    const Rational& weight = beliefs(agent, type, co);
    if (weight.is_zero()) continue;
    const std::size_t theta = instance.Combine(agent, co, type);
    const std::size_t reported_co =
        instance.CoProfileOf(ReportedProfile(instance, profile, agent, co, 0), agent);
    form.constant += weight * instance.valuation(agent, flag_outcome[reported_co], theta);
    form.AddTerm(flag_base + static_cast<int>(reported_co), weight);
  }
  return form;
}

// Strict flag-gain row at the threatened type, then one truthful no-gain row
// per type of the flagging agent.
void AppendEliminationRows(const Instance& instance, const Beliefs& beliefs,
                           const StrategyProfile& profile, const PlanEntry& entry,
                           int payment_base, int flag_base, LinearSystem& system) {
  const int i = entry.agent;
  const int threatened = entry.threatened_type;
  const AffineForm played = DirectUtility(instance, beliefs, profile, i, threatened,
                                          profile.bid(i, threatened), payment_base);
  const AffineForm flag =
      FlagUtility(instance, beliefs, profile, i, threatened, entry.flag_outcome, flag_base);
  system.Add(DifferenceRow(played, flag, Relation::kLess));

  const StrategyProfile truthful = TruthfulProfile(instance);
  for (int type = 0; type < instance.type_count(i); ++type) {
    const AffineForm honest = DirectUtility(instance, beliefs, truthful, i, type, type, payment_base);
    const AffineForm flag_truthful =
        FlagUtility(instance, beliefs, truthful, i, type, entry.flag_outcome, flag_base);
    system.Add(DifferenceRow(flag_truthful, honest, Relation::kLessEqual));
  }
}

void ValidateEntry(const Instance& instance, const PlanEntry& entry) {
  const bool ok = entry.agent >= 0 && entry.agent < instance.agent_count() &&
                  entry.threatened_type >= 0 &&
                  entry.threatened_type < instance.type_count(entry.agent) &&
                  entry.flag_outcome.size() == instance.co_profile_count(entry.agent) &&
                  std::all_of(entry.flag_outcome.begin(), entry.flag_outcome.end(), [&](int x) {
                    return x >= 0 && x < instance.outcome_count();
                  });
  if (!ok) throw Error(ErrorKind::kContractViolation, "malformed elimination plan entry");
}

Rational Evaluate(const AffineForm& form, const std::vector<Rational>& point) {
  Rational value = form.constant;
  for (const auto& [var, coeff] : form.coefficients) value += coeff * point[var];
  return value;
}

std::vector<Rational> FlattenPoint(const Instance& instance, const StrongCertificate& cert) {
  std::vector<Rational> point;
  for (int i = 0; i < instance.agent_count(); ++i) {
    for (const auto& value : cert.payments[i]) point.push_back(value);
  }
  for (const auto& block : cert.elimination_payments) {
    for (const auto& value : block) point.push_back(value);
  }
  return point;
}

}  // namespace

LinearSystem BuildSystem(const Instance& instance, const Beliefs& beliefs,
                         const Labeling& labeling, const EliminationPlan& plan) {
  const StrategySpace space = StrategySpace::Direct(instance);
  if (labeling.labels.size() != space.size()) {
    throw Error(ErrorKind::kIncompleteLabeling, "labeling must cover every strategy profile");
  }
  const std::size_t truthful_index = space.Encode(TruthfulProfile(instance));
  if (!labeling.labels[truthful_index].equilibrium) {
    throw Error(ErrorKind::kContractViolation, "truthful profile must be labeled an equilibrium");
  }
  for (const auto& entry : plan.entries) ValidateEntry(instance, entry);
  for (std::size_t e = 1; e < plan.entries.size(); ++e) {
    if (plan.entries[e - 1].profile >= plan.entries[e].profile) {
      throw Error(ErrorKind::kContractViolation, "plan entries must be sorted by profile");
    }
  }

  int variables = instance.agent_count() * static_cast<int>(instance.profile_count());
  for (const auto& entry : plan.entries) {
    variables += static_cast<int>(instance.co_profile_count(entry.agent));
  }
  LinearSystem system(variables);
  const int stride = static_cast<int>(instance.profile_count());

  std::vector<std::size_t> bad;
  for (std::size_t k = 0; k < space.size(); ++k) {
    const StrategyProfile alpha = space.Decode(k);
    const ProfileLabel& label = labeling.labels[k];
    if (label.equilibrium) {
      for (int i = 0; i < instance.agent_count(); ++i) {
        for (int type = 0; type < instance.type_count(i); ++type) {
          const int played = alpha.bid(i, type);
          const AffineForm current = DirectUtility(instance, beliefs, alpha, i, type, played, i * stride);
          for (int other = 0; other < instance.type_count(i); ++other) {
            if (other == played) continue;
            system.Add(DifferenceRow(
                DirectUtility(instance, beliefs, alpha, i, type, other, i * stride), current,
                Relation::kLessEqual));
          }
        }
      }
      if (IsBadProfile(instance, alpha)) bad.push_back(k);
      continue;
    }
    if (!label.witness) {
      throw Error(ErrorKind::kIncompleteLabeling,
                  "non-equilibrium profile " + std::to_string(k) + " lacks a witness");
    }
    const Witness& w = *label.witness;
    if (w.agent < 0 || w.agent >= instance.agent_count() || w.type < 0 ||
        w.type >= instance.type_count(w.agent) || w.deviation < 0 ||
        w.deviation >= instance.type_count(w.agent) || w.deviation == alpha.bid(w.agent, w.type)) {
      throw Error(ErrorKind::kContractViolation, "invalid witness at profile " + std::to_string(k));
    }
    const int base = w.agent * stride;
    system.Add(DifferenceRow(
        DirectUtility(instance, beliefs, alpha, w.agent, w.type, alpha.bid(w.agent, w.type), base),
        DirectUtility(instance, beliefs, alpha, w.agent, w.type, w.deviation, base),
        Relation::kLess));
  }

  const std::vector<int> offsets = EliminationBlockOffsets(instance, plan);
  std::size_t next_entry = 0;
  for (std::size_t k : bad) {
    if (next_entry >= plan.entries.size() || plan.entries[next_entry].profile != k) {
      throw Error(ErrorKind::kMissingPlanEntry,
                  "no elimination plan for bad equilibrium " + std::to_string(k));
    }
    const PlanEntry& entry = plan.entries[next_entry];
    AppendEliminationRows(instance, beliefs, space.Decode(k), entry, entry.agent * stride,
                          offsets[next_entry], system);
    ++next_entry;
  }
  if (next_entry != plan.entries.size()) {
    throw Error(ErrorKind::kContractViolation, "plan entry for a profile that is not a bad equilibrium");
  }
  return system;
}

bool SelectivelyEliminable(const Instance& instance, const Beliefs& beliefs,
                           const PaymentScheme& payments, const StrategyProfile& profile,
                           const PlanEntry& entry,
                           const std::vector<Rational>& elimination_payments) {
  ValidateEntry(instance, entry);
  const int i = entry.agent;
  const int types = static_cast<int>(instance.profile_count());
  if (elimination_payments.size() != instance.co_profile_count(i)) {
    throw Error(ErrorKind::kDimensionMismatch, "one elimination payment per co-profile expected");
  }
  std::vector<Rational> point = payments[i];
  point.insert(point.end(), elimination_payments.begin(), elimination_payments.end());

  const int threatened = entry.threatened_type;
  const Rational played = Evaluate(
      DirectUtility(instance, beliefs, profile, i, threatened, profile.bid(i, threatened), 0), point);
  const Rational flag = Evaluate(
      FlagUtility(instance, beliefs, profile, i, threatened, entry.flag_outcome, types), point);
  if (!(flag > played)) return false;

  const StrategyProfile truthful = TruthfulProfile(instance);
  for (int type = 0; type < instance.type_count(i); ++type) {
    const Rational honest = Evaluate(DirectUtility(instance, beliefs, truthful, i, type, type, 0), point);
    const Rational flag_truthful = Evaluate(
        FlagUtility(instance, beliefs, truthful, i, type, entry.flag_outcome, types), point);
    if (flag_truthful > honest) return false;
  }
  return true;
}

bool VerifyCertificate(const Instance& instance, const Beliefs& beliefs,
                       const StrongCertificate& cert) {
  if (cert.payments.size() != static_cast<std::size_t>(instance.agent_count())) return false;
  for (const auto& row : cert.payments) {
    if (row.size() != instance.profile_count()) return false;
  }
  if (cert.elimination_payments.size() != cert.plan.entries.size()) return false;
  if (cert.strict_slack.sign() <= 0) return false;
  try {
    const StrategySpace space = StrategySpace::Direct(instance);
    if (cert.labeling.labels.size() != space.size()) return false;
    if (!IsIncentiveCompatible(instance, beliefs, cert.payments)) return false;

    const Mechanism direct = Mechanism::Direct(instance, cert.payments);
    std::set<std::size_t> actual;
    for (const auto& report : EnumerateEquilibria(instance, beliefs, direct)) {
      actual.insert(space.Encode(report.profile));
    }
    for (std::size_t k = 0; k < space.size(); ++k) {
      if (cert.labeling.labels[k].equilibrium != actual.contains(k)) return false;
    }

    for (std::size_t e = 0; e < cert.plan.entries.size(); ++e) {
      const PlanEntry& entry = cert.plan.entries[e];
      if (entry.profile >= space.size()) return false;
      if (!SelectivelyEliminable(instance, beliefs, cert.payments, space.Decode(entry.profile), entry,
                                 cert.elimination_payments[e])) {
        return false;
      }
    }

    const LinearSystem system = BuildSystem(instance, beliefs, cert.labeling, cert.plan);
    const std::vector<Rational> point = FlattenPoint(instance, cert);
    if (!CheckPoint(system, point)) return false;
    return MinStrictSlack(system, point) >= cert.strict_slack;
  } catch (const Error&) {
    return false;
  }
}

namespace {

struct LimitHit {
  std::string which;
};

// Shared counters and limits of one DecideStrong call.
class Budget {
 public:
  explicit Budget(const SearchLimits& limits)
      : limits_(limits), start_(std::chrono::steady_clock::now()) {}

  void Branch() {
    const std::size_t count = branches_.fetch_add(1, std::memory_order_relaxed) + 1;
    if (count > limits_.max_branches) throw LimitHit{"branches"};
    if ((count & 0xff) == 0) CheckTime();
  }
  void Solve() { lp_solves_.fetch_add(1, std::memory_order_relaxed); }
  void CheckTime() const {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
    if (elapsed.count() > limits_.max_seconds) throw LimitHit{"seconds"};
  }

  std::size_t branches() const { return branches_.load(); }
  std::size_t lp_solves() const { return lp_solves_.load(); }

 private:
  SearchLimits limits_;
  std::chrono::steady_clock::time_point start_;
  std::atomic<std::size_t> branches_{0};
  std::atomic<std::size_t> lp_solves_{0};
};

std::optional<std::vector<Rational>> Feasible(const LinearSystem& system, Budget& budget) {
  budget.Solve();
  auto outcome = SolveMixedSystem(system);
  if (auto* feasible = std::get_if<StrictlyFeasible>(&outcome)) return std::move(feasible->point);
  return std::nullopt;
}

// One agent's view of the direct mechanism: its own strategies versus the
// joint strategies of everybody else ("co-strategies").
struct AgentView {
  int agent = 0;
  int types = 0;
  std::size_t co_strategies = 0;
  std::size_t truthful_co = 0;
  std::vector<std::size_t> co_of;          // per global profile
  std::vector<StrategyProfile> co_rep;     // others' strategies per co-strategy
  std::vector<std::vector<AffineForm>> forms;  // [co * types + type][report]
};

struct Pattern {
  std::vector<std::uint32_t> masks;  // argmax set per (co-strategy, type)
  LinearSystem rows;                 // over the agent's |Theta| payments
  std::vector<Rational> point;
  std::vector<char> best_response;   // per global profile
};

AgentView MakeView(const Instance& instance, const Beliefs& beliefs, const StrategySpace& space,
                   int agent) {
  AgentView view;
  view.agent = agent;
  view.types = instance.type_count(agent);
  const int stride = 0;
  std::map<std::vector<std::vector<int>>, std::size_t> co_index;
  view.co_of.resize(space.size());
  for (std::size_t k = 0; k < space.size(); ++k) {
    StrategyProfile alpha = space.Decode(k);
    auto others = alpha.bids;
    others[agent].clear();
    auto [it, inserted] = co_index.try_emplace(others, co_index.size());
    if (inserted) {
      for (int t = 0; t < view.types; ++t) alpha.bids[agent][t] = t;
      view.co_rep.push_back(alpha);
    }
    view.co_of[k] = it->second;
  }
  view.co_strategies = view.co_rep.size();
  const StrategyProfile truthful = TruthfulProfile(instance);
  for (std::size_t c = 0; c < view.co_strategies; ++c) {
    if (view.co_rep[c] == truthful) view.truthful_co = c;
    for (int type = 0; type < view.types; ++type) {
      std::vector<AffineForm> per_report;
      for (int report = 0; report < view.types; ++report) {
        per_report.push_back(DirectUtility(instance, beliefs, view.co_rep[c], agent, type, report, stride));
      }
      view.forms.push_back(std::move(per_report));
    }
  }
  return view;
}

// Depth-first enumeration of every realizable best-response pattern of one
// agent. The argmax set realized by the current feasible point is tried
// first and needs no LP; the remaining subsets follow in bitmask order.
class PatternSearch {
 public:
  PatternSearch(const Instance& instance, const StrategySpace& space, const AgentView& view,
                Budget& budget)
      : instance_(instance), space_(space), view_(view), budget_(budget) {}

  std::vector<Pattern> Run() {
    LinearSystem rows(static_cast<int>(instance_.profile_count()));
    std::vector<Rational> origin(instance_.profile_count(), Rational(0));
    std::vector<std::uint32_t> masks;
    Descend(0, masks, rows, origin);
    return std::move(patterns_);
  }

 private:
  void AppendChoice(std::size_t key, std::uint32_t mask, LinearSystem& rows) const {
    const auto& forms = view_.forms[key];
    int representative = 0;
    while (!(mask & (1u << representative))) ++representative;
    for (int report = 0; report < view_.types; ++report) {
      if (report == representative) continue;
      if (mask & (1u << report)) {
        rows.Add(DifferenceRow(forms[report], forms[representative], Relation::kLessEqual));
        rows.Add(DifferenceRow(forms[representative], forms[report], Relation::kLessEqual));
      } else {
        rows.Add(DifferenceRow(forms[report], forms[representative], Relation::kLess));
      }
    }
  }

  std::uint32_t RealizedMask(std::size_t key, const std::vector<Rational>& point) const {
    std::vector<Rational> values;
    for (const auto& form : view_.forms[key]) values.push_back(Evaluate(form, point));
    const Rational best = *std::max_element(values.begin(), values.end());
    std::uint32_t mask = 0;
    for (int report = 0; report < view_.types; ++report) {
      if (values[report] == best) mask |= 1u << report;
    }
    return mask;
  }

  void Descend(std::size_t key, std::vector<std::uint32_t>& masks, LinearSystem& rows,
               const std::vector<Rational>& point) {
    const std::size_t keys = view_.co_strategies * view_.types;
    if (key == keys) {
      Record(masks, rows, point);
      return;
    }
    const std::size_t co = key / view_.types;
    const int type = static_cast<int>(key % view_.types);
    const std::uint32_t required = co == view_.truthful_co ? (1u << type) : 0u;
    const std::uint32_t realized = RealizedMask(key, point);
    const std::uint32_t full = (1u << view_.types) - 1;

    std::vector<std::uint32_t> order;
    if ((realized & required) == required) order.push_back(realized);
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
      if (mask != realized && (mask & required) == required) order.push_back(mask);
    }
    const std::size_t base = rows.size();
    for (std::uint32_t mask : order) {
      budget_.Branch();
      AppendChoice(key, mask, rows);
      masks.push_back(mask);
      if (mask == realized) {
        Descend(key + 1, masks, rows, point);
      } else if (auto next = Feasible(rows, budget_)) {
        Descend(key + 1, masks, rows, *next);
      }
      masks.pop_back();
      rows.Truncate(base);
    }
  }

  void Record(const std::vector<std::uint32_t>& masks, const LinearSystem& rows,
              const std::vector<Rational>& point) {
    Pattern pattern{masks, rows, point, std::vector<char>(space_.size(), 0)};
    for (std::size_t k = 0; k < space_.size(); ++k) {
      const StrategyProfile alpha = space_.Decode(k);
      const std::size_t co = view_.co_of[k];
      bool best = true;
      for (int type = 0; type < view_.types && best; ++type) {
        best = (masks[co * view_.types + type] >> alpha.bid(view_.agent, type)) & 1u;
      }
      pattern.best_response[k] = best ? 1 : 0;
    }
    patterns_.push_back(std::move(pattern));
  }

  const Instance& instance_;
  const StrategySpace& space_;
  const AgentView& view_;
  Budget& budget_;
  std::vector<Pattern> patterns_;
};

// Candidate elimination of one bad equilibrium by one agent.
struct Choice {
  int agent = 0;
  int threatened = 0;
  std::size_t flag_map = 0;  // index into |X|^|Theta_-i|, first co-profile most significant
};

struct AssignedEntry {
  std::size_t profile = 0;
  int threatened = 0;
  std::size_t flag_map = 0;
};

std::vector<int> DecodeFlagMap(const Instance& instance, int agent, std::size_t index) {
  std::vector<int> outcome(instance.co_profile_count(agent));
  for (std::size_t c = outcome.size(); c-- > 0;) {
    outcome[c] = static_cast<int>(index % instance.outcome_count());
    index /= instance.outcome_count();
  }
  return outcome;
}

std::size_t FlagMapCount(const Instance& instance, int agent) {
  std::size_t count = 1;
  for (std::size_t c = 0; c < instance.co_profile_count(agent); ++c) {
    count *= static_cast<std::size_t>(instance.outcome_count());
  }
  return count;
}

// Memoized feasibility of one agent's pattern rows plus the elimination rows
// of the bad equilibria assigned to that agent.
class EliminationOracle {
 public:
  EliminationOracle(const Instance& instance, const Beliefs& beliefs, const StrategySpace& space,
                    const std::vector<std::vector<Pattern>>& patterns, Budget& budget)
      : instance_(instance), beliefs_(beliefs), space_(space), patterns_(patterns), budget_(budget) {}

  const std::optional<std::vector<Rational>>& Check(int agent, std::size_t pattern,
                                                    const std::vector<AssignedEntry>& entries) {
    std::vector<std::uint64_t> key{static_cast<std::uint64_t>(agent), pattern};
    for (const auto& e : entries) {
      key.push_back(e.profile);
      key.push_back(static_cast<std::uint64_t>(e.threatened));
      key.push_back(e.flag_map);
    }
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    budget_.Branch();
    LinearSystem system = Assemble(agent, pattern, entries);
    return memo_.emplace(std::move(key), Feasible(system, budget_)).first->second;
  }

  LinearSystem Assemble(int agent, std::size_t pattern,
                        const std::vector<AssignedEntry>& entries) const {
    const Pattern& base = patterns_[agent][pattern];
    const int block = static_cast<int>(instance_.co_profile_count(agent));
    LinearSystem system(static_cast<int>(instance_.profile_count()) +
                        block * static_cast<int>(entries.size()));
    system.Append(base.rows);
    int flag_base = static_cast<int>(instance_.profile_count());
    for (const auto& e : entries) {
      const PlanEntry entry{e.profile, agent, e.threatened, DecodeFlagMap(instance_, agent, e.flag_map)};
      AppendEliminationRows(instance_, beliefs_, space_.Decode(e.profile), entry, 0, flag_base, system);
      flag_base += block;
    }
    return system;
  }

 private:
  const Instance& instance_;
  const Beliefs& beliefs_;
  const StrategySpace& space_;
  const std::vector<std::vector<Pattern>>& patterns_;
  Budget& budget_;
  std::map<std::vector<std::uint64_t>, std::optional<std::vector<Rational>>> memo_;
};

struct CombinationResult {
  std::vector<std::size_t> pattern_of;  // per agent
  std::vector<std::pair<std::size_t, Choice>> plan;  // bad profile -> choice
};

class CombinationScanner {
 public:
  CombinationScanner(const Instance& instance, const StrategySpace& space,
                     const std::vector<std::vector<Pattern>>& patterns,
                     const std::vector<char>& bad, EliminationOracle& oracle, Budget& budget)
      : instance_(instance), space_(space), patterns_(patterns), bad_(bad), oracle_(oracle), budget_(budget) {}

  std::vector<std::size_t> Decode(std::size_t index) const {
    std::vector<std::size_t> pattern_of(patterns_.size());
    for (std::size_t i = patterns_.size(); i-- > 0;) {
      pattern_of[i] = index % patterns_[i].size();
      index /= patterns_[i].size();
    }
    return pattern_of;
  }

  std::optional<CombinationResult> Evaluate(std::size_t index) {
    budget_.Branch();
    CombinationResult result;
    result.pattern_of = Decode(index);
    std::vector<std::size_t> bad_equilibria;
    for (std::size_t k = 0; k < space_.size(); ++k) {
      if (!bad_[k]) continue;
      bool equilibrium = true;
      for (std::size_t i = 0; i < patterns_.size() && equilibrium; ++i) {
        equilibrium = patterns_[i][result.pattern_of[i]].best_response[k] != 0;
      }
      if (equilibrium) bad_equilibria.push_back(k);
    }
    if (bad_equilibria.empty()) return result;

    // Options that are feasible in isolation; an empty list refutes the combination.
    std::vector<std::vector<Choice>> options(bad_equilibria.size());
    for (std::size_t b = 0; b < bad_equilibria.size(); ++b) {
      const std::size_t k = bad_equilibria[b];
      for (int i = 0; i < instance_.agent_count(); ++i) {
        const std::size_t maps = FlagMapCount(instance_, i);
        for (int threatened = 0; threatened < instance_.type_count(i); ++threatened) {
          for (std::size_t h = 0; h < maps; ++h) {
            if (oracle_.Check(i, result.pattern_of[i], {{k, threatened, h}})) {
              options[b].push_back({i, threatened, h});
            }
          }
        }
      }
      if (options[b].empty()) return std::nullopt;
    }
    std::vector<std::vector<AssignedEntry>> assigned(instance_.agent_count());
    if (!Assign(0, bad_equilibria, options, result, assigned)) return std::nullopt;
    return result;
  }

 private:
  bool Assign(std::size_t b, const std::vector<std::size_t>& bad_equilibria,
              const std::vector<std::vector<Choice>>& options, CombinationResult& result,
              std::vector<std::vector<AssignedEntry>>& assigned) {
    if (b == bad_equilibria.size()) return true;
    for (const Choice& choice : options[b]) {
      auto& mine = assigned[choice.agent];
      mine.push_back({bad_equilibria[b], choice.threatened, choice.flag_map});
      const bool ok = mine.size() == 1 ||
                      oracle_.Check(choice.agent, result.pattern_of[choice.agent], mine).has_value();
      if (ok) {
        result.plan.emplace_back(bad_equilibria[b], choice);
        if (Assign(b + 1, bad_equilibria, options, result, assigned)) return true;
        result.plan.pop_back();
      }
      mine.pop_back();
    }
    return false;
  }

  const Instance& instance_;
  const StrategySpace& space_;
  const std::vector<std::vector<Pattern>>& patterns_;
  const std::vector<char>& bad_;
  EliminationOracle& oracle_;
  Budget& budget_;
};

StrongCertificate Assemble(const Instance& instance, const Beliefs& beliefs,
                           const StrategySpace& space, EliminationOracle& oracle,
                           const CombinationResult& found) {
  const int n = instance.agent_count();
  const std::size_t types = instance.profile_count();
  StrongCertificate cert;
  cert.payments.resize(n);

  std::vector<std::vector<AssignedEntry>> assigned(n);
  for (const auto& [profile, choice] : found.plan) {
    assigned[choice.agent].push_back({profile, choice.threatened, choice.flag_map});
  }
  std::map<std::size_t, std::pair<PlanEntry, std::vector<Rational>>> entries;
  for (int i = 0; i < n; ++i) {
    const auto& point = oracle.Check(i, found.pattern_of[i], assigned[i]);
    if (!point) throw Error(ErrorKind::kContractViolation, "selected combination became infeasible");
    cert.payments[i].assign(point->begin(), point->begin() + static_cast<std::ptrdiff_t>(types));
    const std::size_t block = instance.co_profile_count(i);
    for (std::size_t e = 0; e < assigned[i].size(); ++e) {
      const auto& a = assigned[i][e];
      const auto first = point->begin() + static_cast<std::ptrdiff_t>(types + e * block);
      entries[a.profile] = {PlanEntry{a.profile, i, a.threatened, DecodeFlagMap(instance, i, a.flag_map)},
                            std::vector<Rational>(first, first + static_cast<std::ptrdiff_t>(block))};
    }
  }
  for (auto& [profile, entry] : entries) {
    cert.plan.entries.push_back(std::move(entry.first));
    cert.elimination_payments.push_back(std::move(entry.second));
  }

  const Mechanism direct = Mechanism::Direct(instance, cert.payments);
  cert.labeling.labels.resize(space.size());
  for (std::size_t k = 0; k < space.size(); ++k) {
    const auto report = IsEquilibrium(instance, beliefs, direct, space.Decode(k));
    ProfileLabel& label = cert.labeling.labels[k];
    label.equilibrium = report.is_equilibrium;
    if (report.violation) {
      label.witness = Witness{report.violation->agent, report.violation->type, report.violation->bid};
    }
  }
  const LinearSystem system = BuildSystem(instance, beliefs, cert.labeling, cert.plan);
  const std::vector<Rational> point = FlattenPoint(instance, cert);
  if (!CheckPoint(system, point)) {
    throw Error(ErrorKind::kContractViolation, "assembled certificate violates its own system");
  }
  cert.strict_slack = MinStrictSlack(system, point);
  return cert;
}

}  // namespace

StrongDecision DecideStrong(const Instance& instance, const SearchLimits& limits) {
  StrongDecision decision;
  const StrategySpace space = StrategySpace::Direct(instance);
  decision.statistics.profiles = space.size();
  if (space.size() > limits.max_profiles) {
    decision.status = StrongDecision::Status::kResourceExceeded;
    decision.exceeded = "profiles";
    return decision;
  }
  const Beliefs beliefs = ConditionalBeliefs(instance);
  Budget budget(limits);

  try {
    std::vector<std::vector<Pattern>> patterns;
    for (int i = 0; i < instance.agent_count(); ++i) {
      const AgentView view = MakeView(instance, beliefs, space, i);
      patterns.push_back(PatternSearch(instance, space, view, budget).Run());
      decision.statistics.patterns.push_back(patterns.back().size());
    }

    std::size_t total = 1;
    for (const auto& p : patterns) {
      if (p.empty()) {
        total = 0;
        break;
      }
      if (total > limits.max_branches / p.size()) throw LimitHit{"branches"};
      total *= p.size();
    }
    decision.statistics.combinations_total = total;

    std::vector<char> bad(space.size(), 0);
    for (std::size_t k = 0; k < space.size(); ++k) bad[k] = IsBadProfile(instance, space.Decode(k)) ? 1 : 0;

    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::atomic<std::size_t> best{kNone};
    std::atomic<std::size_t> next_chunk{0};
    std::mutex mutex;
    std::optional<CombinationResult> best_result;
    std::optional<LimitHit> hit;
    const std::size_t chunk = 16;

    auto worker = [&] {
      EliminationOracle oracle(instance, beliefs, space, patterns, budget);
      CombinationScanner scanner(instance, space, patterns, bad, oracle, budget);
      try {
        while (true) {
          const std::size_t start = next_chunk.fetch_add(chunk);
          if (start >= total || start >= best.load()) return;
          const std::size_t end = std::min(total, start + chunk);
          for (std::size_t index = start; index < end && index < best.load(); ++index) {
            if (auto result = scanner.Evaluate(index)) {
              std::lock_guard lock(mutex);
              if (index < best.load()) {
                best.store(index);
                best_result = std::move(result);
              }
              return;
            }
          }
        }
      } catch (const LimitHit& limit) {
        std::lock_guard lock(mutex);
        if (!hit) hit = limit;
        next_chunk.store(total);
      }
    };

    const int workers = std::max(1, limits.workers);
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::thread> threads;
      for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
      for (auto& t : threads) t.join();
    }
    if (hit) throw *hit;

    if (best_result) {
      EliminationOracle oracle(instance, beliefs, space, patterns, budget);
      decision.certificate = Assemble(instance, beliefs, space, oracle, *best_result);
      decision.status = StrongDecision::Status::kYes;
      decision.statistics.combinations_examined = best.load() + 1;
    } else {
      decision.status = StrongDecision::Status::kNo;
      decision.statistics.combinations_examined = total;
    }
  } catch (const LimitHit& limit) {
    decision.status = StrongDecision::Status::kResourceExceeded;
    decision.exceeded = limit.which;
  }
  decision.statistics.branches = budget.branches();
  decision.statistics.lp_solves = budget.lp_solves();
  return decision;
}

}  // namespace mechcheck
