#include "cli.h"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "mechcheck/augment.h"
#include "mechcheck/error.h"
#include "mechcheck/io.h"
#include "mechcheck/strong_general.h"
#include "mechcheck/strong_single.h"
#include "mechcheck/weak.h"

namespace mechcheck::cli {
namespace {

struct Options {
  std::string instance;
  std::string payments;
  std::string mechanism;
  std::string certificate;
  std::string strategy;
  std::string limits;
  std::string report;
  bool force_general = false;
  bool verbose = false;
  int workers = 1;
};

// What a command produced: the stdout document, extra report-only fields and
// a one-line human summary.
struct Outcome {
  int code = kYes;
  Json result;
  Json report_extra = Json::object();
  std::string summary;
};

SearchLimits ParseLimits(const Options& options) {
  SearchLimits limits;
  limits.workers = std::max(1, options.workers);
  if (options.limits.empty()) return limits;
  std::vector<std::string> parts;
  std::stringstream in(options.limits);
  for (std::string part; std::getline(in, part, ',');) parts.push_back(part);
  if (parts.size() != 3) throw Error(ErrorKind::kParse, "--limits expects profiles,branches,seconds");
  try {
    limits.max_profiles = std::stoull(parts[0]);
    limits.max_branches = std::stoull(parts[1]);
    limits.max_seconds = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw Error(ErrorKind::kParse, "--limits expects profiles,branches,seconds");
  }
  return limits;
}

EnumerationOptions Enumeration(const Options& options) {
  const SearchLimits limits = ParseLimits(options);
  return EnumerationOptions{limits.max_profiles, limits.workers};
}

std::size_t MaxBits(const std::vector<std::vector<Rational>>& table) {
  std::size_t bits = 0;
  for (const auto& row : table) {
    for (const auto& value : row) bits = std::max(bits, value.BitLength());
  }
  return bits;
}

Json RowsToJson(const LinearSystem& system) {
  Json rows = Json::array();
  std::stringstream text(ToText(system));
  for (std::string line; std::getline(text, line);) rows.push_back(line);
  return rows;
}

Mechanism LoadMechanism(const Instance& instance, const Options& options) {
  if (!options.mechanism.empty()) return ParseMechanism(instance, ReadJsonFile(options.mechanism));
  if (!options.payments.empty()) {
    return Mechanism::Direct(instance, ParsePayments(instance, ReadJsonFile(options.payments)));
  }
  throw Error(ErrorKind::kParse, "one of --payments or --mechanism is required");
}

Outcome Validate(const Instance& instance) {
  Outcome o;
  o.result["valid"] = true;
  o.result["agents"] = instance.agent_count();
  o.result["profiles"] = instance.profile_count();
  o.summary = "instance is valid";
  return o;
}

Outcome Weak(const Instance& instance) {
  Outcome o;
  const WeakVerdict verdict = DecideWeak(instance);
  o.result["verdict"] = verdict.implementable ? "yes" : "no";
  if (verdict.payments) {
    o.result["payments"] = PaymentsToJson(instance, *verdict.payments);
    o.result["maxPaymentBits"] = MaxBits(*verdict.payments);
  }
  if (verdict.refutation) {
    o.result["refutation"] = RationalsToJson(*verdict.refutation);
    o.result["rows"] = RowsToJson(BuildIcSystem(instance, ConditionalBeliefs(instance)));
  }
  if (!verdict.cycle_check) {
    o.result["cycleCheck"] = "skipped";
  } else {
    o.result["cycleCheck"] = *verdict.cycle_check == verdict.implementable ? "agrees" : "disagrees";
  }
  o.code = verdict.implementable ? kYes : kNo;
  o.summary = std::string("weakly implementable: ") + (verdict.implementable ? "yes" : "no");
  return o;
}

Outcome StrongSingle(const Instance& instance) {
  Outcome o;
  const SingleAgentVerdict verdict = DecideStrongSingle(instance);
  o.result["verdict"] = verdict.implementable ? "yes" : "no";
  o.result["solver"] = "single";
  if (verdict.payments) {
    const PaymentScheme payments{*verdict.payments};
    o.result["payments"] = PaymentsToJson(instance, payments);
    o.result["strictSlack"] = verdict.strict_slack->ToString();
    o.result["maxPaymentBits"] = MaxBits(payments);
  }
  if (verdict.refutation) {
    o.result["refutation"] = RationalsToJson(*verdict.refutation);
    o.result["rows"] = RowsToJson(BuildSingleSystem(instance));
  }
  o.code = verdict.implementable ? kYes : kNo;
  o.summary = std::string("strongly implementable (single-agent LP): ") +
              (verdict.implementable ? "yes" : "no");
  return o;
}

Outcome StrongGeneral(const Instance& instance, const Options& options) {
  Outcome o;
  const StrongDecision decision = DecideStrong(instance, ParseLimits(options));
  const SearchStatistics& stats = decision.statistics;
  Json deterministic;
  deterministic["profiles"] = stats.profiles;
  deterministic["patterns"] = stats.patterns;
  deterministic["combinations"] = stats.combinations_total;
  deterministic["combinationsExamined"] = stats.combinations_examined;
  Json full = deterministic;
  full["branches"] = stats.branches;
  full["lpSolves"] = stats.lp_solves;
  o.report_extra["statistics"] = full;

  o.result["solver"] = "general";
  switch (decision.status) {
    case StrongDecision::Status::kYes: {
      const StrongCertificate& cert = *decision.certificate;
      o.result["verdict"] = "yes";
      o.result["payments"] = PaymentsToJson(instance, cert.payments);
      o.result["strictSlack"] = cert.strict_slack.ToString();
      o.result["maxPaymentBits"] = std::max(MaxBits(cert.payments), MaxBits(cert.elimination_payments));
      o.result["certificate"] = CertificateToJson(instance, cert);
      o.code = kYes;
      break;
    }
    case StrongDecision::Status::kNo:
      o.result["verdict"] = "no";
      o.code = kNo;
      break;
    case StrongDecision::Status::kResourceExceeded:
      o.result["verdict"] = "resourceExceeded";
      o.result["limit"] = decision.exceeded;
      o.code = kResourcesExceeded;
      break;
  }
  o.result["statistics"] = deterministic;
  o.summary = "strongly implementable (general search): " + o.result["verdict"].get<std::string>() +
              ", " + std::to_string(stats.combinations_examined) + "/" +
              std::to_string(stats.combinations_total) + " pattern combinations, " +
              std::to_string(stats.lp_solves) + " LP solves";
  return o;
}

Outcome Equilibria(const Instance& instance, const Options& options) {
  Outcome o;
  const Mechanism mechanism = LoadMechanism(instance, options);
  const auto reports =
      EnumerateEquilibria(instance, ConditionalBeliefs(instance), mechanism, Enumeration(options));
  Json list = Json::array();
  for (const auto& report : reports) {
    Json entry;
    entry["profile"] = StrategyKey(mechanism.bid_sets(), report.profile);
    if (report.classification) {
      entry["classification"] = *report.classification == Classification::kGood ? "good" : "bad";
    }
    list.push_back(std::move(entry));
  }
  o.result["count"] = reports.size();
  o.result["equilibria"] = std::move(list);
  o.summary = std::to_string(reports.size()) + " equilibria";
  return o;
}

Outcome VerifyMechanism(const Instance& instance, const Options& options) {
  Outcome o;
  const Mechanism mechanism = LoadMechanism(instance, options);
  const StrongVerdict verdict = VerifyStrongImplementation(instance, ConditionalBeliefs(instance),
                                                           mechanism, Enumeration(options));
  o.result["implements"] = verdict.implements;
  o.result["equilibria"] = verdict.equilibrium_count;
  if (verdict.witness == StrongVerdict::Witness::kNoEquilibrium) {
    o.result["witness"] = "noEquilibrium";
  } else if (verdict.witness == StrongVerdict::Witness::kBadEquilibrium) {
    o.result["witness"] = "badEquilibrium";
    o.result["profile"] = StrategyKey(mechanism.bid_sets(), *verdict.bad_equilibrium);
  }
  o.code = verdict.implements ? kYes : kNo;
  o.summary = std::string("mechanism strongly implements f: ") + (verdict.implements ? "yes" : "no");
  return o;
}

Outcome VerifyCertificateCommand(const Instance& instance, const Options& options) {
  Outcome o;
  const StrongCertificate cert = ParseCertificate(instance, ReadJsonFile(options.certificate));
  const bool valid = VerifyCertificate(instance, ConditionalBeliefs(instance), cert);
  o.result["valid"] = valid;
  o.code = valid ? kYes : kNo;
  o.summary = std::string("certificate valid: ") + (valid ? "yes" : "no");
  return o;
}

Outcome Augment(const Instance& instance, const Options& options) {
  Outcome o;
  const Beliefs beliefs = ConditionalBeliefs(instance);
  const Mechanism mechanism = LoadMechanism(instance, options);
  StrategyProfile alpha;
  if (!options.strategy.empty()) {
    alpha = ParseStrategyKey(instance, mechanism.bid_sets(), options.strategy);
  } else if (mechanism.is_direct()) {
    alpha = TruthfulProfile(instance);
  } else {
    throw Error(ErrorKind::kParse, "--strategy is required for a non-direct mechanism");
  }
  const EnumerationOptions enumeration = Enumeration(options);
  const AugmentationResult result = AugmentFromMechanism(instance, beliefs, mechanism, alpha, enumeration);

  Json doc = MechanismToJson(result.mechanism, instance);
  Json flags = Json::array();
  for (int i = 0; i < instance.agent_count(); ++i) {
    Json per_agent = Json::object();
    for (int s : result.flags[i]) {
      per_agent[std::string(kFlagPrefix) + mechanism.bid_sets()[i][s]] = mechanism.bid_sets()[i][s];
    }
    flags.push_back(std::move(per_agent));
  }
  doc["flags"] = std::move(flags);
  o.result["mechanism"] = std::move(doc);

  const bool truthful =
      IsEquilibrium(instance, beliefs, result.mechanism, TruthfulProfile(instance)).is_equilibrium;
  o.result["truthfulEquilibrium"] = truthful;
  if (result.source_implements) o.result["sourceImplements"] = *result.source_implements;
  if (StrategySpace(instance, result.mechanism).size() <= enumeration.budget) {
    o.result["implements"] =
        VerifyStrongImplementation(instance, beliefs, result.mechanism, enumeration).implements;
  }
  o.code = truthful ? kYes : kNo;
  o.summary = std::string("augmented mechanism built; truthful equilibrium: ") + (truthful ? "yes" : "no");
  return o;
}

void WriteReport(const Options& options, const std::string& command, const Outcome& o, double seconds) {
  Json report;
  report["command"] = command;
  report["exitCode"] = o.code;
  report["result"] = o.result;
  for (const auto& [key, value] : o.report_extra.items()) report[key] = value;
  report["timing"] = {{"seconds", seconds}};
  std::ofstream file(options.report);
  if (!file) throw Error(ErrorKind::kParse, "cannot write report '" + options.report + "'");
  file << report.dump(2) << "\n";
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian implementability toolkit: decide weak and strong implementation exactly", "mechcheck"};
  app.require_subcommand(1);
  Options options;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("instance", options.instance, "Instance JSON file")->required();
    sub->add_flag("--verbose", options.verbose, "Human-readable summary on stderr");
    sub->add_option("--report", options.report, "Write a full JSON report, with timing, to this path");
    sub->add_option("--limits", options.limits, "Search limits: profiles,branches,seconds");
    sub->add_option("--workers", options.workers, "Worker threads")->check(CLI::PositiveNumber);
  };
  auto add_mechanism = [&](CLI::App* sub) {
    auto* payments = sub->add_option("--payments", options.payments, "Payments of the direct mechanism");
    auto* mechanism = sub->add_option("--mechanism", options.mechanism, "Mechanism JSON file");
    payments->excludes(mechanism);
  };

  auto* validate = app.add_subcommand("validate", "Check an instance file");
  add_common(validate);
  auto* weak = app.add_subcommand("weak", "Decide weak implementability");
  add_common(weak);
  auto* strong = app.add_subcommand("strong", "Decide strong implementability");
  add_common(strong);
  strong->add_flag("--force-general", options.force_general, "Use the general search for one agent too");
  auto* equilibria = app.add_subcommand("equilibria", "Enumerate pure Bayesian equilibria");
  add_common(equilibria);
  add_mechanism(equilibria);
  auto* verify_mechanism = app.add_subcommand("verify-mechanism", "Brute-force strong implementation check");
  add_common(verify_mechanism);
  add_mechanism(verify_mechanism);
  auto* verify_certificate = app.add_subcommand("verify-certificate", "Re-check a strong certificate");
  add_common(verify_certificate);
  verify_certificate->add_option("certificate", options.certificate, "Certificate JSON file")->required();
  auto* augment = app.add_subcommand("augment", "Build the augmented revelation mechanism");
  add_common(augment);
  add_mechanism(augment);
  augment->add_option("--strategy", options.strategy, "Equilibrium to route types through, e.g. s1,s2;r1,r2");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInputError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    const Instance instance = ParseInstance(ReadJsonFile(options.instance));
    if (command == "validate") {
      o = Validate(instance);
    } else if (command == "weak") {
      o = Weak(instance);
    } else if (command == "strong") {
      o = instance.agent_count() == 1 && !options.force_general ? StrongSingle(instance)
                                                                 : StrongGeneral(instance, options);
    } else if (command == "equilibria") {
      o = Equilibria(instance, options);
    } else if (command == "verify-mechanism") {
      o = VerifyMechanism(instance, options);
    } else if (command == "verify-certificate") {
      o = VerifyCertificateCommand(instance, options);
    } else {
      o = Augment(instance, options);
    }
  } catch (const Error& e) {
    o = Outcome{};
    o.code = e.kind() == ErrorKind::kBudgetExceeded ? kResourcesExceeded : kInputError;
    if (command == "validate") o.result["valid"] = false;
    o.result["error"] = {{"kind", std::string(ErrorKindName(e.kind()))}, {"message", e.what()}};
    o.summary = std::string(ErrorKindName(e.kind())) + ": " + e.what();
    err << "error: " << o.summary << "\n";
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  out << o.result.dump(2) << "\n";
  if (options.verbose) {
    err << command << ": " << o.summary << " (" << seconds << " s)\n";
    if (!o.report_extra.empty()) err << o.report_extra.dump() << "\n";
  }
  if (!options.report.empty()) {
    try {
      WriteReport(options, command, o, seconds);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return kInputError;
    }
  }
  return o.code;
}

}  // namespace mechcheck::cli
