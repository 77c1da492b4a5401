// Standalone acceptance run: one PASS/FAIL line per criterion, exit status 1
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mechcheck/augment.h"
#include "mechcheck/error.h"
#include "mechcheck/io.h"
#include "mechcheck/strong_general.h"
#include "mechcheck/strong_single.h"
#include "mechcheck/weak.h"
#include "support/oracles.h"

namespace mechcheck {
namespace {

constexpr int kCorpusSize = 500;
constexpr int kProductPriorInstances = 200;
constexpr int kConstructedMechanisms = 20;
constexpr int kDeskScaleInstances = 40;
constexpr double kFixtureSeconds = 1.0;
constexpr double kSingleAgentSuiteSeconds = 300.0;
constexpr double kDeskScaleSeconds = 600.0;
// Largest payment encoding (numerator bits + denominator bits) seen on the
// exhaustive single-agent suite.
constexpr std::size_t kMaxPaymentBits = 4;

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::vector<std::string> failures;

  void Expect(bool condition, const std::string& what) {
    if (condition) return;
    pass = false;
    if (failures.size() < 5) failures.push_back(what);
  }
};

std::vector<Rational> Flatten(const PaymentScheme& payments) {
  std::vector<Rational> point;
  for (const auto& row : payments) point.insert(point.end(), row.begin(), row.end());
  return point;
}

std::size_t MaxBits(const std::vector<Rational>& values) {
  std::size_t bits = 0;
  for (const auto& v : values) bits = std::max(bits, v.BitLength());
  return bits;
}

std::size_t CertificateBits(const StrongCertificate& cert) {
  std::size_t bits = MaxBits(Flatten(cert.payments));
  for (const auto& block : cert.elimination_payments) bits = std::max(bits, MaxBits(block));
  return bits;
}

Instance TestData(const std::string& name) {
  return ParseInstance(ReadJsonFile(std::string(MECHCHECK_TEST_DATA_DIR) + "/" + name));
}

std::string Describe(const Instance& inst) { return InstanceToJson(inst).dump(); }

std::vector<Instance> Corpus() {
  std::mt19937_64 rng(20240601);
  testing::InstanceShape shape;
  std::vector<Instance> corpus;
  for (int k = 0; k < kCorpusSize; ++k) corpus.push_back(testing::RandomInstance(rng, shape));
  return corpus;
}

// Every yes carries a point satisfying its system, every no a refutation
// of it.
void CertificateSoundness(const std::vector<Instance>& corpus, Outcome& o) {
  int weak_yes = 0, strong_yes = 0, refutations = 0, single = 0;
  for (const Instance& inst : corpus) {
    const Beliefs q = ConditionalBeliefs(inst);
    const LinearSystem ic = BuildIcSystem(inst, q);
    const WeakVerdict weak = DecideWeak(inst);
    if (weak.implementable) {
      ++weak_yes;
      o.Expect(weak.payments && CheckPoint(ic, Flatten(*weak.payments)), "weak point " + Describe(inst));
    } else {
      ++refutations;
      o.Expect(weak.refutation && ValidateRefutation(ic, *weak.refutation), "weak refutation " + Describe(inst));
    }
    if (inst.agent_count() == 1) {
      ++single;
      const LinearSystem system = BuildSingleSystem(inst);
      const SingleAgentVerdict s = DecideStrongSingle(inst);
      if (s.implementable) {
        o.Expect(s.payments && CheckPoint(system, *s.payments) &&
                     MinStrictSlack(system, *s.payments) >= *s.strict_slack,
                 "single point " + Describe(inst));
      } else {
        ++refutations;
        o.Expect(s.refutation && ValidateRefutation(system, *s.refutation),
                 "single refutation " + Describe(inst));
      }
    }
    const StrongDecision d = DecideStrong(inst);
    o.Expect(d.status != StrongDecision::Status::kResourceExceeded, "resources " + Describe(inst));
    if (d.status == StrongDecision::Status::kYes) {
      ++strong_yes;
      o.Expect(VerifyCertificate(inst, q, *d.certificate), "certificate " + Describe(inst));
    }
  }
  o.detail << corpus.size() << " instances (" << single << " single-agent), " << weak_yes << " weak yes, "
           << strong_yes << " strong yes, " << refutations << " refutations checked";
}

void SingleAgentExhaustive(Outcome& o) {
  const auto start = Clock::now();
  int count = 0, yes = 0;
  std::size_t bits = 0;
  for (int code = 0; code < 81; ++code) {
    std::vector<std::vector<int>> v(2, std::vector<int>(2));
    int rest = code;
    for (int x = 0; x < 2; ++x) {
      for (int t = 0; t < 2; ++t) {
        v[x][t] = rest % 3 - 1;
        rest /= 3;
      }
    }
    for (int fc = 0; fc < 4; ++fc) {
      const Instance inst = testing::SingleAgent(v, {fc & 1, (fc >> 1) & 1});
      ++count;
      const SingleAgentVerdict s = DecideStrongSingle(inst);
      const bool grid = testing::SingleAgentGridWitness(inst).has_value();
      const StrongDecision g = DecideStrong(inst);
      const bool general = g.status == StrongDecision::Status::kYes;
      const std::string tag = Describe(inst);
      o.Expect(s.implementable == grid, "single vs grid " + tag);
      o.Expect(g.status != StrongDecision::Status::kResourceExceeded && s.implementable == general,
               "single vs general " + tag);
      if (s.implementable) {
        ++yes;
        o.Expect(testing::SingleAgentGood(inst, *s.payments), "single payments rejected by oracle " + tag);
        bits = std::max(bits, MaxBits(*s.payments));
      }
      if (general) bits = std::max(bits, CertificateBits(*g.certificate));
    }
  }
  const double seconds = Since(start);
  o.Expect(count == 324, "suite size");
  o.Expect(seconds < kSingleAgentSuiteSeconds, "suite took " + std::to_string(seconds) + " s");
  o.Expect(bits <= kMaxPaymentBits, "payment bits " + std::to_string(bits));
  o.detail << count << " instances, " << yes << " yes, " << seconds << " s, max payment bits " << bits;
}

void FixtureVerdicts(Outcome& o) {
  struct Expected {
    const char* name;
    bool weak;
    bool strong;
    bool zero_payments;
  };
  const Expected table[] = {
      {"fixture_a.json", true, true, false},      {"fixture_b.json", true, false, false},
      {"fixture_c.json", false, false, false},    {"constant_scf.json", true, true, true},
      {"singleton_types.json", true, true, true},
  };
  double slowest = 0;
  for (const auto& e : table) {
    const auto start = Clock::now();
    const Instance inst = testing::LoadFixture(e.name);
    const bool weak = DecideWeak(inst).implementable;
    bool strong = false;
    std::optional<PaymentScheme> payments;
    if (inst.agent_count() == 1) {
      const SingleAgentVerdict s = DecideStrongSingle(inst);
      strong = s.implementable;
      if (s.payments) payments = PaymentScheme{*s.payments};
    }
    const StrongDecision d = DecideStrong(inst);
    const bool general = d.status == StrongDecision::Status::kYes;
    if (inst.agent_count() > 1) {
      strong = general;
      if (general) payments = d.certificate->payments;
    }
    const double seconds = Since(start);
    slowest = std::max(slowest, seconds);
    o.Expect(weak == e.weak, std::string(e.name) + " weak");
    o.Expect(strong == e.strong && general == e.strong, std::string(e.name) + " strong");
    if (e.zero_payments) {
      o.Expect(payments == ZeroPayments(inst), std::string(e.name) + " payments not zero");
      o.Expect(general && d.certificate->payments == ZeroPayments(inst), std::string(e.name) + " general payments");
    }
    o.Expect(seconds < kFixtureSeconds, std::string(e.name) + " took " + std::to_string(seconds) + " s");
  }
  o.detail << "5 fixtures, slowest " << slowest << " s";
}

void Implication(const std::vector<Instance>& corpus, Outcome& o) {
  int strong_yes = 0;
  for (const Instance& inst : corpus) {
    const bool weak = DecideWeak(inst).implementable;
    bool strong = DecideStrong(inst).status == StrongDecision::Status::kYes;
    if (inst.agent_count() == 1) strong = strong || DecideStrongSingle(inst).implementable;
    if (strong) ++strong_yes;
    o.Expect(!strong || weak, "strong without weak " + Describe(inst));
  }
  o.detail << strong_yes << " strong yes among " << corpus.size() << " instances, no counterexample";
}

void WeakCrossCheck(Outcome& o) {
  std::mt19937_64 rng(77);
  testing::InstanceShape product;
  product.product_prior = true;
  product.max_types = 3;
  int agree = 0, yes = 0;
  for (int k = 0; k < kProductPriorInstances; ++k) {
    const Instance inst = testing::RandomInstance(rng, product);
    const WeakVerdict w = DecideWeak(inst);
    o.Expect(w.cycle_check.has_value(), "cycle check skipped on product prior " + Describe(inst));
    if (w.cycle_check && *w.cycle_check == w.implementable) ++agree;
    o.Expect(!w.cycle_check || *w.cycle_check == w.implementable, "disagreement " + Describe(inst));
    if (w.implementable) ++yes;
  }
  testing::InstanceShape correlated;
  correlated.min_agents = 2;
  correlated.allow_zero_profiles = false;
  int skipped = 0, correlated_count = 0;
  std::vector<Instance> others{TestData("correlated.json")};
  for (int k = 0; k < 100; ++k) others.push_back(testing::RandomInstance(rng, correlated));
  for (const Instance& inst : others) {
    if (IsProductPrior(inst)) continue;
    ++correlated_count;
    const bool skip = !DecideWeak(inst).cycle_check.has_value();
    if (skip) ++skipped;
    o.Expect(skip, "cycle check ran on correlated prior " + Describe(inst));
  }
  o.detail << agree << "/" << kProductPriorInstances << " product-prior verdicts agree (" << yes
           << " yes); cycle check skipped on " << skipped << "/" << correlated_count << " correlated priors";
}

Instance WithScf(const Instance& inst, std::vector<int> scf) {
  std::optional<std::vector<Rational>> prior;
  if (inst.prior_explicit()) prior = inst.prior();
  return Instance::Create(inst.outcomes(), inst.types(), prior, inst.valuations(), std::move(scf));
}

void Construction(Outcome& o) {
  std::mt19937_64 rng(5150);
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  testing::InstanceShape shape;
  int built = 0, two_agent = 0, with_flags = 0, attempts = 0;
  while (built < kConstructedMechanisms * 2 && attempts < 200000) {
    ++attempts;
    const Instance base = testing::RandomInstance(rng, shape);
    const int n = base.agent_count();
    std::vector<std::vector<std::string>> bids(n);
    std::size_t size = 1;
    for (int i = 0; i < n; ++i) {
      const int count = uniform(1, 3);
      for (int s = 0; s < count; ++s) bids[i].push_back("s" + std::to_string(s + 1));
      size *= count;
    }
    std::vector<int> outcome(size);
    std::vector<std::vector<Rational>> pay(n, std::vector<Rational>(size));
    for (std::size_t b = 0; b < size; ++b) {
      outcome[b] = uniform(0, base.outcome_count() - 1);
      for (int i = 0; i < n; ++i) pay[i][b] = Rational(uniform(-2, 2));
    }
    const Mechanism m = Mechanism::Create(base, bids, outcome, pay);
    const auto equilibria = EnumerateEquilibria(base, ConditionalBeliefs(base), m);
    if (equilibria.empty()) continue;
    const StrategyProfile& alpha = equilibria.front().profile;
    std::vector<int> scf(base.profile_count());
    for (std::size_t p = 0; p < base.profile_count(); ++p) {
      scf[p] = m.outcome(BidProfileFor(base, m, alpha, p, 0, alpha.bid(0, base.TypeOf(p, 0))));
    }
    // A constant f is implemented by any mechanism with an equilibrium.
    if (std::all_of(scf.begin(), scf.end(), [&](int x) { return x == scf.front(); })) continue;
    const Instance inst = WithScf(base, scf);
    const Beliefs q = ConditionalBeliefs(inst);
    if (!VerifyStrongImplementation(inst, q, m).implements) continue;
    // Keep the sample from being dominated by trivial one-agent mechanisms.
    if (n == 1 && built - two_agent >= kConstructedMechanisms) continue;

    ++built;
    if (n == 2) ++two_agent;
    const AugmentationResult r = AugmentFromMechanism(inst, q, m, alpha);
    bool flagged = false;
    for (const auto& f : r.flags) flagged = flagged || !f.empty();
    if (flagged) ++with_flags;
    const StrategyProfile truthful = TruthfulProfile(inst);
    o.Expect(IsEquilibrium(inst, q, r.mechanism, truthful).is_equilibrium, "truthful not equilibrium " + Describe(inst));
    o.Expect(RealizesScf(inst, r.mechanism, truthful), "truthful misses f " + Describe(inst));
    o.Expect(VerifyStrongImplementation(inst, q, r.mechanism).implements, "augmented fails " + Describe(inst));
    o.Expect(r.source_implements == true, "source verdict " + Describe(inst));
  }
  o.Expect(built >= kConstructedMechanisms, "only " + std::to_string(built) + " mechanisms constructed");
  o.detail << built << " mechanisms (" << two_agent << " two-agent, " << with_flags << " with flags) from "
           << attempts << " draws";
}

void DeskScale(Outcome& o) {
  std::mt19937_64 rng(6060);
  std::vector<Instance> instances{testing::LoadFixture("fixture_d.json"),
                                  TestData("correlated.json")};
  testing::InstanceShape shape;
  shape.min_agents = 2;
  shape.max_outcomes = 2;
  while (static_cast<int>(instances.size()) < kDeskScaleInstances) {
    const Instance inst = testing::RandomInstance(rng, shape);
    if (inst.type_count(0) == 2 && inst.type_count(1) == 2 && inst.outcome_count() == 2) {
      instances.push_back(inst);
    }
  }
  double slowest = 0;
  int yes = 0;
  for (const Instance& inst : instances) {
    const auto start = Clock::now();
    const StrongDecision one = DecideStrong(inst);
    const double seconds = Since(start);
    slowest = std::max(slowest, seconds);
    SearchLimits four;
    four.workers = 4;
    const StrongDecision parallel = DecideStrong(inst, four);
    o.Expect(one.status != StrongDecision::Status::kResourceExceeded, "resources " + Describe(inst));
    o.Expect(seconds < kDeskScaleSeconds, "took " + std::to_string(seconds) + " s " + Describe(inst));
    o.Expect(one.status == parallel.status && one.certificate == parallel.certificate &&
                 one.statistics.patterns == parallel.statistics.patterns &&
                 one.statistics.combinations_examined == parallel.statistics.combinations_examined,
             "workers disagree " + Describe(inst));
    if (one.status == StrongDecision::Status::kYes) {
      ++yes;
      o.Expect(CertificateToJson(inst, *one.certificate).dump() ==
                   CertificateToJson(inst, *parallel.certificate).dump(),
               "certificate bytes differ " + Describe(inst));
    }
  }
  o.detail << instances.size() << " instances, " << yes << " yes, slowest " << slowest << " s";
}

void PaymentBits(const std::vector<Instance>& corpus, Outcome& o) {
  std::size_t reported = 0;
  int certificates = 0;
  for (const Instance& inst : corpus) {
    const StrongDecision d = DecideStrong(inst);
    if (d.status != StrongDecision::Status::kYes) continue;
    ++certificates;
    reported = std::max(reported, CertificateBits(*d.certificate));
  }
  std::size_t exhaustive = 0;
  for (int code = 0; code < 81; ++code) {
    std::vector<std::vector<int>> v(2, std::vector<int>(2));
    int rest = code;
    for (int x = 0; x < 2; ++x) {
      for (int t = 0; t < 2; ++t) {
        v[x][t] = rest % 3 - 1;
        rest /= 3;
      }
    }
    for (int fc = 0; fc < 4; ++fc) {
      const Instance inst = testing::SingleAgent(v, {fc & 1, (fc >> 1) & 1});
      const SingleAgentVerdict s = DecideStrongSingle(inst);
      if (s.payments) exhaustive = std::max(exhaustive, MaxBits(*s.payments));
      const StrongDecision d = DecideStrong(inst);
      if (d.certificate) exhaustive = std::max(exhaustive, CertificateBits(*d.certificate));
    }
  }
  o.Expect(exhaustive <= kMaxPaymentBits, "exhaustive suite reached " + std::to_string(exhaustive) + " bits");
  o.detail << "exhaustive single-agent max " << exhaustive << " bits (bound " << kMaxPaymentBits << "); corpus max "
           << reported << " bits over " << certificates << " certificates";
}

struct Criterion {
  int id;
  const char* title;
  std::function<void(Outcome&)> run;
};

}  // namespace
}  // namespace mechcheck

int main() {
  using namespace mechcheck;
  const std::vector<Instance> corpus = Corpus();
  const std::vector<Criterion> criteria = {
      {1, "certificate soundness", [&](Outcome& o) { CertificateSoundness(corpus, o); }},
      {2, "single-agent oracle equivalence", SingleAgentExhaustive},
      {3, "fixture verdicts", FixtureVerdicts},
      {4, "strong implies weak", [&](Outcome& o) { Implication(corpus, o); }},
      {5, "weak LP vs negative cycles", WeakCrossCheck},
      {6, "augmented revelation construction", Construction},
      {7, "two-agent desk scale and determinism", DeskScale},
      {8, "payment size bound", [&](Outcome& o) { PaymentBits(corpus, o); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = Clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.Expect(false, std::string("exception: ") + e.what());
    }
    std::printf("%s criterion %d (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.title,
                o.detail.str().c_str(), Since(start));
    for (const auto& f : o.failures) std::printf("    %s\n", f.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
