#include <gtest/gtest.h>

#include "mechcheck/io.h"
#include "mechcheck/error.h"
#include "mechcheck/strong_single.h"
#include "mechcheck/weak.h"
#include "support/oracles.h"

namespace mechcheck {
namespace {

using testing::LoadFixture;

TEST(StrongSingle, ConstantScfHasNoStrictRows) {
  const Instance inst = testing::SingleAgent({{1, -1, 0}, {0, 2, 1}}, {1, 1, 1});
  const LinearSystem s = BuildSingleSystem(inst);
  EXPECT_EQ(s.strict_count(), 0u);
  EXPECT_EQ(s.size(), 6u);
  EXPECT_TRUE(CheckPoint(s, std::vector<Rational>{0, 0, 0}));
}

TEST(StrongSingle, FixtureARows) {
  const LinearSystem s = BuildSingleSystem(LoadFixture("fixture_a.json"));
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.strict_count(), 2u);
}

TEST(StrongSingle, FixtureBRowsCancel) {
  const LinearSystem s = BuildSingleSystem(LoadFixture("fixture_b.json"));
  ASSERT_EQ(s.size(), 2u);
  const auto& r0 = s.constraints()[0];
  const auto& r1 = s.constraints()[1];
  EXPECT_TRUE(r0.strict() && r1.strict());
  // P(t2) - P(t1) < 1 and P(t1) - P(t2) < -1.
  EXPECT_EQ(r0.coefficients.at(1), Rational(1));
  EXPECT_EQ(r0.coefficients.at(0), Rational(-1));
  EXPECT_EQ(r0.bound, Rational(1));
  EXPECT_EQ(r1.bound, Rational(-1));
  EXPECT_EQ(r0.bound + r1.bound, Rational(0));
}

TEST(StrongSingle, FixtureVerdicts) {
  const SingleAgentVerdict a = DecideStrongSingle(LoadFixture("fixture_a.json"));
  ASSERT_TRUE(a.implementable);
  EXPECT_EQ(*a.payments, (std::vector<Rational>{0, 0}));
  EXPECT_EQ(*a.strict_slack, Rational(1));

  const SingleAgentVerdict b = DecideStrongSingle(LoadFixture("fixture_b.json"));
  EXPECT_FALSE(b.implementable);
  EXPECT_EQ(*b.refutation, (std::vector<Rational>{1, 1}));

  const Instance c_inst = LoadFixture("fixture_c.json");
  const SingleAgentVerdict c = DecideStrongSingle(c_inst);
  EXPECT_FALSE(c.implementable);
  EXPECT_TRUE(ValidateRefutation(BuildSingleSystem(c_inst), *c.refutation));
  EXPECT_FALSE(DecideWeak(c_inst).implementable);
}

TEST(StrongSingle, RejectsSeveralAgents) {
  try {
    BuildSingleSystem(LoadFixture("fixture_d.json"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNotSingleAgent);
  }
  EXPECT_THROW(DecideStrongSingle(LoadFixture("fixture_d.json")), Error);
}

TEST(StrongSingle, PriorIsIgnored) {
  const Instance skewed = ParseInstance(ParseJsonText(R"({"agents":1,"outcomes":["a","b"],
    "types":[["t1","t2"]],"prior":{"t1":"9/10","t2":"1/10"},
    "valuations":[{"a":{"t1":"1","t2":"0"},"b":{"t1":"0","t2":"1"}}],"scf":{"t1":"a","t2":"b"}})"));
  EXPECT_EQ(BuildSingleSystem(skewed), BuildSingleSystem(LoadFixture("fixture_a.json")));
}

// Three types and three outcomes: every yes is confirmed by the payment it
// returns, every no by the grid search failing.
TEST(StrongSingle, ThreeTypeInstancesAgainstOracles) {
  std::mt19937_64 rng(2024);
  testing::InstanceShape shape;
  shape.max_agents = 1;
  shape.max_types = 3;
  shape.value_range = 1;
  int yes = 0, no = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const Instance inst = testing::RandomInstance(rng, shape);
    const SingleAgentVerdict v = DecideStrongSingle(inst);
    const LinearSystem s = BuildSingleSystem(inst);
    if (v.implementable) {
      ++yes;
      EXPECT_TRUE(CheckPoint(s, *v.payments));
      EXPECT_TRUE(testing::SingleAgentGood(inst, *v.payments));
      EXPECT_TRUE(DecideWeak(inst).implementable);
    } else {
      ++no;
      EXPECT_TRUE(ValidateRefutation(s, *v.refutation));
      EXPECT_FALSE(testing::SingleAgentGridWitness(inst).has_value());
    }
  }
  EXPECT_GT(yes, 0);
  EXPECT_GT(no, 0);
}

}  // namespace
}  // namespace mechcheck
