// Copyright 2026 The repsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <numeric>

#include "oracle.hpp"
#include "repsim/repsim.hpp"
#include "test_util.hpp"

namespace repsim {
namespace {

FiniteSpaces two_by_two() { return FiniteSpaces({"a"}, {{"0", "1"}, {"0", "1"}}, 2); }

TEST(JointActionDistribution, SingleParticipantIsIdentity) {
  FiniteSpaces s({"a"}, {{"0", "1"}}, 2);
  PolicyProfile p(std::vector<Policy>{Policy(s, 0, {{{0.7, 0.3}}})});
  const auto d = joint_action_distribution(p, 0, 0);
  EXPECT_DOUBLE_EQ(d[0], 0.7);
  EXPECT_DOUBLE_EQ(d[1], 0.3);
}

TEST(JointActionDistribution, DeterministicProduct) {
  const auto s = two_by_two();
  PolicyProfile p(std::vector<Policy>{Policy(s, 0, {{{1, 0}}}), Policy(s, 1, {{{0, 1}}})});
  const auto d = joint_action_distribution(p, 0, 0);
  const std::vector<ActionIndex> expected{0, 1};
  const JointAction u = s.encode(expected);
  EXPECT_EQ(u, 1u);
  for (JointAction v = 0; v < d.size(); ++v) EXPECT_DOUBLE_EQ(d[v], v == u ? 1.0 : 0.0);
}

TEST(JointActionDistribution, UniformProduct) {
  const auto s = two_by_two();
  PolicyProfile p(std::vector<Policy>{Policy(s, 0, {{{0.5, 0.5}}}), Policy(s, 1, {{{0.5, 0.5}}})});
  for (double v : joint_action_distribution(p, 0, 0)) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(JointActionDistribution, RejectsBadIndices) {
  const auto s = two_by_two();
  PolicyProfile p(std::vector<Policy>{Policy(s, 0, {{{1, 0}}}), Policy(s, 1, {{{0, 1}}})});
  EXPECT_THROW(joint_action_distribution(p, 1, 0), DimensionError);
  EXPECT_THROW(joint_action_distribution(p, 0, 2), DimensionError);
}

TEST(JointActionDistribution, SumsToOneAndFactorsOnRandomInstances) {
  for (std::size_t k = 0; k < 200; ++k) {
    const auto inst = testutil::instance_for(11, k);
    const auto& p = inst.pi_star;
    for (std::size_t t = 0; t < p.horizon(); ++t)
      for (StateIndex x = 0; x < p.n_states(); ++x) {
        const auto d = joint_action_distribution(p, x, t);
        EXPECT_NEAR(std::accumulate(d.begin(), d.end(), 0.0), 1.0, kNormTolerance);
        for (JointAction u = 0; u < d.size(); ++u) {
          double prod = 1.0;
          const auto a = inst.spaces.decode(u);
          for (std::size_t i = 0; i < a.size(); ++i) prod *= p[i].prob(t, x, a[i]);
          EXPECT_DOUBLE_EQ(d[u], prod);
          EXPECT_DOUBLE_EQ(d[u], oracle::joint_prob(p, t, x, u));
        }
      }
  }
}

TEST(JointActionEncoding, RowMajorLastParticipantFastest) {
  FiniteSpaces s({"a"}, {{"x", "y"}, {"p", "q", "r"}}, 2);
  EXPECT_EQ(s.n_joint_actions(), 6u);
  for (JointAction u = 0; u < 6; ++u) {
    const auto a = s.decode(u);
    EXPECT_EQ(a[0], u / 3);
    EXPECT_EQ(a[1], u % 3);
    EXPECT_EQ(s.encode(a), u);
  }
  EXPECT_EQ(s.joint_action_label(5), "(y,r)");
}

TEST(MarginalizeToStar, UniformGivesHalfHalf) {
  Factorization f({"L", "R"}, {"s1", "s2"});
  const Row row(4, 0.25);
  const auto m = marginalize_to_star(row, f);
  EXPECT_DOUBLE_EQ(m[0], 0.5);
  EXPECT_DOUBLE_EQ(m[1], 0.5);
}

TEST(MarginalizeToStar, HandSummation) {
  Factorization f({"L", "R"}, {"s1", "s2"});
  const Row row{0.4, 0.1, 0.3, 0.2};
  const auto m = marginalize_to_star(row, f);
  EXPECT_NEAR(m[0], 0.5, 1e-15);
  EXPECT_NEAR(m[1], 0.5, 1e-15);
}

TEST(MarginalizeToStar, PointMass) {
  Factorization f({"L", "R"}, {"s1", "s2"});
  const Row row{0, 0, 0, 1};
  const auto m = marginalize_to_star(row, f);
  EXPECT_EQ(m, (std::vector<double>{0.0, 1.0}));
}

TEST(MarginalizeToStar, MissingFactorizationIsConfigurationError) {
  const Row row{0.5, 0.5};
  EXPECT_THROW(marginalize_to_star(row, std::nullopt), ConfigurationError);
}

TEST(Factorization, ExplicitBijectionRoundTripsAndPreservesMass) {
  Rng rng = make_rng(5, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t ns = 1 + uniform_index(rng, 4);
    const std::size_t nb = 1 + uniform_index(rng, 4);
    std::vector<std::string> star, bot;
    for (std::size_t s = 0; s < ns; ++s) star.push_back("s" + std::to_string(s));
    for (std::size_t b = 0; b < nb; ++b) bot.push_back("b" + std::to_string(b));
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t s = 0; s < ns; ++s)
      for (std::size_t b = 0; b < nb; ++b) pairs.emplace_back(s, b);
    shuffle(pairs, rng);
    Factorization f(star, bot, pairs);
    for (ActionIndex a = 0; a < f.n_actions(); ++a) EXPECT_EQ(f.action_of(f.star_of(a), f.bot_of(a)), a);
    const Row row = sample_dirichlet(rng, f.n_actions(), 1.0);
    const auto m = marginalize_to_star(row, f);
    EXPECT_NEAR(std::accumulate(m.begin(), m.end(), 0.0), std::accumulate(row.begin(), row.end(), 0.0),
                kNormTolerance);
  }
}

TEST(Factorization, RejectsNonInjectiveAndWrongSize) {
  EXPECT_THROW(Factorization({"L", "R"}, {"s"}, {{0, 0}, {0, 0}}), ValidationError);
  EXPECT_THROW(Factorization({"L", "R"}, {"s"}, {{0, 0}}), ValidationError);
  EXPECT_THROW(Factorization({"L", "L"}, {"s"}), ValidationError);
  EXPECT_THROW(FiniteSpaces({"a"}, {{"0", "1", "2"}}, 2, Factorization({"L", "R"}, {"s"})), ValidationError);
}

TEST(Factorization, PerParticipantComposition) {
  FiniteSpaces s({"a"}, {{"L1", "L2", "R1", "R2"}, {"x", "y"}}, 2,
                 std::vector<Factorization>{Factorization({"L", "R"}, {"1", "2"}), Factorization({"x", "y"}, {"-"})});
  const auto& f = *s.factorization();
  EXPECT_EQ(f.n_star(), 4u);
  EXPECT_EQ(f.n_bot(), 2u);
  EXPECT_EQ(f.star_labels()[1], "L,y");
  EXPECT_EQ(f.bot_labels()[1], "2,-");
  for (JointAction u = 0; u < s.n_joint_actions(); ++u) {
    const auto a = s.decode(u);
    EXPECT_EQ(f.star_of(u), (a[0] / 2) * 2 + a[1]);
    EXPECT_EQ(f.bot_of(u), a[0] % 2);
  }
}

TEST(Validation, GoodRowIsOk) {
  FiniteSpaces s({"a"}, {{"0", "1"}}, 2);
  EXPECT_TRUE(validate_policy_tables(s, 0, {{{0.5, 0.5}}}).empty());
}

TEST(Validation, RowSumViolationNamesLocation) {
  FiniteSpaces s({"a"}, {{"0", "1"}}, 2);
  const auto v = validate_policy_tables(s, 0, {{{0.5, 0.6}}});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].message, "row sum 1.1 at (t=0,x=a)");
  EXPECT_THROW(Policy(s, 0, {{{0.5, 0.6}}}), ValidationError);
}

TEST(Validation, EmptyStateList) {
  const auto v = validate_spaces({}, {{"0"}}, 2);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0].message, "empty 𝒳");
  EXPECT_THROW(FiniteSpaces({}, {{"0"}}, 2), ValidationError);
}

TEST(Validation, SpacesInvariants) {
  EXPECT_FALSE(validate_spaces({"a", "a"}, {{"0"}}, 2).empty());
  EXPECT_FALSE(validate_spaces({"a"}, {{}}, 2).empty());
  EXPECT_FALSE(validate_spaces({"a"}, {{"0", "0"}}, 2).empty());
  EXPECT_FALSE(validate_spaces({"a"}, {{"0"}}, 1).empty());
  EXPECT_FALSE(validate_spaces({"a"}, {}, 2).empty());
  EXPECT_TRUE(validate_spaces({"a"}, {{"0"}}, 2).empty());
}

TEST(Validation, ReportsEveryViolation) {
  FiniteSpaces s({"a", "b"}, {{"0", "1"}}, 3);
  const auto v = validate_policy_tables(s, 0, {{{0.5, 0.6}, {-0.1, 1.1}}, {{1, 0}, {1, 0}}, {{0.2, 0.2}, {1, 0}}});
  ASSERT_EQ(v.size(), 3u);
  EXPECT_NE(v[1].message.find("(t=0,x=b)"), std::string::npos);
  EXPECT_EQ(v[2].message, "row sum 0.4 at (t=2,x=a)");
  EXPECT_FALSE(validate_policy_tables(s, 0, {{{1, 0}, {1, 0}}, {{1, 0}, {1, 0}}}).empty());
  EXPECT_FALSE(validate_policy_tables(s, 1, {{{1, 0}, {1, 0}}}).empty());
}

TEST(Validation, KernelAndPayoff) {
  FiniteSpaces s({"a", "b"}, {{"0", "1"}}, 2);
  KernelTables k(1, {{{1, 0}, {0.5, 0.6}}, {{0, 1}, {0, 1}}});
  const auto v = validate_kernel_tables(s, k);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].message, "row sum 1.1 at (t=0,x=a,u=1)");
  EXPECT_THROW(Mechanism(s, k), ValidationError);
  EXPECT_FALSE(validate_kernel_tables(s, KernelTables(2, k[0])).size() == 0);
  EXPECT_FALSE(validate_payoff_values(s, {{0.0}, {std::nan("")}}).empty());
  EXPECT_FALSE(validate_payoff_values(s, {{0.0}}).empty());
  EXPECT_TRUE(validate_payoff_values(s, {{0.0}, {1.0}}).empty());
}

TEST(Validation, IdempotentAndSideEffectFree) {
  FiniteSpaces s({"a"}, {{"0", "1"}}, 2);
  const PolicyTables tables{{{0.5, 0.6}}};
  const PolicyTables copy = tables;
  const auto v1 = validate_policy_tables(s, 0, tables);
  const auto v2 = validate_policy_tables(s, 0, tables);
  ASSERT_EQ(v1.size(), v2.size());
  for (std::size_t k = 0; k < v1.size(); ++k) EXPECT_EQ(v1[k].message, v2[k].message);
  EXPECT_EQ(tables, copy);
}

TEST(Validation, RenormalizesWithinTolerance) {
  FiniteSpaces s({"a"}, {{"0", "1"}}, 2);
  Policy p(s, 0, {{{0.5, 0.5 + 5e-10}}});
  EXPECT_NEAR(p.prob(0, 0, 0) + p.prob(0, 0, 1), 1.0, 1e-15);
}

TEST(PolicyProfile, RejectsWrongParticipantOrder) {
  const auto s = two_by_two();
  auto p0 = std::make_shared<const Policy>(s, 0, PolicyTables{{{1, 0}}});
  auto p1 = std::make_shared<const Policy>(s, 1, PolicyTables{{{1, 0}}});
  EXPECT_THROW(PolicyProfile(std::vector<PolicyPtr>{p1, p0}), ValidationError);
  EXPECT_THROW(PolicyProfile(std::vector<PolicyPtr>{p0, nullptr}), ValidationError);
  EXPECT_THROW(PolicyProfile(std::vector<PolicyPtr>{}), ValidationError);
  EXPECT_NO_THROW(PolicyProfile(std::vector<PolicyPtr>{p0, p1}));
}

TEST(Policy, StationaryTableIsReused) {
  FiniteSpaces s({"a", "b"}, {{"0", "1"}}, 4);
  Policy p(s, 0, {{{0.1, 0.9}, {1, 0}}});
  EXPECT_TRUE(p.stationary());
  for (std::size_t t = 0; t < 4; ++t) EXPECT_DOUBLE_EQ(p.prob(t, 0, 1), 0.9);
  EXPECT_THROW(p.row(4, 0), DimensionError);
}

TEST(TypeProfile, LengthMustMatchParticipants) {
  const auto s = two_by_two();
  EXPECT_NO_THROW(TypeProfile(s, {"x", "y"}));
  EXPECT_THROW(TypeProfile(s, {"x"}), ValidationError);
}

TEST(BotInvariance, DetectsDependenceOnBot) {
  const auto g2 = make_g2();
  EXPECT_TRUE(is_bot_invariant(g2.mechanisms[0], *g2.spaces.factorization()));
  auto k = g2.mechanisms[0].tables();
  k[0][0][1] = {0, 0, 1};
  EXPECT_FALSE(is_bot_invariant(Mechanism(g2.spaces, k), *g2.spaces.factorization()));
}

TEST(QFunction, TerminalIgnoresAction) {
  const auto g1 = make_g1();
  const auto q = QFunction::terminal(g1.payoff, 2);
  EXPECT_TRUE(q.action_invariant());
  EXPECT_DOUBLE_EQ(q(1, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(q(1, 1, 0), 1.0);
  EXPECT_DOUBLE_EQ(q(0, 1, 0), 0.0);
  EXPECT_THROW(q(2, 0, 0), DimensionError);
}

}  // namespace
}  // namespace repsim
