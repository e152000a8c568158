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

#include "oracle.hpp"
#include "repsim/repsim.hpp"
#include "test_util.hpp"

namespace repsim {
namespace {

TEST(Bellman, ConstantIsFixed) {
  for (std::size_t k = 0; k < 50; ++k) {
    const auto inst = testutil::instance_for(71, k);
    QFunction c(inst.spaces.n_states(), inst.spaces.n_joint_actions(), inst.spaces.n_participants(), 2.5);
    for (std::size_t t = 0; t + 1 < inst.spaces.horizon(); ++t) {
      const auto out = bellman_apply(inst.pi_star, inst.mechanisms[0], t, c);
      for (double v : out.values()) EXPECT_NEAR(v, 2.5, 1e-12);
      EXPECT_EQ(out.timestep, t);
    }
  }
}

TEST(Bellman, G1Payoff) {
  const auto g1 = make_g1();
  const auto out = bellman_apply(g1.pi_star, g1.mechanisms[0], 0, QFunction::terminal(g1.payoff, 2));
  EXPECT_DOUBLE_EQ(out(0, 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(out(0, 1, 0), 1.0);
}

TEST(Bellman, RejectsBadTimestepAndShape) {
  const auto g1 = make_g1();
  const auto q = QFunction::terminal(g1.payoff, 2);
  EXPECT_THROW(bellman_apply(g1.pi_star, g1.mechanisms[0], 1, q), DimensionError);
  EXPECT_THROW(bellman_apply(g1.pi_star, g1.mechanisms[0], 0, QFunction(3, 2, 1)), DimensionError);
}

TEST(Bellman, LinearityOnRandomInstances) {
  Rng rng = make_rng(72, 0);
  for (std::size_t k = 0; k < 100; ++k) {
    const auto inst = testutil::instance_for(72, k + 1);
    const auto& s = inst.spaces;
    const auto q1 = testutil::random_q(rng, s.n_states(), s.n_joint_actions(), s.n_participants());
    const auto q2 = testutil::random_q(rng, s.n_states(), s.n_joint_actions(), s.n_participants());
    const double a = uniform_in(rng, -2, 2), b = uniform_in(rng, -2, 2);
    for (std::size_t t = 0; t + 1 < s.horizon(); ++t) {
      const auto& m = inst.mechanisms[0];
      const auto lhs = bellman_apply(inst.pi_star, m, t, a * q1 + b * q2);
      const auto rhs = a * bellman_apply(inst.pi_star, m, t, q1) + b * bellman_apply(inst.pi_star, m, t, q2);
      EXPECT_LE(max_abs_diff(lhs, rhs), 1e-9);
    }
  }
}

TEST(Bellman, ScalingSpotCheck) {
  const auto g1 = make_g1();
  const auto q = QFunction::terminal(g1.payoff, 2);
  const auto lhs = bellman_apply(g1.pi_star, g1.mechanisms[0], 0, 2.0 * q);
  const auto rhs = 2.0 * bellman_apply(g1.pi_star, g1.mechanisms[0], 0, q);
  EXPECT_EQ(max_abs_diff(lhs, rhs), 0.0);
}

TEST(Bellman, Monotone) {
  Rng rng = make_rng(73, 0);
  for (std::size_t k = 0; k < 100; ++k) {
    const auto inst = testutil::instance_for(73, k + 1);
    const auto& s = inst.spaces;
    const auto q1 = testutil::random_q(rng, s.n_states(), s.n_joint_actions(), s.n_participants());
    auto q2 = q1;
    for (double& v : q2.values()) v += uniform01(rng);
    for (std::size_t t = 0; t + 1 < s.horizon(); ++t) {
      const auto b1 = bellman_apply(inst.pi_star, inst.mechanisms[1], t, q1);
      const auto b2 = bellman_apply(inst.pi_star, inst.mechanisms[1], t, q2);
      for (std::size_t j = 0; j < b1.values().size(); ++j) EXPECT_LE(b1.values()[j], b2.values()[j] + 1e-15);
    }
  }
}

TEST(Bellman, MatchesPathEnumeration) {
  Rng rng = make_rng(74, 0);
  for (std::size_t k = 0; k < 60; ++k) {
    const auto inst = testutil::instance_for(74, k + 1);
    const auto& s = inst.spaces;
    const auto terminal = testutil::random_q(rng, s.n_states(), s.n_joint_actions(), s.n_participants());
    const auto qs = value_functions_from(inst.pi_star, inst.mechanisms[0], terminal);
    for (std::size_t t = 0; t < s.horizon(); ++t)
      for (StateIndex x = 0; x < s.n_states(); ++x)
        for (JointAction u = 0; u < s.n_joint_actions(); ++u)
          for (std::size_t i = 0; i < s.n_participants(); ++i)
            EXPECT_NEAR(qs[t](x, u, i), oracle::q_value(inst.pi_star, inst.mechanisms[0], terminal, t, x, u, i),
                        1e-12);
  }
}

TEST(ValueFunctions, G1) {
  const auto g1 = make_g1();
  const auto qs = value_functions(g1.pi_star, g1.mechanisms[0], g1.payoff);
  ASSERT_EQ(qs.size(), 2u);
  for (StateIndex x = 0; x < 2; ++x)
    for (JointAction u = 0; u < 2; ++u) EXPECT_EQ(qs[1](x, u, 0), g1.payoff(x, 0));
  EXPECT_DOUBLE_EQ(qs[0](0, 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(qs[0](0, 1, 0), 1.0);
  EXPECT_EQ(qs[1].timestep, 1u);
  EXPECT_EQ(qs[0].timestep, 0u);
}

TEST(ValueFunctions, ZeroPayoffsGiveZero) {
  const auto g1 = make_g1();
  const auto qs = value_functions(g1.pi_star, g1.mechanisms[0], PayoffTable(g1.spaces, {{0.0}, {0.0}}));
  for (const auto& q : qs)
    for (double v : q.values()) EXPECT_EQ(v, 0.0);
}

TEST(ValueFunctions, EqualsManualFold) {
  for (std::size_t k = 0; k < 100; ++k) {
    const auto inst = testutil::instance_for(75, k);
    for (const auto& m : inst.mechanisms) {
      const auto qs = value_functions(inst.pi_star, m, inst.payoff);
      ASSERT_EQ(qs.size(), inst.spaces.horizon());
      QFunction q = QFunction::terminal(inst.payoff, inst.spaces.n_joint_actions());
      EXPECT_EQ(max_abs_diff(qs.back(), q), 0.0);
      for (std::size_t t = inst.spaces.horizon() - 1; t-- > 0;) {
        q = bellman_apply(inst.pi_star, m, t, q);
        EXPECT_EQ(max_abs_diff(qs[t], q), 0.0);
      }
      EXPECT_EQ(max_abs_diff(compose_backups(inst.pi_star, m, qs.back()), qs[0]), 0.0);
    }
  }
}

TEST(ExpectedPayoff, G1AndTrivialCases) {
  const auto g1 = make_g1();
  const auto v = expected_payoff_vector(g1.pi_star, g1.mechanisms[0], g1.init, g1.payoff);
  EXPECT_NEAR(v[0], 0.3, 1e-15);
  EXPECT_NEAR(expected_payoff_from_values(g1.pi_star, g1.mechanisms[0], g1.init, g1.payoff)[0], 0.3, 1e-15);
  const PayoffTable zero(g1.spaces, {{0.0}, {0.0}});
  EXPECT_EQ(expected_payoff_vector(g1.pi_star, g1.mechanisms[0], g1.init, zero)[0], 0.0);

  FiniteSpaces s({"a", "w"}, {{"0"}, {"0"}}, 2);
  Mechanism to_w(s, KernelTables(1, {{{0, 1}}, {{0, 1}}}));
  PolicyProfile p(std::vector<Policy>{Policy(s, 0, {{{1}, {1}}}), Policy(s, 1, {{{1}, {1}}})});
  const PayoffTable g(s, {{0, 0}, {0.25, 0.75}});
  const std::vector<double> init{1.0, 0.0};
  EXPECT_EQ(expected_payoff_vector(p, to_w, init, g), (std::vector<double>{0.25, 0.75}));
  EXPECT_EQ(expected_payoff_from_values(p, to_w, init, g), (std::vector<double>{0.25, 0.75}));
}

TEST(ExpectedPayoff, DualPathConsistency) {
  for (std::size_t k = 0; k < 200; ++k) {
    const auto inst = testutil::instance_for(76, k);
    for (const auto& m : inst.mechanisms) {
      const auto a = expected_payoff_vector(inst.pi_star, m, inst.init, inst.payoff);
      const auto b = expected_payoff_from_values(inst.pi_star, m, inst.init, inst.payoff);
      const auto c = oracle::expected_payoff(inst.pi_star, m, inst.init, inst.payoff);
      testutil::expect_vectors_near(a, b, 1e-9);
      testutil::expect_vectors_near(a, c, 1e-9);
    }
  }
}

}  // namespace
}  // namespace repsim
