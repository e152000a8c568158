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

// Generators for property tests.

#pragma once

#include <gtest/gtest.h>

#include <cstdint>
#include <vector>

#include "repsim/repsim.hpp"

namespace testutil {

using namespace repsim;

/// Random instance from the (seed, k) stream; odd k gets a bot-invariant one.
inline Instance instance_for(std::uint64_t seed, std::size_t k, bool alternate_bot_invariant = true) {
  Rng rng = make_rng(seed, k);
  RandomInstanceOptions o;
  o.bot_invariant = alternate_bot_invariant && (k % 2 == 1);
  return random_instance(rng, o);
}

inline QFunction random_q(Rng& rng, std::size_t nx, std::size_t nu, std::size_t n, double lo = -1.0, double hi = 1.0) {
  QFunction q(nx, nu, n);
  for (double& v : q.values()) v = uniform_in(rng, lo, hi);
  return q;
}

inline void expect_vectors_near(std::span<const double> a, std::span<const double> b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], tol) << "index " << k;
}

/// Stationary profile with the given rows at every state.
inline PolicyProfile stationary_profile(const FiniteSpaces& spaces, const std::vector<Row>& per_participant_rows) {
  std::vector<Policy> ps;
  for (std::size_t i = 0; i < per_participant_rows.size(); ++i)
    ps.emplace_back(spaces, i, PolicyTables(1, std::vector<Row>(spaces.n_states(), per_participant_rows[i])));
  return PolicyProfile(std::move(ps));
}

}  // namespace testutil
