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

// Finite-horizon value functions by backward recursion.

#pragma once

#include <vector>

#include "repsim/core.hpp"
#include "repsim/rollout.hpp"

namespace repsim {

/// V(x') = E_{u' ~ pi^t(.|x')} Q(x', u') for every state.
inline std::vector<double> policy_average(const PolicyProfile& profile, std::size_t t, const QFunction& q) {
  const std::size_t n = q.n_participants();
  std::vector<double> v(q.n_states() * n, 0.0);
  for (StateIndex x = 0; x < q.n_states(); ++x) {
    for_each_joint_action(profile, t, x, [&](JointAction u, double p) {
      auto row = q.at(x, u);
      for (std::size_t i = 0; i < n; ++i) v[x * n + i] += p * row[i];
    });
  }
  return v;
}

/// (B^t Q)(x, u) = E_{x' ~ tau^t(.|x,u)} V(x') given V from policy_average.
template <TransitionModel M>
QFunction backup(const M& mechanism, std::size_t t, std::span<const double> next_values, std::size_t n_participants) {
  QFunction out(mechanism.n_states(), mechanism.n_joint_actions(), n_participants);
  for (StateIndex x = 0; x < mechanism.n_states(); ++x)
    for (JointAction u = 0; u < mechanism.n_joint_actions(); ++u) {
      auto cell = out.at(x, u);
      mechanism.for_each_successor(t, x, u, [&](StateIndex y, double p) {
        for (std::size_t i = 0; i < n_participants; ++i) cell[i] += p * next_values[y * n_participants + i];
      });
    }
  out.timestep = t;
  return out;
}

/// Bellman operator at step t (0 <= t <= T-2): uses kernel tau^t and the
/// policy table at t+1.
template <TransitionModel M>
QFunction bellman_apply(const PolicyProfile& profile, const M& mechanism, std::size_t t, const QFunction& q_next) {
  check_compatible(profile, mechanism);
  if (t + 1 >= profile.horizon()) throw DimensionError("Bellman timestep " + std::to_string(t) + " out of range");
  if (q_next.n_states() != profile.n_states() || q_next.n_joint_actions() != profile.n_joint_actions())
    throw DimensionError("Q table does not match the spaces");
  const auto v = policy_average(profile, t + 1, q_next);
  return backup(mechanism, t, v, q_next.n_participants());
}

/// Q^0 .. Q^{T-1}, with Q^{T-1}(x, u) = g(x) and Q^t = B^t Q^{t+1}.
template <TransitionModel M>
std::vector<QFunction> value_functions(const PolicyProfile& profile, const M& mechanism, const PayoffTable& payoff) {
  check_compatible(profile, mechanism);
  if (payoff.n_states() != profile.n_states() || payoff.n_participants() != profile.size())
    throw DimensionError("payoff table does not match the profile");
  const std::size_t horizon = profile.horizon();
  std::vector<QFunction> qs(horizon, QFunction(0, 0, 0));
  qs[horizon - 1] = QFunction::terminal(payoff, profile.n_joint_actions());
  qs[horizon - 1].timestep = horizon - 1;
  for (std::size_t t = horizon - 1; t-- > 0;) qs[t] = bellman_apply(profile, mechanism, t, qs[t + 1]);
  return qs;
}

/// Backward recursion from an arbitrary terminal table: Q^0 .. Q^{T-1}.
template <TransitionModel M>
std::vector<QFunction> value_functions_from(const PolicyProfile& profile, const M& mechanism,
                                            const QFunction& terminal) {
  const std::size_t horizon = profile.horizon();
  std::vector<QFunction> qs(horizon, QFunction(0, 0, 0));
  qs[horizon - 1] = terminal;
  for (std::size_t t = horizon - 1; t-- > 0;) qs[t] = bellman_apply(profile, mechanism, t, qs[t + 1]);
  return qs;
}

/// B^0 o ... o B^{T-2} applied to `terminal`; returns Q^0.
template <TransitionModel M>
QFunction compose_backups(const PolicyProfile& profile, const M& mechanism, const QFunction& terminal) {
  QFunction q = terminal;
  for (std::size_t t = profile.horizon() - 1; t-- > 0;) q = bellman_apply(profile, mechanism, t, q);
  return q;
}

/// Expected payoffs E_{omega ~ f(pi, tau)} g(omega) from the outcome law.
template <TransitionModel M>
std::vector<double> expected_payoff_vector(const PolicyProfile& profile, const M& mechanism,
                                           std::span<const double> init, const PayoffTable& payoff) {
  return expected_payoffs(outcome_distribution_exact(profile, mechanism, init), payoff);
}

/// The same quantity through the value recursion:
/// sum_x init(x) E_{u ~ pi^0(.|x)} Q^0(x, u).
template <TransitionModel M>
std::vector<double> expected_payoff_from_values(const PolicyProfile& profile, const M& mechanism,
                                                std::span<const double> init, const PayoffTable& payoff) {
  if (init.size() != profile.n_states()) throw DimensionError("initial distribution has wrong length");
  const auto qs = value_functions(profile, mechanism, payoff);
  const auto v = policy_average(profile, 0, qs[0]);
  const std::size_t n = profile.size();
  std::vector<double> out(n, 0.0);
  for (StateIndex x = 0; x < profile.n_states(); ++x)
    for (std::size_t i = 0; i < n; ++i) out[i] += init[x] * v[x * n + i];
  return out;
}

}  // namespace repsim
