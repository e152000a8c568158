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

// Outcome function: rolling a policy profile out through a mechanism, exactly
// (forward propagation of the state law) or by seeded Monte Carlo.

#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "repsim/core.hpp"
#include "repsim/parallel.hpp"
#include "repsim/random.hpp"

namespace repsim {

struct Trajectory {
  std::vector<StateIndex> states;          // x^0 .. x^{T-1}
  std::vector<JointAction> joint_actions;  // u^0 .. u^{T-2}
  /// (seed, sample index) when the trajectory came from a derived stream.
  std::vector<std::uint64_t> seed_path;
};

enum class OutcomeKind { exact, empirical };

struct OutcomeDistribution {
  std::vector<double> probs;
  OutcomeKind kind = OutcomeKind::exact;
  std::size_t n_samples = 0;

  double operator[](StateIndex x) const { return probs.at(x); }
};

inline std::vector<double> point_mass(std::size_t n, StateIndex x) {
  if (x >= n) throw DimensionError("state " + std::to_string(x) + " out of range");
  std::vector<double> p(n, 0.0);
  p[x] = 1.0;
  return p;
}

/// Samples x' ~ tau^t(. | x, u) with exactly one draw from rng.
template <TransitionModel M>
StateIndex step(const M& mechanism, std::size_t t, StateIndex x, JointAction u, Rng& rng) {
  if (t + 1 >= mechanism.horizon()) throw DimensionError("step timestep out of range");
  if (x >= mechanism.n_states() || u >= mechanism.n_joint_actions()) throw DimensionError("step index out of range");
  const double draw = uniform01(rng);
  double acc = 0.0;
  StateIndex chosen = std::numeric_limits<StateIndex>::max();
  StateIndex last = 0;
  mechanism.for_each_successor(t, x, u, [&](StateIndex y, double p) {
    last = y;
    if (chosen != std::numeric_limits<StateIndex>::max()) return;
    acc += p;
    if (draw < acc) chosen = y;
  });
  return chosen == std::numeric_limits<StateIndex>::max() ? last : chosen;
}

/// Samples a joint action at (t, x): one draw per participant, in index order.
inline JointAction sample_joint_action(const PolicyProfile& profile, std::size_t t, StateIndex x, Rng& rng) {
  JointAction joint = 0;
  for (std::size_t i = 0; i < profile.size(); ++i)
    joint += sample_index(profile[i].row(t, x), rng) * profile.stride(i);
  return joint;
}

template <TransitionModel M>
Trajectory rollout(const PolicyProfile& profile, const M& mechanism, StateIndex init_state, Rng& rng) {
  check_compatible(profile, mechanism);
  if (init_state >= profile.n_states()) throw DimensionError("initial state out of range");
  const std::size_t horizon = profile.horizon();
  Trajectory traj;
  traj.states.reserve(horizon);
  traj.joint_actions.reserve(horizon - 1);
  traj.states.push_back(init_state);
  for (std::size_t t = 0; t + 1 < horizon; ++t) {
    const JointAction u = sample_joint_action(profile, t, traj.states.back(), rng);
    traj.joint_actions.push_back(u);
    traj.states.push_back(step(mechanism, t, traj.states.back(), u, rng));
  }
  return traj;
}

/// Rollout on the index-th stream derived from seed.
template <TransitionModel M>
Trajectory rollout_seeded(const PolicyProfile& profile, const M& mechanism, StateIndex init_state,
                          std::uint64_t seed, std::uint64_t index) {
  Rng rng = make_rng(seed, index);
  Trajectory traj = rollout(profile, mechanism, init_state, rng);
  traj.seed_path = {seed, index};
  return traj;
}

/// Law of x^t for every t, propagated forward from `init`.
template <TransitionModel M>
std::vector<std::vector<double>> state_marginals(const PolicyProfile& profile, const M& mechanism,
                                                 std::span<const double> init) {
  check_compatible(profile, mechanism);
  const std::size_t n = profile.n_states();
  if (init.size() != n) throw DimensionError("initial distribution has wrong length");
  std::vector<std::vector<double>> marginals;
  marginals.emplace_back(init.begin(), init.end());
  for (std::size_t t = 0; t + 1 < profile.horizon(); ++t) {
    const auto& cur = marginals.back();
    std::vector<double> next(n, 0.0);
    for (StateIndex x = 0; x < n; ++x) {
      if (cur[x] == 0.0) continue;
      for_each_joint_action(profile, t, x, [&](JointAction u, double pu) {
        const double w = cur[x] * pu;
        mechanism.for_each_successor(t, x, u, [&](StateIndex y, double py) { next[y] += w * py; });
      });
    }
    marginals.push_back(std::move(next));
  }
  return marginals;
}

template <TransitionModel M>
OutcomeDistribution outcome_distribution_exact(const PolicyProfile& profile, const M& mechanism,
                                               std::span<const double> init) {
  auto marginals = state_marginals(profile, mechanism, init);
  return {std::move(marginals.back()), OutcomeKind::exact, 0};
}

template <TransitionModel M>
OutcomeDistribution outcome_distribution_exact(const PolicyProfile& profile, const M& mechanism,
                                               StateIndex init_state) {
  const auto init = point_mass(profile.n_states(), init_state);
  return outcome_distribution_exact(profile, mechanism, init);
}

/// Empirical terminal-state frequencies over n_samples rollouts. Sample k uses
/// the stream derive_seed(seed, k), so the result is independent of `threads`.
template <TransitionModel M>
OutcomeDistribution outcome_distribution_mc(const PolicyProfile& profile, const M& mechanism,
                                            StateIndex init_state, std::size_t n_samples, std::uint64_t seed,
                                            std::size_t threads = 1) {
  if (n_samples == 0) throw ArgumentError("n_samples must be at least 1");
  check_compatible(profile, mechanism);
  if (init_state >= profile.n_states()) throw DimensionError("initial state out of range");
  const std::size_t n = profile.n_states();
  const std::size_t blocks = std::min<std::size_t>(n_samples, 64);
  std::vector<std::vector<std::uint64_t>> counts(blocks, std::vector<std::uint64_t>(n, 0));
  parallel_for(blocks, threads, [&](std::size_t b) {
    const std::size_t begin = n_samples * b / blocks;
    const std::size_t end = n_samples * (b + 1) / blocks;
    for (std::size_t k = begin; k < end; ++k) {
      Rng rng = make_rng(seed, k);
      const Trajectory traj = rollout(profile, mechanism, init_state, rng);
      ++counts[b][traj.states.back()];
    }
  });
  OutcomeDistribution out{std::vector<double>(n, 0.0), OutcomeKind::empirical, n_samples};
  for (StateIndex x = 0; x < n; ++x) {
    std::uint64_t c = 0;
    for (const auto& block : counts) c += block[x];
    out.probs[x] = static_cast<double>(c) / static_cast<double>(n_samples);
  }
  return out;
}

/// Expected utilitarian welfare: sum_omega p(omega) * mean_i g_i(omega).
inline double expected_welfare(const OutcomeDistribution& outcome, const PayoffTable& payoff) {
  if (outcome.probs.size() != payoff.n_states()) throw DimensionError("outcome and payoff disagree on states");
  double total = 0.0;
  for (StateIndex x = 0; x < payoff.n_states(); ++x) {
    if (outcome.probs[x] == 0.0) continue;
    double mean = 0.0;
    for (double g : payoff.at(x)) mean += g;
    total += outcome.probs[x] * mean / static_cast<double>(payoff.n_participants());
  }
  return total;
}

/// Expected payoff vector sum_omega p(omega) g(omega).
inline std::vector<double> expected_payoffs(const OutcomeDistribution& outcome, const PayoffTable& payoff) {
  if (outcome.probs.size() != payoff.n_states()) throw DimensionError("outcome and payoff disagree on states");
  std::vector<double> out(payoff.n_participants(), 0.0);
  for (StateIndex x = 0; x < payoff.n_states(); ++x) {
    if (outcome.probs[x] == 0.0) continue;
    auto g = payoff.at(x);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += outcome.probs[x] * g[i];
  }
  return out;
}

struct MechanismSelection {
  std::size_t index = 0;
  double welfare = 0.0;
  /// Every member attaining the maximum, in family order.
  std::vector<std::size_t> argmax_set;
  std::vector<double> welfare_by_member;
};

/// Utilitarian choice over a finite family; ties go to the lowest index.
/// `Family` needs size() and operator[] yielding a TransitionModel.
template <class Family>
MechanismSelection select_utilitarian_mechanism(const Family& family, const PolicyProfile& profile,
                                                const PayoffTable& payoff, std::span<const double> init) {
  if (family.size() == 0) throw ArgumentError("mechanism family is empty");
  MechanismSelection sel;
  for (std::size_t k = 0; k < family.size(); ++k) {
    const double w = expected_welfare(outcome_distribution_exact(profile, family[k], init), payoff);
    sel.welfare_by_member.push_back(w);
    if (k == 0 || w > sel.welfare) {
      sel.welfare = w;
      sel.index = k;
    }
  }
  for (std::size_t k = 0; k < family.size(); ++k)
    if (sel.welfare_by_member[k] == sel.welfare) sel.argmax_set.push_back(k);
  return sel;
}

}  // namespace repsim
