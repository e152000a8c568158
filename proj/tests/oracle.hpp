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

// Brute-force reference computations that enumerate every trajectory
// explicitly. They share only the table accessors with the library.

#pragma once

#include <functional>
#include <vector>

#include "repsim/core.hpp"
#include "repsim/random.hpp"

namespace oracle {

using namespace repsim;

/// prod_i pi_i^t(u_i | x), decoding u with participant n-1 fastest.
inline double joint_prob(const PolicyProfile& profile, std::size_t t, StateIndex x, JointAction u) {
  double p = 1.0;
  for (std::size_t i = profile.size(); i-- > 0;) {
    const std::size_t k = profile[i].n_actions();
    p *= profile[i].prob(t, x, u % k);
    u /= k;
  }
  return p;
}

template <class M>
double kernel_prob(const M& mech, std::size_t t, StateIndex x, JointAction u, StateIndex y) {
  double p = 0.0;
  mech.for_each_successor(t, x, u, [&](StateIndex z, double q) {
    if (z == y) p += q;
  });
  return p;
}

/// Calls visit(states, actions, probability) for every full trajectory with
/// non-zero probability from a fixed initial state.
template <class M>
void enumerate_paths(const PolicyProfile& profile, const M& mech, StateIndex x0,
                     const std::function<void(const std::vector<StateIndex>&, const std::vector<JointAction>&, double)>& visit) {
  const std::size_t T = profile.horizon();
  const std::size_t nx = profile.n_states();
  const std::size_t nu = profile.n_joint_actions();
  std::vector<StateIndex> xs{x0};
  std::vector<JointAction> us;
  std::function<void(double)> rec = [&](double p) {
    const std::size_t t = xs.size() - 1;
    if (t == T - 1) {
      visit(xs, us, p);
      return;
    }
    for (JointAction u = 0; u < nu; ++u) {
      const double pu = joint_prob(profile, t, xs.back(), u);
      if (pu == 0.0) continue;
      for (StateIndex y = 0; y < nx; ++y) {
        const double py = kernel_prob(mech, t, xs.back(), u, y);
        if (py == 0.0) continue;
        us.push_back(u);
        xs.push_back(y);
        rec(p * pu * py);
        xs.pop_back();
        us.pop_back();
      }
    }
  };
  rec(1.0);
}

template <class M>
std::vector<double> terminal_distribution(const PolicyProfile& profile, const M& mech, const std::vector<double>& init) {
  std::vector<double> out(profile.n_states(), 0.0);
  for (StateIndex x0 = 0; x0 < init.size(); ++x0) {
    if (init[x0] == 0.0) continue;
    enumerate_paths(profile, mech, x0, [&](const auto& xs, const auto&, double p) { out[xs.back()] += init[x0] * p; });
  }
  return out;
}

/// E[g(x^{T-1})] from the path enumeration.
template <class M>
std::vector<double> expected_payoff(const PolicyProfile& profile, const M& mech, const std::vector<double>& init,
                                    const PayoffTable& g) {
  const auto dist = terminal_distribution(profile, mech, init);
  std::vector<double> out(g.n_participants(), 0.0);
  for (StateIndex x = 0; x < dist.size(); ++x)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += dist[x] * g(x, i);
  return out;
}

/// Q^t(x, u): expectation of terminal(x^{T-1}, u^{T-1}) over every
/// continuation of (x^t, u^t) = (x, u), where u^{T-1} is drawn from the
/// terminal policy table.
template <class M>
double q_value(const PolicyProfile& profile, const M& mech, const QFunction& terminal, std::size_t t, StateIndex x,
               JointAction u, std::size_t i) {
  const std::size_t T = profile.horizon();
  if (t == T - 1) return terminal(x, u, i);
  double total = 0.0;
  // Enumerate every (x^{t+1}, u^{t+1}, ..., x^{T-1}, u^{T-1}) explicitly.
  std::function<void(std::size_t, StateIndex, JointAction, double)> rec = [&](std::size_t s, StateIndex xs,
                                                                              JointAction us, double p) {
    for (StateIndex y = 0; y < profile.n_states(); ++y) {
      const double py = kernel_prob(mech, s, xs, us, y);
      if (py == 0.0) continue;
      for (JointAction v = 0; v < profile.n_joint_actions(); ++v) {
        const double pv = joint_prob(profile, s + 1, y, v);
        if (pv == 0.0) continue;
        if (s + 1 == T - 1)
          total += p * py * pv * terminal(y, v, i);
        else
          rec(s + 1, y, v, p * py * pv);
      }
    }
  };
  rec(t, x, u, 1.0);
  return total;
}

}  // namespace oracle
