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

// Reference instances and random generators for small decision processes,
// plus candidate model profiles around a true profile.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "repsim/core.hpp"
#include "repsim/equivalence.hpp"
#include "repsim/random.hpp"

namespace repsim {

/// A self-contained decision process with a true profile.
struct Instance {
  std::string name;
  FiniteSpaces spaces;
  PolicyProfile pi_star;
  std::vector<Mechanism> mechanisms;
  PayoffTable payoff;
  std::vector<double> init;

  /// Terminal family {g}.
  QFamily payoff_family() const { return {QFunction::terminal(payoff, spaces.n_joint_actions())}; }
};

namespace detail {

inline PolicyTables constant_tables(std::size_t n_states, Row row) {
  return PolicyTables(1, std::vector<Row>(n_states, std::move(row)));
}

}  // namespace detail

/// n=1, X={a,b}, U={0,1}, T=2; a -0-> a, a -1-> b, b absorbing;
/// pi*(.|x) = (0.7, 0.3); g(a)=0, g(b)=1.
inline Instance make_g1() {
  FiniteSpaces spaces({"a", "b"}, {{"0", "1"}}, 2);
  KernelTables k(1, {{{1, 0}, {0, 1}}, {{0, 1}, {0, 1}}});
  Instance inst{"G1",
                spaces,
                PolicyProfile(std::vector<Policy>{Policy(spaces, 0, detail::constant_tables(2, {0.7, 0.3}))}),
                {Mechanism(spaces, k)},
                PayoffTable(spaces, {{0.0}, {1.0}}),
                point_mass(2, 0)};
  return inst;
}

/// Deterministic single-action-choice profile on G1's spaces.
inline PolicyProfile g1_deterministic_policy(const FiniteSpaces& spaces, ActionIndex action) {
  Row row(2, 0.0);
  row.at(action) = 1.0;
  return PolicyProfile(std::vector<Policy>{Policy(spaces, 0, detail::constant_tables(2, row))});
}

/// n=1, X={a,b,c}, U={L,R}x{s1,s2}, T=2; (a,(L,.)) -> b, (a,(R,.)) -> c,
/// b and c absorbing; pi* uniform; g = (0, 1, 0).
inline Instance make_g2() {
  FiniteSpaces spaces({"a", "b", "c"}, {{"L,s1", "L,s2", "R,s1", "R,s2"}}, 2,
                      std::vector<Factorization>{Factorization({"L", "R"}, {"s1", "s2"})});
  const Row to_b{0, 1, 0}, to_c{0, 0, 1};
  KernelTables k(1, {{to_b, to_b, to_c, to_c}, {to_b, to_b, to_b, to_b}, {to_c, to_c, to_c, to_c}});
  Instance inst{"G2",
                spaces,
                PolicyProfile(std::vector<Policy>{Policy(spaces, 0, detail::constant_tables(3, Row(4, 0.25)))}),
                {Mechanism(spaces, k)},
                PayoffTable(spaces, {{0.0}, {1.0}, {0.0}}),
                point_mass(3, 0)};
  return inst;
}

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

struct RandomInstanceOptions {
  std::size_t max_states = 6;
  /// Bound on the joint action count.
  std::size_t max_joint_actions = 6;
  std::size_t max_horizon = 4;
  std::size_t max_participants = 3;
  std::size_t n_mechanisms = 2;
  /// Probability that a kernel row is deterministic.
  double deterministic_row_prob = 0.3;
  /// Attach star/bot factorizations and make every kernel ignore bot.
  bool bot_invariant = false;
  /// Dirichlet concentration for policy rows.
  double policy_concentration = 1.0;
  double payoff_scale = 1.0;
};

namespace detail {

inline Row random_row(Rng& rng, std::size_t k, double concentration, double deterministic_prob) {
  if (deterministic_prob > 0.0 && uniform01(rng) < deterministic_prob) {
    Row r(k, 0.0);
    r[uniform_index(rng, k)] = 1.0;
    return r;
  }
  return sample_dirichlet(rng, k, concentration);
}

inline std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(prefix + std::to_string(k));
  return out;
}

// Per-participant (star, bot) sizes with product of star*bot <= max_joint and
// at least one bot factor of size > 1.
inline std::vector<std::pair<std::size_t, std::size_t>> random_factor_sizes(Rng& rng, std::size_t n,
                                                                            std::size_t max_joint) {
  std::vector<std::pair<std::size_t, std::size_t>> sizes(n, {1, 1});
  const std::size_t carrier = uniform_index(rng, n);
  sizes[carrier].second = 2;
  std::size_t joint = 2;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t room = max_joint / joint;
    if (room < 2) continue;
    sizes[i].first = 1 + uniform_index(rng, std::min<std::size_t>(room, 3));
    joint *= sizes[i].first;
  }
  return sizes;
}

}  // namespace detail

/// Random instance; every participant has at least one action and the joint
/// action count stays within options.max_joint_actions.
inline Instance random_instance(Rng& rng, const RandomInstanceOptions& options = {}) {
  const std::size_t n_states = 1 + uniform_index(rng, options.max_states);
  const std::size_t horizon = 2 + uniform_index(rng, options.max_horizon - 1);
  const std::size_t n = 1 + uniform_index(rng, options.max_participants);
  const auto states = detail::numbered("x", n_states);

  std::vector<std::vector<std::string>> actions;
  std::optional<FiniteSpaces> spaces;
  if (options.bot_invariant) {
    const auto sizes = detail::random_factor_sizes(rng, n, options.max_joint_actions);
    std::vector<Factorization> fs;
    for (std::size_t i = 0; i < n; ++i) {
      const auto star = detail::numbered("a", sizes[i].first);
      const auto bot = detail::numbered("s", sizes[i].second);
      std::vector<std::string> labels;
      for (const auto& s : star)
        for (const auto& b : bot) labels.push_back(s + "." + b);
      actions.push_back(labels);
      fs.emplace_back(star, bot);
    }
    spaces.emplace(states, actions, horizon, std::move(fs));
  } else {
    std::size_t joint = 1;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t room = options.max_joint_actions / joint;
      const std::size_t k = 1 + uniform_index(rng, std::max<std::size_t>(1, std::min<std::size_t>(room, 4)));
      joint *= k;
      actions.push_back(detail::numbered("a", k));
    }
    spaces.emplace(states, actions, horizon);
  }

  const std::size_t n_joint = spaces->n_joint_actions();
  std::vector<Mechanism> mechanisms;
  for (std::size_t m = 0; m < options.n_mechanisms; ++m) {
    const bool stationary = uniform01(rng) < 0.5;
    KernelTables k(stationary ? 1 : horizon - 1,
                   std::vector<std::vector<Row>>(n_states, std::vector<Row>(n_joint)));
    for (auto& step : k)
      for (auto& rows : step) {
        if (options.bot_invariant) {
          const Factorization& f = *spaces->factorization();
          std::vector<Row> by_star(f.n_star());
          for (auto& r : by_star) r = detail::random_row(rng, n_states, 1.0, options.deterministic_row_prob);
          for (JointAction u = 0; u < n_joint; ++u) rows[u] = by_star[f.star_of(u)];
        } else {
          for (auto& r : rows) r = detail::random_row(rng, n_states, 1.0, options.deterministic_row_prob);
        }
      }
    mechanisms.emplace_back(*spaces, k);
  }

  std::vector<Policy> policies;
  for (std::size_t i = 0; i < n; ++i) {
    PolicyTables tables(horizon, std::vector<Row>(n_states));
    for (auto& table : tables)
      for (auto& row : table) row = sample_dirichlet(rng, spaces->n_actions(i), options.policy_concentration);
    policies.emplace_back(*spaces, i, tables);
  }

  PayoffValues g(n_states, std::vector<double>(n));
  for (auto& row : g)
    for (double& v : row) v = options.payoff_scale * uniform01(rng);

  Instance inst{options.bot_invariant ? "random-bot-invariant" : "random",
                *spaces,
                PolicyProfile(std::move(policies)),
                std::move(mechanisms),
                PayoffTable(*spaces, g),
                sample_dirichlet(rng, n_states, 1.0)};
  return inst;
}

/// Terminal tables Q(x, u) = h(x) with h drawn uniformly from [-scale, scale].
inline QFunction random_terminal_q(Rng& rng, const FiniteSpaces& spaces, double scale = 1.0) {
  QFunction q(spaces.n_states(), spaces.n_joint_actions(), spaces.n_participants());
  for (StateIndex x = 0; x < spaces.n_states(); ++x)
    for (std::size_t i = 0; i < spaces.n_participants(); ++i) {
      const double v = uniform_in(rng, -scale, scale);
      for (JointAction u = 0; u < spaces.n_joint_actions(); ++u) q(x, u, i) = v;
    }
  return q;
}

// ---------------------------------------------------------------------------
// Candidate model profiles
// ---------------------------------------------------------------------------

namespace detail {

template <class RowFn>
PolicyProfile map_rows(const PolicyProfile& profile, const FiniteSpaces& spaces, RowFn&& fn) {
  std::vector<Policy> out;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    PolicyTables tables = profile[i].tables();
    for (std::size_t t = 0; t < tables.size(); ++t)
      for (StateIndex x = 0; x < tables[t].size(); ++x) tables[t][x] = fn(i, t, x, tables[t][x]);
    out.emplace_back(spaces, i, tables);
  }
  return PolicyProfile(std::move(out));
}

inline PolicyProfile as_nonstationary(const PolicyProfile& profile, const FiniteSpaces& spaces) {
  std::vector<Policy> out;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    PolicyTables tables = profile[i].tables();
    if (tables.size() == 1) tables.assign(spaces.horizon(), tables[0]);
    out.emplace_back(spaces, i, tables);
  }
  return PolicyProfile(std::move(out));
}

}  // namespace detail

/// (1 - eps) * pi* + eps * Dirichlet noise, row by row.
inline PolicyProfile dirichlet_jitter(const PolicyProfile& pi_star, const FiniteSpaces& spaces, Rng& rng, double eps,
                                      double concentration = 1.0) {
  return detail::map_rows(detail::as_nonstationary(pi_star, spaces), spaces,
                          [&](std::size_t, std::size_t, StateIndex, const Row& row) {
                            const Row noise = sample_dirichlet(rng, row.size(), concentration);
                            Row r(row.size());
                            for (std::size_t a = 0; a < row.size(); ++a) r[a] = (1 - eps) * row[a] + eps * noise[a];
                            return r;
                          });
}

/// Replaces a single (participant, t, x) row by a jittered copy.
inline PolicyProfile perturb_one_row(const PolicyProfile& pi_star, const FiniteSpaces& spaces, std::size_t participant,
                                     std::size_t t, StateIndex x, Rng& rng, double eps) {
  return detail::map_rows(detail::as_nonstationary(pi_star, spaces), spaces,
                          [&](std::size_t i, std::size_t tt, StateIndex xx, const Row& row) {
                            if (i != participant || tt != t || xx != x) return row;
                            const Row noise = sample_dirichlet(rng, row.size(), 1.0);
                            Row r(row.size());
                            for (std::size_t a = 0; a < row.size(); ++a) r[a] = (1 - eps) * row[a] + eps * noise[a];
                            return r;
                          });
}

/// Keeps every participant's star marginal and redraws the bot conditional
/// given star at random.
inline PolicyProfile star_preserving_redistribution(const PolicyProfile& pi_star, const FiniteSpaces& spaces,
                                                    Rng& rng) {
  const auto& fs = detail::require_participant_factorizations(spaces);
  return detail::map_rows(detail::as_nonstationary(pi_star, spaces), spaces,
                          [&](std::size_t i, std::size_t, StateIndex, const Row& row) {
                            const Factorization& f = fs[i];
                            const auto star = marginalize_to_star(row, f);
                            Row r(row.size(), 0.0);
                            for (std::size_t s = 0; s < f.n_star(); ++s) {
                              const Row split = sample_dirichlet(rng, f.n_bot(), 1.0);
                              for (std::size_t b = 0; b < f.n_bot(); ++b) r[f.action_of(s, b)] = star[s] * split[b];
                            }
                            return r;
                          });
}

/// Same tables except at t = 0, which only the entry step reads.
inline PolicyProfile first_step_variant(const PolicyProfile& pi_star, const FiniteSpaces& spaces, Rng& rng) {
  return detail::map_rows(detail::as_nonstationary(pi_star, spaces), spaces,
                          [&](std::size_t, std::size_t t, StateIndex, const Row& row) {
                            return t == 0 ? sample_dirichlet(rng, row.size(), 1.0) : row;
                          });
}

/// Importance-weighted Monte Carlo estimate of pi* whose weights cancel
/// analytically: each row is sum_k w_k pi*(.|x) / sum_k w_k over n_draws
/// random weights. It equals pi* up to floating-point error.
inline PolicyProfile mc_reweighted_copy(const PolicyProfile& pi_star, const FiniteSpaces& spaces, Rng& rng,
                                        std::size_t n_draws = 16) {
  return detail::map_rows(detail::as_nonstationary(pi_star, spaces), spaces,
                          [&](std::size_t, std::size_t, StateIndex, const Row& row) {
                            Row acc(row.size(), 0.0);
                            double total = 0.0;
                            for (std::size_t k = 0; k < n_draws; ++k) {
                              const double w = 0.1 + uniform01(rng);
                              total += w;
                              for (std::size_t a = 0; a < row.size(); ++a) acc[a] += w * row[a];
                            }
                            for (double& v : acc) v /= total;
                            return acc;
                          });
}

struct CandidateOptions {
  std::size_t n_jitter = 9;
  std::vector<double> jitter_scales{1e-3, 1e-1, 0.5};
  std::size_t n_redistribution = 2;
  bool include_first_step_variant = true;
  bool include_bot_pinned = true;
  std::size_t n_mc_copies = 0;
  std::size_t fixed_bot = 0;
};

/// pi* itself, Dirichlet jitters, a first-step-only variant, and when a
/// factorization exists the bot-pinned policy and star-preserving
/// redistributions.
inline std::vector<Candidate> generate_candidates(const Instance& inst, Rng& rng, const CandidateOptions& options = {}) {
  std::vector<Candidate> out;
  out.push_back({"pi_star", inst.pi_star});
  for (std::size_t k = 0; k < options.n_jitter; ++k) {
    const double eps = options.jitter_scales[k % options.jitter_scales.size()];
    out.push_back({"jitter-" + std::to_string(k), dirichlet_jitter(inst.pi_star, inst.spaces, rng, eps)});
  }
  if (options.include_first_step_variant)
    out.push_back({"first-step-variant", first_step_variant(inst.pi_star, inst.spaces, rng)});
  const bool factored = inst.spaces.factorization().has_value() &&
                        inst.spaces.participant_factorizations().size() == inst.spaces.n_participants();
  if (factored) {
    if (options.include_bot_pinned)
      out.push_back({"bot-pinned", build_bot_pinned_policy(inst.pi_star, inst.spaces, options.fixed_bot)});
    for (std::size_t k = 0; k < options.n_redistribution; ++k)
      out.push_back({"star-preserving-" + std::to_string(k), star_preserving_redistribution(inst.pi_star, inst.spaces, rng)});
  }
  for (std::size_t k = 0; k < options.n_mc_copies; ++k)
    out.push_back({"mc-derived-" + std::to_string(k), mc_reweighted_copy(inst.pi_star, inst.spaces, rng)});
  return out;
}

}  // namespace repsim
