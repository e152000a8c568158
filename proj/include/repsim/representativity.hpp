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

// How far a model profile is from the true one, measured by expected terminal
// values: max over (tau, Q^T) of L(E_{f(pi*,tau)} Q^T, E_{f(pi~,tau)} Q^T).

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "repsim/core.hpp"
#include "repsim/equivalence.hpp"
#include "repsim/rollout.hpp"
#include "repsim/value.hpp"

namespace repsim {

enum class DiscrepancyKind { mean_absolute, max_absolute, euclidean };

inline std::string to_string(DiscrepancyKind k) {
  switch (k) {
    case DiscrepancyKind::mean_absolute: return "mean-absolute";
    case DiscrepancyKind::max_absolute: return "max-absolute";
    case DiscrepancyKind::euclidean: return "euclidean";
  }
  return "unknown";
}

inline DiscrepancyKind parse_discrepancy_kind(const std::string& s) {
  if (s == "mean-absolute") return DiscrepancyKind::mean_absolute;
  if (s == "max-absolute") return DiscrepancyKind::max_absolute;
  if (s == "euclidean") return DiscrepancyKind::euclidean;
  throw ArgumentError("unknown discrepancy '" + s + "'");
}

/// Elementwise discrepancy between payoff vectors, optionally restricted to a
/// participant subset.
struct Discrepancy {
  DiscrepancyKind kind = DiscrepancyKind::mean_absolute;
  std::optional<std::vector<std::size_t>> mask;

  double operator()(std::span<const double> a, std::span<const double> b) const {
    if (a.size() != b.size()) throw DimensionError("discrepancy arguments differ in length");
    std::vector<std::size_t> idx;
    if (mask) {
      if (mask->empty()) throw ArgumentError("discrepancy mask is empty");
      for (std::size_t i : *mask) {
        if (i >= a.size()) throw DimensionError("discrepancy mask index " + std::to_string(i) + " out of range");
        idx.push_back(i);
      }
    } else {
      for (std::size_t i = 0; i < a.size(); ++i) idx.push_back(i);
    }
    double acc = 0.0;
    for (std::size_t i : idx) {
      const double d = std::abs(a[i] - b[i]);
      switch (kind) {
        case DiscrepancyKind::mean_absolute: acc += d; break;
        case DiscrepancyKind::max_absolute: acc = std::max(acc, d); break;
        case DiscrepancyKind::euclidean: acc += d * d; break;
      }
    }
    if (kind == DiscrepancyKind::mean_absolute) return acc / static_cast<double>(idx.size());
    if (kind == DiscrepancyKind::euclidean) return std::sqrt(acc);
    return acc;
  }
};

// ---------------------------------------------------------------------------
// Substitution profiles
// ---------------------------------------------------------------------------

/// (pi*_1, ..., pi~_i, ..., pi*_n); other slots share the original objects.
inline PolicyProfile substitute_single(const PolicyProfile& profile, std::size_t i, PolicyPtr rep) {
  if (i >= profile.size()) throw DimensionError("participant index " + std::to_string(i) + " out of range");
  auto policies = profile.policies();
  policies[i] = std::move(rep);
  return PolicyProfile(std::move(policies));
}

/// (pi~_1, ..., pi~_n).
inline PolicyProfile substitute_all(const PolicyProfile& profile, std::vector<PolicyPtr> reps) {
  if (reps.size() != profile.size()) throw DimensionError("expected one representative per participant");
  PolicyProfile out(std::move(reps));
  if (out.n_states() != profile.n_states() || out.horizon() != profile.horizon() ||
      out.n_joint_actions() != profile.n_joint_actions())
    throw DimensionError("representatives do not match the profile's spaces");
  return out;
}

// ---------------------------------------------------------------------------
// Representativity
// ---------------------------------------------------------------------------

/// E_{omega ~ outcome} Q^T(omega, .) for an action-invariant terminal table.
inline std::vector<double> expected_terminal_value(const OutcomeDistribution& outcome, const QFunction& q) {
  std::vector<double> out(q.n_participants(), 0.0);
  for (StateIndex x = 0; x < q.n_states(); ++x) {
    if (outcome.probs[x] == 0.0) continue;
    auto row = q.at(x, 0);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += outcome.probs[x] * row[i];
  }
  return out;
}

inline void validate_terminal_family(const QFamily& q_family) {
  if (q_family.empty()) throw ArgumentError("Q family is empty");
  std::vector<Violation> out;
  for (std::size_t q = 0; q < q_family.size(); ++q) {
    if (!q_family[q].action_invariant(1e-12))
      out.push_back({"terminal Q member " + std::to_string(q) + " depends on the action"});
    if (!q_family[q].all_finite()) out.push_back({"terminal Q member " + std::to_string(q) + " is not finite"});
  }
  detail::throw_if_any(std::move(out));
}

struct RepresentativityResult {
  double value = 0.0;
  std::size_t mechanism_index = 0;
  std::size_t q_index = 0;
  /// "family-max" for the max over families, "fixed" for a single (tau, g).
  std::string mode = "family-max";
  OutcomeKind outcome_kind = OutcomeKind::exact;
  /// Monte Carlo standard error of the discrepancy arguments at the argmax
  /// (largest component); zero for exact outcomes.
  double std_error = 0.0;
};

/// Exact outcomes; the first maximizing (tau, Q) in family order is reported.
template <MechanismFamilyLike Family>
RepresentativityResult representativity(const PolicyProfile& pi_star, const PolicyProfile& pi_tilde,
                                        const Family& family, const QFamily& q_family,
                                        const Discrepancy& discrepancy, std::span<const double> init) {
  if (family.size() == 0) throw ArgumentError("mechanism family is empty");
  validate_terminal_family(q_family);
  RepresentativityResult best;
  bool have = false;
  for (std::size_t k = 0; k < family.size(); ++k) {
    const auto f_star = outcome_distribution_exact(pi_star, family[k], init);
    const auto f_tilde = outcome_distribution_exact(pi_tilde, family[k], init);
    for (std::size_t q = 0; q < q_family.size(); ++q) {
      const double v =
          discrepancy(expected_terminal_value(f_star, q_family[q]), expected_terminal_value(f_tilde, q_family[q]));
      if (!have || v > best.value) {
        best.value = v;
        best.mechanism_index = k;
        best.q_index = q;
        have = true;
      }
    }
  }
  return best;
}

/// Monte Carlo outcomes from a fixed initial state.
template <MechanismFamilyLike Family>
RepresentativityResult representativity_mc(const PolicyProfile& pi_star, const PolicyProfile& pi_tilde,
                                           const Family& family, const QFamily& q_family,
                                           const Discrepancy& discrepancy, StateIndex init_state,
                                           std::size_t n_samples, std::uint64_t seed, std::size_t threads = 1) {
  if (family.size() == 0) throw ArgumentError("mechanism family is empty");
  validate_terminal_family(q_family);
  RepresentativityResult best;
  best.outcome_kind = OutcomeKind::empirical;
  bool have = false;
  const double n = static_cast<double>(n_samples);
  for (std::size_t k = 0; k < family.size(); ++k) {
    const auto f_star = outcome_distribution_mc(pi_star, family[k], init_state, n_samples, seed, threads);
    const auto f_tilde =
        outcome_distribution_mc(pi_tilde, family[k], init_state, n_samples, derive_seed(seed, 1u << 20), threads);
    for (std::size_t q = 0; q < q_family.size(); ++q) {
      const auto a = expected_terminal_value(f_star, q_family[q]);
      const auto b = expected_terminal_value(f_tilde, q_family[q]);
      const double v = discrepancy(a, b);
      if (!have || v > best.value) {
        best.value = v;
        best.mechanism_index = k;
        best.q_index = q;
        double se = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
          double va = 0.0, vb = 0.0;
          for (StateIndex x = 0; x < q_family[q].n_states(); ++x) {
            const double qx = q_family[q](x, 0, i);
            va += f_star.probs[x] * (qx - a[i]) * (qx - a[i]);
            vb += f_tilde.probs[x] * (qx - b[i]) * (qx - b[i]);
          }
          se = std::max(se, std::sqrt(va / n + vb / n));
        }
        best.std_error = se;
        have = true;
      }
    }
  }
  return best;
}

/// L(E g under pi*, E g under pi~) for one mechanism.
template <TransitionModel M>
double payoff_discrepancy(const PolicyProfile& pi_star, const PolicyProfile& pi_tilde, const M& mechanism,
                          const PayoffTable& payoff, std::span<const double> init, const Discrepancy& discrepancy) {
  return discrepancy(expected_payoff_vector(pi_star, mechanism, init, payoff),
                     expected_payoff_vector(pi_tilde, mechanism, init, payoff));
}

}  // namespace repsim
