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

// Three notions of equivalence between a true policy profile and a model
// profile:
//
//   conditional  pi(.|x) == pi*(.|x) at every (t, x);
//   transition   every step operator agrees on Q for every tau, Q, step;
//   trajectory   E^0 o B^0 o ... o B^{T-2} Q^T agree for every tau and
//                terminal Q^T.
//
// The T step operators are the entry step (E^0 Q)(x) = E_{u~pi^0(.|x)} Q(x, u),
// which reads the first-action table through an identity kernel, and the
// Bellman steps B^0 .. B^{T-2}. Their composition maps Q^T to the expected
// payoff from each initial state.
//
// Under closure of the Q family under Bellman updates the classes are nested
// in that order. When mechanisms ignore a "bot" action factor, a policy that
// pins the bot factor to a single value while keeping the star marginal of
// pi* is trajectory- but not transition-equivalent; see
// build_bot_pinned_policy.

#pragma once

#include <cmath>
#include <cstring>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "repsim/core.hpp"
#include "repsim/value.hpp"

namespace repsim {

inline constexpr double kEquivalenceTolerance = 1e-9;
/// Enumerations and closures refuse to grow beyond this many members.
inline constexpr std::size_t kFamilySizeGuard = 1'000'000;

/// A family is anything with size() and operator[] yielding a TransitionModel.
template <class F>
concept MechanismFamilyLike = requires(const F& f, std::size_t k) {
  { f.size() } -> std::convertible_to<std::size_t>;
  requires TransitionModel<std::remove_cvref_t<decltype(f[k])>>;
};

// ---------------------------------------------------------------------------
// Conditional equality
// ---------------------------------------------------------------------------

/// Per-(t, x) mask; mask[t][x] == false excludes the cell.
using StateMask = std::vector<std::vector<bool>>;

/// Largest |p1 - p2| over joint action distributions at every (t, x), or over
/// the cells selected by `mask`.
inline double conditional_deviation(const PolicyProfile& p1, const PolicyProfile& p2,
                                    const StateMask* mask = nullptr) {
  if (p1.n_states() != p2.n_states() || p1.horizon() != p2.horizon() || p1.n_joint_actions() != p2.n_joint_actions())
    throw DimensionError("profiles do not share one set of spaces");
  double m = 0.0;
  for (std::size_t t = 0; t < p1.horizon(); ++t)
    for (StateIndex x = 0; x < p1.n_states(); ++x) {
      if (mask && !(*mask)[t][x]) continue;
      const auto a = joint_action_distribution(p1, x, t);
      const auto b = joint_action_distribution(p2, x, t);
      for (std::size_t u = 0; u < a.size(); ++u) m = std::max(m, std::abs(a[u] - b[u]));
    }
  return m;
}

inline bool conditionals_equal(const PolicyProfile& p1, const PolicyProfile& p2, double tol = kEquivalenceTolerance,
                               const StateMask* mask = nullptr) {
  return conditional_deviation(p1, p2, mask) <= tol;
}

/// States reachable at each t from the support of `init` under any member of
/// the family and any joint action.
template <MechanismFamilyLike Family>
StateMask reachable_mask(const Family& family, std::span<const double> init) {
  if (family.size() == 0) throw ArgumentError("mechanism family is empty");
  const auto& first = family[0];
  const std::size_t n = first.n_states();
  StateMask mask(first.horizon(), std::vector<bool>(n, false));
  for (StateIndex x = 0; x < n; ++x) mask[0][x] = init[x] > 0.0;
  for (std::size_t t = 0; t + 1 < first.horizon(); ++t)
    for (std::size_t k = 0; k < family.size(); ++k)
      for (StateIndex x = 0; x < n; ++x) {
        if (!mask[t][x]) continue;
        for (JointAction u = 0; u < first.n_joint_actions(); ++u)
          family[k].for_each_successor(t, x, u, [&](StateIndex y, double) { mask[t + 1][y] = true; });
      }
  return mask;
}

// ---------------------------------------------------------------------------
// Transition and trajectory equivalence
// ---------------------------------------------------------------------------

enum class ScanMode {
  /// Visit every (tau, Q, t, x, u) and report the largest deviation.
  full,
  /// Stop at the first deviation above tolerance (canonical order).
  first_violation,
};

struct TransitionWitness {
  /// The entry step uses no mechanism; its witnesses carry index 0.
  bool entry = false;
  std::size_t mechanism_index = 0;
  std::size_t q_index = 0;
  std::size_t timestep = 0;
  StateIndex state = 0;
  JointAction action = 0;
  double deviation = 0.0;

  /// Canonical order: entry witnesses first, then (tau, Q, t, x, u).
  auto key() const { return std::make_tuple(!entry, mechanism_index, q_index, timestep, state, action); }
};

struct TransitionResult {
  bool equal = true;
  double max_deviation = 0.0;
  /// Present iff !equal.
  std::optional<TransitionWitness> witness;
};

struct TrajectoryWitness {
  std::size_t mechanism_index = 0;
  std::size_t q_index = 0;
  double deviation = 0.0;
};

struct TrajectoryResult {
  bool equal = true;
  double max_deviation = 0.0;
  std::optional<TrajectoryWitness> witness;
};

/// Checks that the entry step and every B_{.,tau}^t agree on each Q under p1
/// and p2. In full mode the witness is the maximizing step, ties resolved to
/// the first in key() order; the entry step is scanned first.
template <MechanismFamilyLike Family>
TransitionResult transition_equivalent(const PolicyProfile& p1, const PolicyProfile& p2, const Family& family,
                                       const QFamily& q_family, double tol = kEquivalenceTolerance,
                                       ScanMode mode = ScanMode::full) {
  if (family.size() == 0) throw ArgumentError("mechanism family is empty");
  if (q_family.empty()) throw ArgumentError("Q family is empty");
  check_compatible(p1, family[0]);
  check_compatible(p2, family[0]);
  const std::size_t steps = p1.horizon() - 1;
  const std::size_t n_states = p1.n_states();
  const std::size_t n_joint = p1.n_joint_actions();

  // E_{u'~pi^{t+1}} Q(x', u') for both profiles, indexed [q][t].
  std::vector<std::vector<std::vector<double>>> v1(q_family.size()), v2(q_family.size());
  for (std::size_t q = 0; q < q_family.size(); ++q) {
    if (q_family[q].n_states() != n_states || q_family[q].n_joint_actions() != n_joint)
      throw DimensionError("Q family member " + std::to_string(q) + " does not match the spaces");
    for (std::size_t t = 0; t < steps; ++t) {
      v1[q].push_back(policy_average(p1, t + 1, q_family[q]));
      v2[q].push_back(policy_average(p2, t + 1, q_family[q]));
    }
  }

  TransitionResult result;
  TransitionWitness best;
  bool have_best = false;
  auto consider = [&](const TransitionWitness& here) {
    if (!have_best || here.deviation > best.deviation ||
        (here.deviation == best.deviation && here.key() < best.key())) {
      best = here;
      have_best = true;
    }
    if (mode == ScanMode::first_violation && here.deviation > tol) {
      result.equal = false;
      result.max_deviation = here.deviation;
      result.witness = here;
      return true;
    }
    return false;
  };

  for (std::size_t q = 0; q < q_family.size(); ++q) {
    const std::size_t n = q_family[q].n_participants();
    const auto e1 = policy_average(p1, 0, q_family[q]);
    const auto e2 = policy_average(p2, 0, q_family[q]);
    for (StateIndex x = 0; x < n_states; ++x) {
      double dev = 0.0;
      for (std::size_t i = 0; i < n; ++i) dev = std::max(dev, std::abs(e1[x * n + i] - e2[x * n + i]));
      if (consider(TransitionWitness{true, 0, q, 0, x, 0, dev})) return result;
    }
  }

  for (std::size_t k = 0; k < family.size(); ++k) {
    const auto& mech = family[k];
    check_compatible(p1, mech);
    for (std::size_t q = 0; q < q_family.size(); ++q) {
      const std::size_t n = q_family[q].n_participants();
      std::vector<double> b1(n), b2(n);
      for (std::size_t t = 0; t < steps; ++t) {
        const auto& a1 = v1[q][t];
        const auto& a2 = v2[q][t];
        for (StateIndex x = 0; x < n_states; ++x)
          for (JointAction u = 0; u < n_joint; ++u) {
            std::fill(b1.begin(), b1.end(), 0.0);
            std::fill(b2.begin(), b2.end(), 0.0);
            mech.for_each_successor(t, x, u, [&](StateIndex y, double p) {
              for (std::size_t i = 0; i < n; ++i) {
                b1[i] += p * a1[y * n + i];
                b2[i] += p * a2[y * n + i];
              }
            });
            double dev = 0.0;
            for (std::size_t i = 0; i < n; ++i) dev = std::max(dev, std::abs(b1[i] - b2[i]));
            if (consider(TransitionWitness{false, k, q, t, x, u, dev})) return result;
          }
      }
    }
  }
  result.max_deviation = best.deviation;
  result.equal = best.deviation <= tol;
  if (!result.equal) result.witness = best;
  return result;
}

/// E_{u~pi^0(.|x)} Q^0(x, u) with Q^0 = B^0 o ... o B^{T-2} Q^T, as an
/// n_states x n table.
template <TransitionModel M>
std::vector<double> initial_values(const PolicyProfile& profile, const M& mechanism, const QFunction& terminal) {
  return policy_average(profile, 0, compose_backups(profile, mechanism, terminal));
}

/// Compares initial_values under both profiles for every tau and every
/// terminal table in `terminal_family`.
template <MechanismFamilyLike Family>
TrajectoryResult trajectory_equivalent(const PolicyProfile& p1, const PolicyProfile& p2, const Family& family,
                                       const QFamily& terminal_family, double tol = kEquivalenceTolerance,
                                       ScanMode mode = ScanMode::full) {
  if (family.size() == 0) throw ArgumentError("mechanism family is empty");
  if (terminal_family.empty()) throw ArgumentError("Q family is empty");
  TrajectoryResult result;
  TrajectoryWitness best;
  bool have_best = false;
  for (std::size_t k = 0; k < family.size(); ++k)
    for (std::size_t q = 0; q < terminal_family.size(); ++q) {
      const auto a = initial_values(p1, family[k], terminal_family[q]);
      const auto b = initial_values(p2, family[k], terminal_family[q]);
      double dev = 0.0;
      for (std::size_t j = 0; j < a.size(); ++j) dev = std::max(dev, std::abs(a[j] - b[j]));
      if (!have_best || dev > best.deviation) {
        best = {k, q, dev};
        have_best = true;
      }
      if (mode == ScanMode::first_violation && dev > tol) {
        result.equal = false;
        result.max_deviation = dev;
        result.witness = TrajectoryWitness{k, q, dev};
        return result;
      }
    }
  result.max_deviation = best.deviation;
  result.equal = best.deviation <= tol;
  if (!result.equal) result.witness = best;
  return result;
}

struct EquivalenceReport {
  bool conditional_equal = false;
  double conditional_deviation = 0.0;
  TransitionResult transition;
  TrajectoryResult trajectory;
  double tolerance = kEquivalenceTolerance;
};

template <MechanismFamilyLike Family>
EquivalenceReport equivalence_report(const PolicyProfile& p1, const PolicyProfile& p2, const Family& family,
                                     const QFamily& transition_family, const QFamily& terminal_family,
                                     double tol = kEquivalenceTolerance) {
  EquivalenceReport r;
  r.tolerance = tol;
  r.conditional_deviation = conditional_deviation(p1, p2);
  r.conditional_equal = r.conditional_deviation <= tol;
  r.transition = transition_equivalent(p1, p2, family, transition_family, tol);
  r.trajectory = trajectory_equivalent(p1, p2, family, terminal_family, tol);
  return r;
}

// ---------------------------------------------------------------------------
// Bellman closure
// ---------------------------------------------------------------------------

namespace detail {

// Values rounded to a 1e-12 grid; two tables with the same key are treated as
// duplicates.
inline std::string dedup_key(const QFunction& q) {
  std::string key(q.values().size() * sizeof(long long), '\0');
  std::size_t off = 0;
  for (double v : q.values()) {
    const long long r = std::llround(v * 1e12);
    std::memcpy(key.data() + off, &r, sizeof r);
    off += sizeof r;
  }
  return key;
}

}  // namespace detail

/// Seed family plus every table reachable by up to max_depth applications of
/// B_{pi,tau}^t for pi in `policies`, tau in `family` and every t. Order:
/// seeds first, then breadth-first by depth.
template <MechanismFamilyLike Family>
QFamily bellman_closure(const QFamily& seed, const std::vector<PolicyProfile>& policies, const Family& family,
                        std::size_t max_depth, std::size_t size_guard = kFamilySizeGuard) {
  QFamily out;
  std::unordered_set<std::string> seen;
  std::vector<std::size_t> frontier;
  for (const auto& q : seed) {
    if (seen.insert(detail::dedup_key(q)).second) {
      frontier.push_back(out.size());
      out.push_back(q);
    }
  }
  for (std::size_t depth = 0; depth < max_depth && !frontier.empty(); ++depth) {
    std::vector<std::size_t> next;
    for (std::size_t idx : frontier)
      for (const auto& pi : policies)
        for (std::size_t k = 0; k < family.size(); ++k)
          for (std::size_t t = 0; t + 1 < pi.horizon(); ++t) {
            QFunction q = bellman_apply(pi, family[k], t, out[idx]);
            q.timestep.reset();
            if (!seen.insert(detail::dedup_key(q)).second) continue;
            if (out.size() >= size_guard)
              throw ResourceError("Bellman closure exceeds " + std::to_string(size_guard) + " members");
            next.push_back(out.size());
            out.push_back(std::move(q));
          }
    frontier = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Surrogate maximal families
// ---------------------------------------------------------------------------

/// All stationary deterministic kernels X x U -> X, enumerated lazily in
/// lexicographic order of the target table (cell (0,0) most significant).
class DeterministicMechanismFamily {
 public:
  DeterministicMechanismFamily(const FiniteSpaces& spaces, std::size_t size_guard = kFamilySizeGuard)
      : n_states_(spaces.n_states()), n_joint_(spaces.n_joint_actions()), horizon_(spaces.horizon()) {
    const std::size_t cells = n_states_ * n_joint_;
    const double log_count = static_cast<double>(cells) * std::log10(static_cast<double>(n_states_));
    if (log_count > std::log10(static_cast<double>(size_guard)) + 1e-12) {
      std::ostringstream os;
      os << "deterministic mechanism family has " << n_states_ << "^" << cells << " (~1e" << log_count
         << ") members; guard is " << size_guard;
      throw ResourceError(os.str());
    }
    size_ = 1;
    for (std::size_t c = 0; c < cells; ++c) size_ *= n_states_;
  }

  std::size_t size() const noexcept { return size_; }

  DeterministicMechanism operator[](std::size_t k) const {
    if (k >= size_) throw DimensionError("mechanism index out of range");
    const std::size_t cells = n_states_ * n_joint_;
    std::vector<StateIndex> targets(cells);
    for (std::size_t c = cells; c-- > 0;) {
      targets[c] = k % n_states_;
      k /= n_states_;
    }
    return DeterministicMechanism(n_states_, n_joint_, horizon_, std::move(targets));
  }

 private:
  std::size_t n_states_;
  std::size_t n_joint_;
  std::size_t horizon_;
  std::size_t size_ = 0;
};

inline DeterministicMechanismFamily enumerate_deterministic_mechanisms(const FiniteSpaces& spaces,
                                                                       std::size_t size_guard = kFamilySizeGuard) {
  return DeterministicMechanismFamily(spaces, size_guard);
}

/// One-hot tables e_i at (x, u), ordered by x, then u, then i.
inline QFamily indicator_q_family(const FiniteSpaces& spaces) {
  QFamily out;
  for (StateIndex x = 0; x < spaces.n_states(); ++x)
    for (JointAction u = 0; u < spaces.n_joint_actions(); ++u)
      for (std::size_t i = 0; i < spaces.n_participants(); ++i) {
        QFunction q(spaces.n_states(), spaces.n_joint_actions(), spaces.n_participants());
        q(x, u, i) = 1.0;
        out.push_back(std::move(q));
      }
  return out;
}

// ---------------------------------------------------------------------------
// Bot-pinned policy
// ---------------------------------------------------------------------------

namespace detail {

inline const std::vector<Factorization>& require_participant_factorizations(const FiniteSpaces& spaces) {
  if (!spaces.factorization()) throw ConfigurationError("action space has no star/bot factorization");
  if (spaces.participant_factorizations().size() != spaces.n_participants())
    throw ConfigurationError("joint factorization does not decompose per participant");
  return spaces.participant_factorizations();
}

// Per-participant bot coordinates of a joint bot index.
inline std::vector<std::size_t> split_bot(const FiniteSpaces& spaces, std::size_t joint_bot) {
  const auto& fs = require_participant_factorizations(spaces);
  if (joint_bot >= spaces.factorization()->n_bot()) throw DimensionError("bot index out of range");
  std::vector<std::size_t> out(fs.size());
  for (std::size_t i = fs.size(); i-- > 0;) {
    out[i] = joint_bot % fs[i].n_bot();
    joint_bot /= fs[i].n_bot();
  }
  return out;
}

}  // namespace detail

/// pi~((s, b) | x) := 1{b = fixed_bot} * pi*(s | x), built per participant so
/// the result is again a product profile.
inline PolicyProfile build_bot_pinned_policy(const PolicyProfile& pi_star, const FiniteSpaces& spaces,
                                             std::size_t fixed_bot) {
  if (!pi_star.matches(spaces)) throw DimensionError("profile does not match the spaces");
  const auto& fs = detail::require_participant_factorizations(spaces);
  const auto pinned = detail::split_bot(spaces, fixed_bot);
  std::vector<PolicyPtr> out;
  for (std::size_t i = 0; i < pi_star.size(); ++i) {
    const Policy& src = pi_star[i];
    const Factorization& f = fs[i];
    PolicyTables tables(src.n_tables(), std::vector<Row>(src.n_states(), Row(src.n_actions(), 0.0)));
    for (std::size_t t = 0; t < src.n_tables(); ++t)
      for (StateIndex x = 0; x < src.n_states(); ++x) {
        const auto star = marginalize_to_star(src.row(t, x), f);
        for (std::size_t s = 0; s < f.n_star(); ++s) tables[t][x][f.action_of(s, pinned[i])] = star[s];
      }
    out.push_back(std::make_shared<const Policy>(spaces, i, tables));
  }
  return PolicyProfile(std::move(out));
}

/// Q(x, u) := 1{bot(u) != fixed_bot} in every component.
inline QFunction bot_indicator_q(const FiniteSpaces& spaces, std::size_t fixed_bot) {
  if (!spaces.factorization()) throw ConfigurationError("action space has no star/bot factorization");
  const auto& f = *spaces.factorization();
  if (fixed_bot >= f.n_bot()) throw DimensionError("bot index out of range");
  QFunction q(spaces.n_states(), spaces.n_joint_actions(), spaces.n_participants());
  for (StateIndex x = 0; x < spaces.n_states(); ++x)
    for (JointAction u = 0; u < spaces.n_joint_actions(); ++u)
      if (f.bot_of(u) != fixed_bot)
        for (std::size_t i = 0; i < spaces.n_participants(); ++i) q(x, u, i) = 1.0;
  return q;
}

/// min over timesteps and states of P_{pi*}(bot(u) != fixed_bot | x).
inline double min_off_bot_mass(const PolicyProfile& pi_star, const FiniteSpaces& spaces, std::size_t fixed_bot) {
  const auto& f = *spaces.factorization();
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < pi_star.horizon(); ++t)
    for (StateIndex x = 0; x < pi_star.n_states(); ++x) {
      double mass = 0.0;
      for_each_joint_action(pi_star, t, x, [&](JointAction u, double p) {
        if (f.bot_of(u) != fixed_bot) mass += p;
      });
      m = std::min(m, mass);
    }
  return m;
}

// ---------------------------------------------------------------------------
// Nesting check over candidate profiles
// ---------------------------------------------------------------------------

struct Candidate {
  std::string name;
  PolicyProfile profile;
};

struct CandidateVerdict {
  std::string name;
  bool conditional_equal = false;
  bool transition_equal = false;
  bool trajectory_equal = false;
  double conditional_deviation = 0.0;
  double transition_deviation = 0.0;
  double trajectory_deviation = 0.0;
  std::optional<TransitionWitness> transition_witness;
  std::optional<TrajectoryWitness> trajectory_witness;
  std::size_t closure_size = 0;
  /// conditional => transition => trajectory is broken.
  bool chain_violation = false;
};

struct StrictnessReport {
  bool has_factorization = false;
  bool bot_invariant = false;
  bool bot_nontrivial = false;
  /// All premises hold and the bot-pinned policy was examined.
  bool checked = false;
  bool conditional_equal = false;
  bool transition_equal = false;
  bool trajectory_equal = false;
  double trajectory_deviation = 0.0;
  double witness_deviation = 0.0;
  double min_off_bot_mass = 0.0;
  double value_function_deviation = 0.0;
  bool passed = false;
};

struct ChainOptions {
  double tol = kEquivalenceTolerance;
  /// Depth of the Bellman closure used for transition checks; 0 selects T-1.
  std::size_t closure_depth = 0;
  std::size_t fixed_bot = 0;
  bool check_strictness = true;
};

struct ChainReport {
  std::vector<CandidateVerdict> candidates;
  std::size_t chain_violations = 0;
  StrictnessReport strictness;
};

/// Classifies each candidate against pi*. Transition checks use the Bellman
/// closure of `terminal_family` over {pi*, candidate}; trajectory checks use
/// `terminal_family` itself, whose members' backward orbits lie inside that
/// closure. When the premises hold, also checks that the bot-pinned policy is
/// trajectory- but not transition-equivalent and that its value functions
/// coincide with those of pi*.
template <MechanismFamilyLike Family>
ChainReport verify_equivalence_chain(const FiniteSpaces& spaces, const PolicyProfile& pi_star,
                                const std::vector<Candidate>& candidates, const Family& family,
                                const QFamily& terminal_family, const ChainOptions& options = {}) {
  if (family.size() == 0) throw ArgumentError("mechanism family is empty");
  if (terminal_family.empty()) throw ArgumentError("Q family is empty");
  const std::size_t depth = options.closure_depth ? options.closure_depth : spaces.horizon() - 1;
  ChainReport report;
  for (const auto& cand : candidates) {
    CandidateVerdict v;
    v.name = cand.name;
    const QFamily closure = bellman_closure(terminal_family, {pi_star, cand.profile}, family, depth);
    v.closure_size = closure.size();
    v.conditional_deviation = conditional_deviation(pi_star, cand.profile);
    v.conditional_equal = v.conditional_deviation <= options.tol;
    const auto tr = transition_equivalent(pi_star, cand.profile, family, closure, options.tol);
    v.transition_equal = tr.equal;
    v.transition_deviation = tr.max_deviation;
    v.transition_witness = tr.witness;
    const auto tj = trajectory_equivalent(pi_star, cand.profile, family, terminal_family, options.tol);
    v.trajectory_equal = tj.equal;
    v.trajectory_deviation = tj.max_deviation;
    v.trajectory_witness = tj.witness;
    v.chain_violation = (v.conditional_equal && !v.transition_equal) || (v.transition_equal && !v.trajectory_equal);
    if (v.chain_violation) ++report.chain_violations;
    report.candidates.push_back(std::move(v));
  }

  auto& s = report.strictness;
  s.has_factorization = spaces.factorization().has_value() &&
                        spaces.participant_factorizations().size() == spaces.n_participants();
  if (!options.check_strictness || !s.has_factorization) return report;
  const Factorization& f = *spaces.factorization();
  s.bot_nontrivial = f.n_bot() > 1;
  s.bot_invariant = true;
  for (std::size_t k = 0; k < family.size() && s.bot_invariant; ++k) s.bot_invariant = is_bot_invariant(family[k], f);
  if (!s.bot_invariant || !s.bot_nontrivial) return report;

  s.checked = true;
  const PolicyProfile pinned = build_bot_pinned_policy(pi_star, spaces, options.fixed_bot);
  s.conditional_equal = conditionals_equal(pi_star, pinned, options.tol);
  const auto tj = trajectory_equivalent(pi_star, pinned, family, terminal_family, options.tol);
  s.trajectory_equal = tj.equal;
  s.trajectory_deviation = tj.max_deviation;
  QFamily transition_family = bellman_closure(terminal_family, {pi_star, pinned}, family, depth);
  transition_family.push_back(bot_indicator_q(spaces, options.fixed_bot));
  const auto tr = transition_equivalent(pi_star, pinned, family, transition_family, options.tol);
  s.transition_equal = tr.equal;
  s.witness_deviation = tr.max_deviation;
  s.min_off_bot_mass = min_off_bot_mass(pi_star, spaces, options.fixed_bot);
  for (std::size_t k = 0; k < family.size(); ++k)
    for (const auto& terminal : terminal_family) {
      const auto a = value_functions_from(pi_star, family[k], terminal);
      const auto b = value_functions_from(pinned, family[k], terminal);
      for (std::size_t t = 0; t < a.size(); ++t)
        s.value_function_deviation = std::max(s.value_function_deviation, max_abs_diff(a[t], b[t]));
    }
  s.passed = s.trajectory_equal && !s.transition_equal && s.witness_deviation >= 0.1 * s.min_off_bot_mass &&
             s.value_function_deviation <= options.tol;
  return report;
}

}  // namespace repsim
