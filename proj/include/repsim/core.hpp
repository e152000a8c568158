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

// Finite spaces, policies, mechanisms, payoffs and value tables shared by the
// rest of the library.
//
// Indexing conventions:
//   * timesteps are 0-based, t = 0 .. T-1; x^t is the state at step t and the
//     outcome is x^{T-1};
//   * a mechanism owns kernels for t = 0 .. T-2 (one per action step);
//   * a policy owns tables for t = 0 .. T-1; the table at T-1 is the terminal
//     "dummy" action that Bellman backups at T-2 average over;
//   * joint actions enumerate the Cartesian product of per-participant action
//     sets in row-major order (participant n-1 varies fastest).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>
#include <concepts>
#include <span>

namespace repsim {

using StateIndex = std::size_t;
using ActionIndex = std::size_t;
using JointAction = std::size_t;

/// Tolerance for probability rows summing to one.
inline constexpr double kNormTolerance = 1e-9;

using Row = std::vector<double>;
/// [t][state][action]
using PolicyTables = std::vector<std::vector<Row>>;
/// [t][state][joint_action][next_state]
using KernelTables = std::vector<std::vector<std::vector<Row>>>;
/// [state][participant]
using PayoffValues = std::vector<std::vector<double>>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Index or shape mismatch between objects that must share one set of spaces.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A required structural ingredient (e.g. an action factorization) is absent.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// An enumeration or closure would exceed its size guard.
class ResourceError : public Error {
 public:
  using Error::Error;
};

struct Violation {
  std::string message;
};

inline std::string join_messages(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.message;
  }
  return out;
}

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations)
      : Error("validation failed: " + join_messages(violations)),
        violations_(std::move(violations)) {}

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

namespace detail {

inline std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

inline bool has_duplicates(const std::vector<std::string>& labels) {
  std::unordered_set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) return true;
  }
  return false;
}

inline void throw_if_any(std::vector<Violation> violations) {
  if (!violations.empty()) throw ValidationError(std::move(violations));
}

// Appends violations for a probability row; `where` is the location suffix,
// e.g. "(t=0,x=a)".
inline void check_row(std::span<const double> row, const std::string& where,
                      std::vector<Violation>& out) {
  double sum = 0.0;
  for (double p : row) {
    if (!std::isfinite(p) || p < 0.0) {
      out.push_back({"negative or non-finite probability " + format_number(p) + " at " + where});
      return;
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kNormTolerance) {
    out.push_back({"row sum " + format_number(sum) + " at " + where});
  }
}

inline void normalize_in_place(std::span<double> row) {
  const double sum = std::accumulate(row.begin(), row.end(), 0.0);
  for (double& p : row) p /= sum;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Factorization U <-> U_star x U_bot
// ---------------------------------------------------------------------------

/// Bijection between an action set and a product of "relevant" (star) and
/// "irrelevant" (bot) factors.
class Factorization {
 public:
  /// Row-major bijection: action a <-> (a / |bot|, a % |bot|).
  Factorization(std::vector<std::string> star, std::vector<std::string> bot)
      : star_(std::move(star)), bot_(std::move(bot)) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t s = 0; s < star_.size(); ++s)
      for (std::size_t b = 0; b < bot_.size(); ++b) pairs.emplace_back(s, b);
    init(std::move(pairs));
  }

  /// Explicit bijection: pairs[a] is the (star, bot) coordinate of action a.
  Factorization(std::vector<std::string> star, std::vector<std::string> bot,
                std::vector<std::pair<std::size_t, std::size_t>> pairs)
      : star_(std::move(star)), bot_(std::move(bot)) {
    init(std::move(pairs));
  }

  static std::vector<Violation> validate(const std::vector<std::string>& star,
                                         const std::vector<std::string>& bot,
                                         const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    std::vector<Violation> out;
    if (star.empty()) out.push_back({"empty star factor"});
    if (bot.empty()) out.push_back({"empty bot factor"});
    if (detail::has_duplicates(star)) out.push_back({"duplicate star label"});
    if (detail::has_duplicates(bot)) out.push_back({"duplicate bot label"});
    if (!out.empty()) return out;
    if (pairs.size() != star.size() * bot.size()) {
      out.push_back({"factorization size " + std::to_string(star.size()) + "x" +
                     std::to_string(bot.size()) + " does not match " +
                     std::to_string(pairs.size()) + " actions"});
      return out;
    }
    std::vector<char> hit(pairs.size(), 0);
    for (std::size_t a = 0; a < pairs.size(); ++a) {
      const auto [s, b] = pairs[a];
      if (s >= star.size() || b >= bot.size()) {
        out.push_back({"factor coordinate out of range at action " + std::to_string(a)});
        continue;
      }
      char& h = hit[s * bot.size() + b];
      if (h) out.push_back({"factorization not injective at action " + std::to_string(a)});
      h = 1;
    }
    return out;
  }

  std::size_t n_star() const noexcept { return star_.size(); }
  std::size_t n_bot() const noexcept { return bot_.size(); }
  std::size_t n_actions() const noexcept { return pairs_.size(); }
  std::size_t star_of(ActionIndex a) const { return pairs_.at(a).first; }
  std::size_t bot_of(ActionIndex a) const { return pairs_.at(a).second; }
  ActionIndex action_of(std::size_t star, std::size_t bot) const {
    return inverse_.at(star * bot_.size() + bot);
  }
  const std::vector<std::string>& star_labels() const noexcept { return star_; }
  const std::vector<std::string>& bot_labels() const noexcept { return bot_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& pairs() const noexcept { return pairs_; }

 private:
  void init(std::vector<std::pair<std::size_t, std::size_t>> pairs) {
    detail::throw_if_any(validate(star_, bot_, pairs));
    pairs_ = std::move(pairs);
    inverse_.assign(pairs_.size(), 0);
    for (std::size_t a = 0; a < pairs_.size(); ++a)
      inverse_[pairs_[a].first * bot_.size() + pairs_[a].second] = a;
  }

  std::vector<std::string> star_;
  std::vector<std::string> bot_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  std::vector<ActionIndex> inverse_;
};

// ---------------------------------------------------------------------------
// FiniteSpaces
// ---------------------------------------------------------------------------

inline std::vector<Violation> validate_spaces(const std::vector<std::string>& states,
                                              const std::vector<std::vector<std::string>>& actions,
                                              std::size_t horizon) {
  std::vector<Violation> out;
  if (states.empty()) out.push_back({"empty 𝒳"});
  if (detail::has_duplicates(states)) out.push_back({"duplicate state label"});
  if (actions.empty()) out.push_back({"no participants"});
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i].empty()) out.push_back({"empty 𝒰 for participant " + std::to_string(i)});
    if (detail::has_duplicates(actions[i]))
      out.push_back({"duplicate action label for participant " + std::to_string(i)});
  }
  if (horizon < 2) out.push_back({"horizon " + std::to_string(horizon) + " < 2"});
  return out;
}

class FiniteSpaces {
 public:
  /// `factorization`, if present, factorizes the joint action space directly.
  FiniteSpaces(std::vector<std::string> states, std::vector<std::vector<std::string>> actions,
               std::size_t horizon, std::optional<Factorization> factorization = std::nullopt)
      : states_(std::move(states)), actions_(std::move(actions)), horizon_(horizon) {
    detail::throw_if_any(validate_spaces(states_, actions_, horizon_));
    init_strides();
    if (factorization) {
      if (factorization->n_actions() != n_joint_) {
        throw ValidationError({{"factorization covers " + std::to_string(factorization->n_actions()) +
                                " actions but the joint space has " + std::to_string(n_joint_)}});
      }
      joint_factorization_ = std::move(factorization);
      if (actions_.size() == 1) participant_factorizations_.push_back(*joint_factorization_);
    }
  }

  /// One factorization per participant; the joint factorization is composed
  /// with star and bot coordinates each enumerated row-major by participant.
  FiniteSpaces(std::vector<std::string> states, std::vector<std::vector<std::string>> actions,
               std::size_t horizon, std::vector<Factorization> per_participant)
      : states_(std::move(states)), actions_(std::move(actions)), horizon_(horizon) {
    detail::throw_if_any(validate_spaces(states_, actions_, horizon_));
    init_strides();
    if (per_participant.size() != actions_.size())
      throw ValidationError({{"expected one factorization per participant"}});
    for (std::size_t i = 0; i < actions_.size(); ++i) {
      if (per_participant[i].n_actions() != actions_[i].size())
        throw ValidationError({{"factorization of participant " + std::to_string(i) +
                                " does not cover its actions"}});
    }
    participant_factorizations_ = std::move(per_participant);
    compose_joint_factorization();
  }

  std::size_t n_states() const noexcept { return states_.size(); }
  std::size_t n_participants() const noexcept { return actions_.size(); }
  std::size_t n_actions(std::size_t participant) const { return actions_.at(participant).size(); }
  std::size_t n_joint_actions() const noexcept { return n_joint_; }
  std::size_t horizon() const noexcept { return horizon_; }
  std::vector<std::size_t> action_counts() const {
    std::vector<std::size_t> out;
    for (const auto& a : actions_) out.push_back(a.size());
    return out;
  }

  const std::vector<std::string>& state_labels() const noexcept { return states_; }
  const std::vector<std::vector<std::string>>& action_labels() const noexcept { return actions_; }
  const std::string& state_label(StateIndex x) const { return states_.at(x); }

  StateIndex state_index(std::string_view label) const {
    for (std::size_t x = 0; x < states_.size(); ++x)
      if (states_[x] == label) return x;
    throw DimensionError("unknown state '" + std::string(label) + "'");
  }

  JointAction encode(std::span<const ActionIndex> actions) const {
    if (actions.size() != actions_.size()) throw DimensionError("action profile has wrong length");
    JointAction j = 0;
    for (std::size_t i = 0; i < actions.size(); ++i) {
      if (actions[i] >= actions_[i].size()) throw DimensionError("action index out of range");
      j += actions[i] * strides_[i];
    }
    return j;
  }

  std::vector<ActionIndex> decode(JointAction joint) const {
    check_joint(joint);
    std::vector<ActionIndex> out(actions_.size());
    for (std::size_t i = 0; i < actions_.size(); ++i) out[i] = (joint / strides_[i]) % actions_[i].size();
    return out;
  }

  ActionIndex action_of(JointAction joint, std::size_t participant) const {
    check_joint(joint);
    return (joint / strides_.at(participant)) % actions_[participant].size();
  }

  std::string joint_action_label(JointAction joint) const {
    const auto a = decode(joint);
    if (a.size() == 1) return actions_[0][a[0]];
    std::string out = "(";
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i) out += ",";
      out += actions_[i][a[i]];
    }
    return out + ")";
  }

  const std::optional<Factorization>& factorization() const noexcept { return joint_factorization_; }

  /// Per-participant factorizations, empty when only a joint one was given
  /// for more than one participant.
  const std::vector<Factorization>& participant_factorizations() const noexcept {
    return participant_factorizations_;
  }

  bool same_shape(const FiniteSpaces& other) const {
    return n_states() == other.n_states() && horizon_ == other.horizon_ &&
           action_counts() == other.action_counts();
  }

 private:
  void init_strides() {
    strides_.assign(actions_.size(), 1);
    n_joint_ = 1;
    for (std::size_t i = actions_.size(); i-- > 0;) {
      strides_[i] = n_joint_;
      n_joint_ *= actions_[i].size();
    }
  }

  void check_joint(JointAction joint) const {
    if (joint >= n_joint_) throw DimensionError("joint action " + std::to_string(joint) + " out of range");
  }

  void compose_joint_factorization() {
    std::vector<std::string> star{""};
    std::vector<std::string> bot{""};
    auto extend = [](const std::vector<std::string>& acc, const std::vector<std::string>& next) {
      std::vector<std::string> out;
      for (const auto& a : acc)
        for (const auto& b : next) out.push_back(a.empty() ? b : a + "," + b);
      return out;
    };
    for (const auto& f : participant_factorizations_) {
      star = extend(star, f.star_labels());
      bot = extend(bot, f.bot_labels());
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs(n_joint_);
    for (JointAction j = 0; j < n_joint_; ++j) {
      std::size_t s = 0;
      std::size_t b = 0;
      for (std::size_t i = 0; i < actions_.size(); ++i) {
        const auto& f = participant_factorizations_[i];
        const ActionIndex a = (j / strides_[i]) % actions_[i].size();
        s = s * f.n_star() + f.star_of(a);
        b = b * f.n_bot() + f.bot_of(a);
      }
      pairs[j] = {s, b};
    }
    joint_factorization_.emplace(std::move(star), std::move(bot), std::move(pairs));
  }

  std::vector<std::string> states_;
  std::vector<std::vector<std::string>> actions_;
  std::size_t horizon_;
  std::vector<std::size_t> strides_;
  std::size_t n_joint_ = 0;
  std::optional<Factorization> joint_factorization_;
  std::vector<Factorization> participant_factorizations_;
};

/// Opaque participant type descriptors theta_i, one per participant.
struct TypeProfile {
  std::vector<std::string> types;

  static std::vector<Violation> validate(const FiniteSpaces& spaces, const std::vector<std::string>& types) {
    if (types.size() == spaces.n_participants()) return {};
    return {{"type profile has " + std::to_string(types.size()) + " entries; expected " +
             std::to_string(spaces.n_participants())}};
  }

  TypeProfile(const FiniteSpaces& spaces, std::vector<std::string> t) : types(std::move(t)) {
    detail::throw_if_any(validate(spaces, types));
  }
};

// ---------------------------------------------------------------------------
// Policy / PolicyProfile
// ---------------------------------------------------------------------------

inline std::vector<Violation> validate_policy_tables(const FiniteSpaces& spaces, std::size_t participant,
                                                     const PolicyTables& tables) {
  std::vector<Violation> out;
  if (participant >= spaces.n_participants()) {
    out.push_back({"participant index " + std::to_string(participant) + " out of range"});
    return out;
  }
  if (tables.size() != 1 && tables.size() != spaces.horizon()) {
    out.push_back({"policy has " + std::to_string(tables.size()) + " tables; expected 1 or " +
                   std::to_string(spaces.horizon())});
    return out;
  }
  const std::size_t n_actions = spaces.n_actions(participant);
  for (std::size_t t = 0; t < tables.size(); ++t) {
    if (tables[t].size() != spaces.n_states()) {
      out.push_back({"policy table t=" + std::to_string(t) + " has " + std::to_string(tables[t].size()) +
                     " rows; expected " + std::to_string(spaces.n_states())});
      continue;
    }
    for (StateIndex x = 0; x < tables[t].size(); ++x) {
      const std::string where = "(t=" + std::to_string(t) + ",x=" + spaces.state_label(x) + ")";
      if (tables[t][x].size() != n_actions) {
        out.push_back({"row length " + std::to_string(tables[t][x].size()) + " at " + where});
        continue;
      }
      detail::check_row(tables[t][x], where, out);
    }
  }
  return out;
}

/// Per-timestep conditional action distributions of one participant.
class Policy {
 public:
  /// `tables` holds either one table (stationary) or one per timestep.
  /// Rows are renormalized after validation.
  Policy(const FiniteSpaces& spaces, std::size_t participant, const PolicyTables& tables)
      : participant_(participant),
        n_states_(spaces.n_states()),
        horizon_(spaces.horizon()),
        stationary_(tables.size() == 1) {
    detail::throw_if_any(validate_policy_tables(spaces, participant, tables));
    n_actions_ = spaces.n_actions(participant);
    data_.reserve(tables.size() * n_states_ * n_actions_);
    for (const auto& table : tables)
      for (const auto& row : table) data_.insert(data_.end(), row.begin(), row.end());
    for (std::size_t k = 0; k < data_.size(); k += n_actions_)
      detail::normalize_in_place(std::span<double>(data_).subspan(k, n_actions_));
  }

  std::size_t participant() const noexcept { return participant_; }
  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }
  std::size_t horizon() const noexcept { return horizon_; }
  bool stationary() const noexcept { return stationary_; }
  std::size_t n_tables() const noexcept { return stationary_ ? 1 : horizon_; }

  std::span<const double> row(std::size_t t, StateIndex x) const {
    if (t >= horizon_) throw DimensionError("timestep " + std::to_string(t) + " out of range");
    if (x >= n_states_) throw DimensionError("state " + std::to_string(x) + " out of range");
    const std::size_t k = ((stationary_ ? 0 : t) * n_states_ + x) * n_actions_;
    return std::span<const double>(data_).subspan(k, n_actions_);
  }

  double prob(std::size_t t, StateIndex x, ActionIndex a) const { return row(t, x)[a]; }

  PolicyTables tables() const {
    PolicyTables out(n_tables(), std::vector<Row>(n_states_));
    for (std::size_t t = 0; t < n_tables(); ++t)
      for (StateIndex x = 0; x < n_states_; ++x) {
        auto r = row(t, x);
        out[t][x].assign(r.begin(), r.end());
      }
    return out;
  }

 private:
  std::size_t participant_;
  std::size_t n_states_;
  std::size_t horizon_;
  bool stationary_;
  std::size_t n_actions_ = 0;
  std::vector<double> data_;
};

using PolicyPtr = std::shared_ptr<const Policy>;

/// One policy per participant. Policies are shared immutable objects, so
/// substituting one participant leaves the others identical.
class PolicyProfile {
 public:
  explicit PolicyProfile(std::vector<PolicyPtr> policies) : policies_(std::move(policies)) {
    if (policies_.empty()) throw ValidationError({{"empty policy profile"}});
    std::vector<Violation> out;
    for (std::size_t i = 0; i < policies_.size(); ++i) {
      if (!policies_[i]) {
        out.push_back({"missing policy for participant " + std::to_string(i)});
        continue;
      }
      if (policies_[i]->participant() != i)
        out.push_back({"policy at slot " + std::to_string(i) + " belongs to participant " +
                       std::to_string(policies_[i]->participant())});
      if (policies_[i]->n_states() != policies_[0]->n_states() ||
          policies_[i]->horizon() != policies_[0]->horizon())
        out.push_back({"policy " + std::to_string(i) + " has mismatched dimensions"});
    }
    detail::throw_if_any(std::move(out));
    strides_.assign(policies_.size(), 1);
    n_joint_ = 1;
    for (std::size_t i = policies_.size(); i-- > 0;) {
      strides_[i] = n_joint_;
      n_joint_ *= policies_[i]->n_actions();
    }
  }

  explicit PolicyProfile(std::vector<Policy> policies)
      : PolicyProfile([&] {
          std::vector<PolicyPtr> ptrs;
          for (auto& p : policies) ptrs.push_back(std::make_shared<const Policy>(std::move(p)));
          return ptrs;
        }()) {}

  std::size_t size() const noexcept { return policies_.size(); }
  const Policy& operator[](std::size_t i) const { return *policies_.at(i); }
  const PolicyPtr& shared(std::size_t i) const { return policies_.at(i); }
  const std::vector<PolicyPtr>& policies() const noexcept { return policies_; }

  std::size_t n_states() const noexcept { return policies_[0]->n_states(); }
  std::size_t horizon() const noexcept { return policies_[0]->horizon(); }
  std::size_t n_joint_actions() const noexcept { return n_joint_; }
  std::size_t stride(std::size_t participant) const { return strides_.at(participant); }

  bool matches(const FiniteSpaces& spaces) const {
    if (spaces.n_participants() != size() || spaces.n_states() != n_states() || spaces.horizon() != horizon())
      return false;
    for (std::size_t i = 0; i < size(); ++i)
      if (policies_[i]->n_actions() != spaces.n_actions(i)) return false;
    return true;
  }

 private:
  std::vector<PolicyPtr> policies_;
  std::vector<std::size_t> strides_;
  std::size_t n_joint_ = 0;
};

/// Calls fn(joint_action, probability) for every joint action with non-zero
/// probability under the product of the participants' rows at (t, x).
/// Enumeration is in increasing joint-action order.
template <class Fn>
void for_each_joint_action(const PolicyProfile& profile, std::size_t t, StateIndex x, Fn&& fn) {
  const std::size_t n = profile.size();
  std::vector<std::vector<std::pair<ActionIndex, double>>> support(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = profile[i].row(t, x);
    for (ActionIndex a = 0; a < row.size(); ++a)
      if (row[a] > 0.0) support[i].emplace_back(a, row[a]);
  }
  std::vector<std::size_t> cursor(n, 0);
  while (true) {
    JointAction joint = 0;
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& [a, q] = support[i][cursor[i]];
      joint += a * profile.stride(i);
      p *= q;
    }
    fn(joint, p);
    std::size_t i = n;
    while (i-- > 0) {
      if (++cursor[i] < support[i].size()) break;
      cursor[i] = 0;
    }
    if (i == static_cast<std::size_t>(-1)) return;
  }
}

/// Product distribution over joint actions at (t, x), dense.
inline std::vector<double> joint_action_distribution(const PolicyProfile& profile, StateIndex x, std::size_t t) {
  if (t >= profile.horizon()) throw DimensionError("timestep " + std::to_string(t) + " out of range");
  if (x >= profile.n_states()) throw DimensionError("state " + std::to_string(x) + " out of range");
  std::vector<double> out(profile.n_joint_actions(), 0.0);
  for_each_joint_action(profile, t, x, [&](JointAction u, double p) { out[u] = p; });
  return out;
}

/// Sums a distribution over U down to U_star.
inline std::vector<double> marginalize_to_star(std::span<const double> row,
                                               const std::optional<Factorization>& factorization) {
  if (!factorization) throw ConfigurationError("marginalization requires a factorization");
  if (row.size() != factorization->n_actions())
    throw DimensionError("row length does not match factorization");
  std::vector<double> out(factorization->n_star(), 0.0);
  for (ActionIndex a = 0; a < row.size(); ++a) out[factorization->star_of(a)] += row[a];
  return out;
}

// ---------------------------------------------------------------------------
// Mechanisms
// ---------------------------------------------------------------------------

/// Anything that can report the successor distribution of (t, x, u).
/// for_each_successor visits successors with non-zero probability in
/// increasing state order.
template <class M>
concept TransitionModel = requires(const M& m, std::size_t t, StateIndex x, JointAction u) {
  { m.n_states() } -> std::convertible_to<std::size_t>;
  { m.n_joint_actions() } -> std::convertible_to<std::size_t>;
  { m.horizon() } -> std::convertible_to<std::size_t>;
  m.for_each_successor(t, x, u, [](StateIndex, double) {});
};

inline std::vector<Violation> validate_kernel_tables(const FiniteSpaces& spaces, const KernelTables& kernels) {
  std::vector<Violation> out;
  const std::size_t steps = spaces.horizon() - 1;
  if (kernels.size() != 1 && kernels.size() != steps) {
    out.push_back({"mechanism has " + std::to_string(kernels.size()) + " kernels; expected 1 or " +
                   std::to_string(steps)});
    return out;
  }
  for (std::size_t t = 0; t < kernels.size(); ++t) {
    if (kernels[t].size() != spaces.n_states()) {
      out.push_back({"kernel t=" + std::to_string(t) + " has wrong number of states"});
      continue;
    }
    for (StateIndex x = 0; x < spaces.n_states(); ++x) {
      if (kernels[t][x].size() != spaces.n_joint_actions()) {
        out.push_back({"kernel t=" + std::to_string(t) + ",x=" + spaces.state_label(x) +
                       " has wrong number of joint actions"});
        continue;
      }
      for (JointAction u = 0; u < spaces.n_joint_actions(); ++u) {
        const std::string where =
            "(t=" + std::to_string(t) + ",x=" + spaces.state_label(x) + ",u=" + std::to_string(u) + ")";
        if (kernels[t][x][u].size() != spaces.n_states()) {
          out.push_back({"row length " + std::to_string(kernels[t][x][u].size()) + " at " + where});
          continue;
        }
        detail::check_row(kernels[t][x][u], where, out);
      }
    }
  }
  return out;
}

/// Dense tabular transition kernels tau^t(x' | x, u).
class Mechanism {
 public:
  /// `kernels` holds one kernel (stationary) or one per action step (T-1).
  Mechanism(const FiniteSpaces& spaces, const KernelTables& kernels)
      : n_states_(spaces.n_states()),
        n_joint_(spaces.n_joint_actions()),
        horizon_(spaces.horizon()),
        stationary_(kernels.size() == 1) {
    detail::throw_if_any(validate_kernel_tables(spaces, kernels));
    data_.reserve(kernels.size() * n_states_ * n_joint_ * n_states_);
    for (const auto& k : kernels)
      for (const auto& rows : k)
        for (const auto& row : rows) data_.insert(data_.end(), row.begin(), row.end());
    for (std::size_t k = 0; k < data_.size(); k += n_states_)
      detail::normalize_in_place(std::span<double>(data_).subspan(k, n_states_));
  }

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_joint_actions() const noexcept { return n_joint_; }
  std::size_t horizon() const noexcept { return horizon_; }
  bool stationary() const noexcept { return stationary_; }
  std::size_t n_kernels() const noexcept { return stationary_ ? 1 : horizon_ - 1; }

  std::span<const double> row(std::size_t t, StateIndex x, JointAction u) const {
    if (t + 1 >= horizon_) throw DimensionError("kernel timestep " + std::to_string(t) + " out of range");
    if (x >= n_states_ || u >= n_joint_) throw DimensionError("kernel index out of range");
    const std::size_t k = (((stationary_ ? 0 : t) * n_states_ + x) * n_joint_ + u) * n_states_;
    return std::span<const double>(data_).subspan(k, n_states_);
  }

  template <class Fn>
  void for_each_successor(std::size_t t, StateIndex x, JointAction u, Fn&& fn) const {
    auto r = row(t, x, u);
    for (StateIndex y = 0; y < r.size(); ++y)
      if (r[y] > 0.0) fn(y, r[y]);
  }

  KernelTables tables() const {
    KernelTables out(n_kernels(), std::vector<std::vector<Row>>(n_states_, std::vector<Row>(n_joint_)));
    for (std::size_t t = 0; t < n_kernels(); ++t)
      for (StateIndex x = 0; x < n_states_; ++x)
        for (JointAction u = 0; u < n_joint_; ++u) {
          auto r = row(t, x, u);
          out[t][x][u].assign(r.begin(), r.end());
        }
    return out;
  }

 private:
  std::size_t n_states_;
  std::size_t n_joint_;
  std::size_t horizon_;
  bool stationary_;
  std::vector<double> data_;
};

/// Stationary deterministic mechanism: (x, u) -> target(x, u).
class DeterministicMechanism {
 public:
  DeterministicMechanism(std::size_t n_states, std::size_t n_joint, std::size_t horizon,
                         std::vector<StateIndex> targets)
      : n_states_(n_states), n_joint_(n_joint), horizon_(horizon), targets_(std::move(targets)) {
    if (targets_.size() != n_states_ * n_joint_) throw DimensionError("target table has wrong size");
    for (StateIndex y : targets_)
      if (y >= n_states_) throw DimensionError("target state out of range");
  }

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_joint_actions() const noexcept { return n_joint_; }
  std::size_t horizon() const noexcept { return horizon_; }
  StateIndex target(StateIndex x, JointAction u) const { return targets_.at(x * n_joint_ + u); }

  template <class Fn>
  void for_each_successor(std::size_t t, StateIndex x, JointAction u, Fn&& fn) const {
    if (t + 1 >= horizon_) throw DimensionError("kernel timestep out of range");
    fn(target(x, u), 1.0);
  }

  Mechanism to_tabular(const FiniteSpaces& spaces) const {
    KernelTables k(1, std::vector<std::vector<Row>>(n_states_, std::vector<Row>(n_joint_, Row(n_states_, 0.0))));
    for (StateIndex x = 0; x < n_states_; ++x)
      for (JointAction u = 0; u < n_joint_; ++u) k[0][x][u][target(x, u)] = 1.0;
    return Mechanism(spaces, k);
  }

 private:
  std::size_t n_states_;
  std::size_t n_joint_;
  std::size_t horizon_;
  std::vector<StateIndex> targets_;
};

template <TransitionModel M>
void check_compatible(const PolicyProfile& profile, const M& mechanism) {
  if (profile.n_states() != mechanism.n_states() || profile.n_joint_actions() != mechanism.n_joint_actions() ||
      profile.horizon() != mechanism.horizon())
    throw DimensionError("policy profile and mechanism do not share one set of spaces");
}

/// True when every kernel row depends on the joint action only through its
/// star coordinate.
template <TransitionModel M>
bool is_bot_invariant(const M& mechanism, const Factorization& factorization, double tol = 1e-12) {
  const std::size_t n = mechanism.n_states();
  std::vector<double> ref(n);
  std::vector<double> cur(n);
  for (std::size_t t = 0; t + 1 < mechanism.horizon(); ++t)
    for (StateIndex x = 0; x < n; ++x)
      for (JointAction u = 0; u < mechanism.n_joint_actions(); ++u) {
        const JointAction canonical = factorization.action_of(factorization.star_of(u), 0);
        if (canonical == u) continue;
        std::fill(ref.begin(), ref.end(), 0.0);
        std::fill(cur.begin(), cur.end(), 0.0);
        mechanism.for_each_successor(t, x, canonical, [&](StateIndex y, double p) { ref[y] = p; });
        mechanism.for_each_successor(t, x, u, [&](StateIndex y, double p) { cur[y] = p; });
        for (StateIndex y = 0; y < n; ++y)
          if (std::abs(ref[y] - cur[y]) > tol) return false;
      }
  return true;
}

// ---------------------------------------------------------------------------
// Payoffs and Q tables
// ---------------------------------------------------------------------------

inline std::vector<Violation> validate_payoff_values(const FiniteSpaces& spaces, const PayoffValues& values) {
  std::vector<Violation> out;
  if (values.size() != spaces.n_states()) {
    out.push_back({"payoff table has " + std::to_string(values.size()) + " states; expected " +
                   std::to_string(spaces.n_states())});
    return out;
  }
  for (StateIndex x = 0; x < values.size(); ++x) {
    if (values[x].size() != spaces.n_participants()) {
      out.push_back({"payoff row for x=" + spaces.state_label(x) + " has wrong length"});
      continue;
    }
    for (std::size_t i = 0; i < values[x].size(); ++i)
      if (!std::isfinite(values[x][i]))
        out.push_back({"non-finite payoff at (x=" + spaces.state_label(x) + ",i=" + std::to_string(i) + ")"});
  }
  return out;
}

/// g_i(omega, theta_i) for every state and participant.
class PayoffTable {
 public:
  PayoffTable(const FiniteSpaces& spaces, const PayoffValues& values)
      : n_states_(spaces.n_states()), n_participants_(spaces.n_participants()) {
    detail::throw_if_any(validate_payoff_values(spaces, values));
    for (const auto& row : values) data_.insert(data_.end(), row.begin(), row.end());
  }

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_participants() const noexcept { return n_participants_; }
  double operator()(StateIndex x, std::size_t i) const { return at(x)[i]; }
  std::span<const double> at(StateIndex x) const {
    if (x >= n_states_) throw DimensionError("payoff state out of range");
    return std::span<const double>(data_).subspan(x * n_participants_, n_participants_);
  }
  PayoffValues values() const {
    PayoffValues out(n_states_);
    for (StateIndex x = 0; x < n_states_; ++x) out[x].assign(at(x).begin(), at(x).end());
    return out;
  }

 private:
  std::size_t n_states_;
  std::size_t n_participants_;
  std::vector<double> data_;
};

/// Table X x U -> R^n.
class QFunction {
 public:
  QFunction(std::size_t n_states, std::size_t n_joint, std::size_t n_participants, double fill = 0.0)
      : n_states_(n_states), n_joint_(n_joint), n_participants_(n_participants),
        data_(n_states * n_joint * n_participants, fill) {}

  /// Q(x, u) := g(x) for every u.
  static QFunction terminal(const PayoffTable& payoff, std::size_t n_joint) {
    QFunction q(payoff.n_states(), n_joint, payoff.n_participants());
    for (StateIndex x = 0; x < payoff.n_states(); ++x)
      for (JointAction u = 0; u < n_joint; ++u) std::ranges::copy(payoff.at(x), q.at(x, u).begin());
    return q;
  }

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_joint_actions() const noexcept { return n_joint_; }
  std::size_t n_participants() const noexcept { return n_participants_; }

  double& operator()(StateIndex x, JointAction u, std::size_t i) { return data_[index(x, u) + i]; }
  double operator()(StateIndex x, JointAction u, std::size_t i) const { return data_[index(x, u) + i]; }
  std::span<double> at(StateIndex x, JointAction u) {
    return std::span<double>(data_).subspan(index(x, u), n_participants_);
  }
  std::span<const double> at(StateIndex x, JointAction u) const {
    return std::span<const double>(data_).subspan(index(x, u), n_participants_);
  }
  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  bool same_shape(const QFunction& o) const noexcept {
    return n_states_ == o.n_states_ && n_joint_ == o.n_joint_ && n_participants_ == o.n_participants_;
  }

  /// True when Q(x, u) does not depend on u (within tol).
  bool action_invariant(double tol = 1e-12) const {
    for (StateIndex x = 0; x < n_states_; ++x)
      for (JointAction u = 1; u < n_joint_; ++u)
        for (std::size_t i = 0; i < n_participants_; ++i)
          if (std::abs((*this)(x, u, i) - (*this)(x, 0, i)) > tol) return false;
    return true;
  }

  bool all_finite() const {
    return std::ranges::all_of(data_, [](double v) { return std::isfinite(v); });
  }

  QFunction& operator+=(const QFunction& o) {
    if (!same_shape(o)) throw DimensionError("Q shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  QFunction& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }
  friend QFunction operator+(QFunction a, const QFunction& b) { return a += b; }
  friend QFunction operator*(double s, QFunction q) { return q *= s; }

  std::optional<std::size_t> timestep;

 private:
  std::size_t index(StateIndex x, JointAction u) const {
    if (x >= n_states_ || u >= n_joint_) throw DimensionError("Q index out of range");
    return (x * n_joint_ + u) * n_participants_;
  }

  std::size_t n_states_;
  std::size_t n_joint_;
  std::size_t n_participants_;
  std::vector<double> data_;
};

using QFamily = std::vector<QFunction>;

inline double max_abs_diff(const QFunction& a, const QFunction& b) {
  if (!a.same_shape(b)) throw DimensionError("Q shape mismatch");
  double m = 0.0;
  auto va = a.values();
  auto vb = b.values();
  for (std::size_t k = 0; k < va.size(); ++k) m = std::max(m, std::abs(va[k] - vb[k]));
  return m;
}

}  // namespace repsim
