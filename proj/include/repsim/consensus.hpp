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

// Discrete consensus-finding game.
//
// An episode has three stages: a question state, a draft state D_d and a
// revised state R_r (positions 0..K-1). Each participant first states an
// opinion, the mediator drafts the rounded mean opinion, each participant then
// critiques the draft with a direction in {-1, 0, +1} and a style label, and
// the mediator moves the draft one step in the sign of the summed directions.
//
// A participant action is (opinion, direction, style). Opinion and direction
// form the star factor; style is the bot factor, which the mediator ignores.

#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "repsim/core.hpp"
#include "repsim/parallel.hpp"
#include "repsim/random.hpp"
#include "repsim/representativity.hpp"
#include "repsim/rollout.hpp"

namespace repsim::consensus {

inline constexpr std::size_t kDirections = 3;  // -1, 0, +1
inline constexpr int kMaxBucket = 2;
inline constexpr std::size_t kBuckets = 2 * kMaxBucket + 1;

struct ConsensusConfig {
  std::size_t n_positions = 5;
  std::size_t group_size = 3;
  std::size_t n_questions = 200;
  std::size_t n_participants = 60;
  std::vector<std::string> style_labels{"s1", "s2"};
  double beta_min = 0.5;
  double beta_max = 3.0;
  double style_p_min = 0.2;
  double style_p_max = 0.8;
  double alpha = 1.0;
  double lambda = 0.8;
  double val_fraction = 0.5;
  std::size_t winrate_samples = 2000;
  std::uint64_t seed = 1;

  std::vector<Violation> validate() const {
    std::vector<Violation> out;
    if (n_positions < 3) out.push_back({"n_positions must be at least 3"});
    if (group_size < 3 || group_size > 5) out.push_back({"group_size must lie in [3, 5]"});
    if (style_labels.empty()) out.push_back({"style_labels is empty"});
    if (detail::has_duplicates(style_labels)) out.push_back({"duplicate style label"});
    if (!(beta_min > 0.0) || beta_min > beta_max) out.push_back({"sharpness range must satisfy 0 < min <= max"});
    if (!(style_p_min >= 0.0) || style_p_min > style_p_max || style_p_max > 1.0)
      out.push_back({"style bias range must satisfy 0 <= min <= max <= 1"});
    if (!(alpha > 0.0)) out.push_back({"alpha must be positive"});
    if (!(lambda >= 0.0 && lambda <= 1.0)) out.push_back({"lambda must lie in [0, 1]"});
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) out.push_back({"val_fraction must lie in (0, 1)"});
    return out;
  }

  std::size_t n_styles() const noexcept { return style_labels.size(); }
  /// Actions per participant: opinion x direction x style.
  std::size_t n_actions() const noexcept { return n_positions * kDirections * n_styles(); }
};

struct Participant {
  std::size_t id = 0;
  std::size_t theta = 0;
  double beta = 1.0;
  /// Probability of the first style label; the rest share the remainder.
  double style_p = 0.5;
};

struct Critique {
  int direction = 0;
  std::size_t style = 0;
  bool operator==(const Critique&) const = default;
};

struct EpisodeRecord {
  std::size_t question = 0;
  std::vector<std::size_t> participants;
  std::vector<std::size_t> opinions;
  std::size_t draft = 0;
  std::vector<Critique> critiques;
  std::size_t revised = 0;
  std::string split = "train";
  bool operator==(const EpisodeRecord&) const = default;
};

using Dataset = std::vector<EpisodeRecord>;

// ---------------------------------------------------------------------------
// Mediator rules
// ---------------------------------------------------------------------------

inline std::size_t clamp_position(long v, std::size_t k) {
  return static_cast<std::size_t>(std::clamp<long>(v, 0, static_cast<long>(k) - 1));
}

/// Nearest integer to the mean opinion; exact halves go to the lower position.
inline std::size_t draft_position(std::span<const std::size_t> opinions) {
  if (opinions.empty()) throw ArgumentError("no opinions");
  const std::size_t n = opinions.size();
  const std::size_t s = std::accumulate(opinions.begin(), opinions.end(), std::size_t{0});
  const std::size_t lo = s / n;
  return 2 * (s - n * lo) <= n ? lo : lo + 1;
}

/// clamp(draft + sign(sum of directions)).
inline std::size_t revised_position(std::size_t draft, std::span<const int> directions, std::size_t k) {
  const int sum = std::accumulate(directions.begin(), directions.end(), 0);
  const int sign = (sum > 0) - (sum < 0);
  return clamp_position(static_cast<long>(draft) + sign, k);
}

inline double payoff_value(std::size_t revised, std::size_t theta, std::size_t k) {
  const double d = std::abs(static_cast<double>(revised) - static_cast<double>(theta));
  return 1.0 - d / static_cast<double>(k - 1);
}

/// Signed distance bucket clamp(opinion - draft, -2, 2) shifted to [0, 5).
inline std::size_t distance_bucket(std::size_t opinion, std::size_t draft) {
  const long d = static_cast<long>(opinion) - static_cast<long>(draft);
  return static_cast<std::size_t>(std::clamp<long>(d, -kMaxBucket, kMaxBucket) + kMaxBucket);
}

inline std::size_t direction_index(int direction) { return static_cast<std::size_t>(direction + 1); }
inline int direction_of(std::size_t index) { return static_cast<int>(index) - 1; }

/// Staged state indices.
struct StateLayout {
  std::size_t k = 5;
  std::size_t question() const noexcept { return 0; }
  std::size_t draft(std::size_t d) const noexcept { return 1 + d; }
  std::size_t revised(std::size_t r) const noexcept { return 1 + k + r; }
  std::size_t n_states() const noexcept { return 1 + 2 * k; }
  bool is_draft(std::size_t x) const noexcept { return x >= 1 && x <= k; }
  bool is_revised(std::size_t x) const noexcept { return x > k && x < n_states(); }
  std::size_t position(std::size_t x) const noexcept { return is_draft(x) ? x - 1 : x - 1 - k; }
};

/// Per-participant action index of (opinion, direction, style).
struct ActionLayout {
  std::size_t n_styles = 2;
  ActionIndex encode(std::size_t opinion, int direction, std::size_t style) const {
    return (opinion * kDirections + direction_index(direction)) * n_styles + style;
  }
  std::size_t opinion(ActionIndex a) const { return a / n_styles / kDirections; }
  int direction(ActionIndex a) const { return direction_of((a / n_styles) % kDirections); }
  std::size_t style(ActionIndex a) const { return a % n_styles; }
};

/// The rule-based mediator as a stationary transition model. It computes
/// successors on the fly instead of storing a dense kernel.
class ConsensusMediator {
 public:
  ConsensusMediator(std::size_t k, std::size_t group_size, std::size_t n_styles)
      : states_{k}, actions_{n_styles}, group_size_(group_size), n_actions_(k * kDirections * n_styles) {
    n_joint_ = 1;
    for (std::size_t i = 0; i < group_size_; ++i) n_joint_ *= n_actions_;
  }

  std::size_t n_states() const noexcept { return states_.n_states(); }
  std::size_t n_joint_actions() const noexcept { return n_joint_; }
  std::size_t horizon() const noexcept { return 3; }

  StateIndex successor(StateIndex x, JointAction u) const {
    if (x >= n_states() || u >= n_joint_) throw DimensionError("mediator index out of range");
    if (states_.is_revised(x)) return x;
    std::vector<std::size_t> opinions(group_size_);
    std::vector<int> directions(group_size_);
    for (std::size_t i = group_size_; i-- > 0;) {
      const ActionIndex a = u % n_actions_;
      u /= n_actions_;
      opinions[i] = actions_.opinion(a);
      directions[i] = actions_.direction(a);
    }
    if (x == states_.question()) return states_.draft(draft_position(opinions));
    return states_.revised(revised_position(states_.position(x), directions, states_.k));
  }

  template <class Fn>
  void for_each_successor(std::size_t t, StateIndex x, JointAction u, Fn&& fn) const {
    if (t + 1 >= horizon()) throw DimensionError("kernel timestep out of range");
    fn(successor(x, u), 1.0);
  }

  /// Dense copy; only sensible for tiny configurations.
  Mechanism to_tabular(const FiniteSpaces& spaces) const {
    const std::size_t n = n_states();
    KernelTables k(1, std::vector<std::vector<Row>>(n, std::vector<Row>(n_joint_, Row(n, 0.0))));
    for (StateIndex x = 0; x < n; ++x)
      for (JointAction u = 0; u < n_joint_; ++u) k[0][x][u][successor(x, u)] = 1.0;
    return Mechanism(spaces, k);
  }

  const StateLayout& states() const noexcept { return states_; }
  const ActionLayout& actions() const noexcept { return actions_; }

 private:
  StateLayout states_;
  ActionLayout actions_;
  std::size_t group_size_;
  std::size_t n_actions_;
  std::size_t n_joint_ = 1;
};

/// Spaces, mediator and payoffs for one group.
class ConsensusGame {
 public:
  ConsensusGame(const ConsensusConfig& config, std::vector<Participant> group)
      : config_(config),
        group_(std::move(group)),
        spaces_(make_spaces(config_, group_.size())),
        mediator_(config_.n_positions, group_.size(), config_.n_styles()),
        payoff_(spaces_, make_payoffs(config_, group_, mediator_.states())) {
    detail::throw_if_any(config_.validate());
    for (const auto& p : group_)
      if (p.theta >= config_.n_positions) throw ValidationError({{"participant theta out of range"}});
  }

  const ConsensusConfig& config() const noexcept { return config_; }
  const std::vector<Participant>& group() const noexcept { return group_; }
  const FiniteSpaces& spaces() const noexcept { return spaces_; }
  const ConsensusMediator& mediator() const noexcept { return mediator_; }
  const PayoffTable& payoff() const noexcept { return payoff_; }
  const StateLayout& states() const noexcept { return mediator_.states(); }
  const ActionLayout& actions() const noexcept { return mediator_.actions(); }
  std::vector<double> init() const { return point_mass(spaces_.n_states(), states().question()); }

 private:
  static FiniteSpaces make_spaces(const ConsensusConfig& config, std::size_t group_size) {
    detail::throw_if_any(config.validate());
    const StateLayout states{config.n_positions};
    std::vector<std::string> state_labels{"Q"};
    for (std::size_t d = 0; d < config.n_positions; ++d) state_labels.push_back("D" + std::to_string(d));
    for (std::size_t r = 0; r < config.n_positions; ++r) state_labels.push_back("R" + std::to_string(r));
    std::vector<std::string> star;
    std::vector<std::string> labels;
    for (std::size_t o = 0; o < config.n_positions; ++o)
      for (std::size_t d = 0; d < kDirections; ++d) {
        const int dir = direction_of(d);
        const std::string s = std::to_string(o) + (dir > 0 ? "+" : dir < 0 ? "-" : "=");
        star.push_back(s);
        for (const auto& style : config.style_labels) labels.push_back(s + style);
      }
    std::vector<std::vector<std::string>> actions(group_size, labels);
    std::vector<Factorization> fs(group_size, Factorization(star, config.style_labels));
    (void)states;
    return FiniteSpaces(state_labels, actions, 3, std::move(fs));
  }

  static PayoffValues make_payoffs(const ConsensusConfig& config, const std::vector<Participant>& group,
                                   const StateLayout& states) {
    PayoffValues g(states.n_states(), std::vector<double>(group.size(), 0.0));
    for (std::size_t r = 0; r < config.n_positions; ++r)
      for (std::size_t i = 0; i < group.size(); ++i)
        g[states.revised(r)][i] = payoff_value(r, group[i].theta, config.n_positions);
    return g;
  }

  ConsensusConfig config_;
  std::vector<Participant> group_;
  FiniteSpaces spaces_;
  ConsensusMediator mediator_;
  PayoffTable payoff_;
};

// ---------------------------------------------------------------------------
// Policies
// ---------------------------------------------------------------------------

/// Softmax over d in {-1, 0, +1} of -beta * |clamp(draft + d) - theta|.
inline std::array<double, kDirections> ground_truth_directions(const Participant& p, std::size_t draft, std::size_t k) {
  std::array<double, kDirections> logits{};
  for (std::size_t d = 0; d < kDirections; ++d) {
    const std::size_t target = clamp_position(static_cast<long>(draft) + direction_of(d), k);
    logits[d] = -p.beta * std::abs(static_cast<double>(target) - static_cast<double>(p.theta));
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  std::array<double, kDirections> out{};
  double z = 0.0;
  for (std::size_t d = 0; d < kDirections; ++d) z += out[d] = std::exp(logits[d] - m);
  for (double& v : out) v /= z;
  return out;
}

inline std::vector<double> ground_truth_styles(const Participant& p, std::size_t n_styles) {
  if (n_styles == 1) return {1.0};
  std::vector<double> out(n_styles, (1.0 - p.style_p) / static_cast<double>(n_styles - 1));
  out[0] = p.style_p;
  return out;
}

/// Critique-step distribution of a participant with the given opinion.
struct CritiqueDistribution {
  std::function<std::array<double, kDirections>(std::size_t draft)> directions;
  std::vector<double> styles;
};

/// Stationary policy: opinion stated at the question state, a critique drawn
/// from `critique` at draft states, and a fixed dummy action at revised states.
inline PolicyPtr staged_policy(const ConsensusGame& game, std::size_t slot, std::size_t opinion,
                               const CritiqueDistribution& critique) {
  const auto& states = game.states();
  const auto& actions = game.actions();
  const std::size_t k = game.config().n_positions;
  const std::size_t n_actions = game.config().n_actions();
  std::vector<Row> table(states.n_states(), Row(n_actions, 0.0));
  table[states.question()][actions.encode(opinion, 0, 0)] = 1.0;
  for (std::size_t d = 0; d < k; ++d) {
    const auto dirs = critique.directions(d);
    auto& row = table[states.draft(d)];
    for (std::size_t di = 0; di < kDirections; ++di)
      for (std::size_t s = 0; s < critique.styles.size(); ++s)
        row[actions.encode(opinion, direction_of(di), s)] = dirs[di] * critique.styles[s];
  }
  for (std::size_t r = 0; r < k; ++r) table[states.revised(r)][actions.encode(opinion, 0, 0)] = 1.0;
  return std::make_shared<const Policy>(game.spaces(), slot, PolicyTables{table});
}

inline PolicyPtr ground_truth_policy(const ConsensusGame& game, std::size_t slot) {
  const Participant& p = game.group().at(slot);
  const std::size_t k = game.config().n_positions;
  return staged_policy(game, slot, p.theta,
                       {[&](std::size_t draft) { return ground_truth_directions(p, draft, k); },
                        ground_truth_styles(p, game.config().n_styles())});
}

inline PolicyProfile ground_truth_profile(const ConsensusGame& game) {
  std::vector<PolicyPtr> out;
  for (std::size_t i = 0; i < game.group().size(); ++i) out.push_back(ground_truth_policy(game, i));
  return PolicyProfile(std::move(out));
}

inline double ground_truth_logprob(const Participant& p, std::size_t draft, const Critique& c, std::size_t k,
                                   std::size_t n_styles) {
  const auto dirs = ground_truth_directions(p, draft, k);
  const auto styles = ground_truth_styles(p, n_styles);
  return std::log(dirs[direction_index(c.direction)] * styles.at(c.style));
}

// ---------------------------------------------------------------------------
// Dataset generation and splitting
// ---------------------------------------------------------------------------

struct ConsensusData {
  std::vector<Participant> population;
  Dataset dataset;
};

inline std::vector<Participant> sample_population(const ConsensusConfig& config, Rng& rng) {
  std::vector<Participant> out;
  for (std::size_t id = 0; id < config.n_participants; ++id) {
    Participant p;
    p.id = id;
    p.theta = uniform_index(rng, config.n_positions);
    p.beta = uniform_in(rng, config.beta_min, config.beta_max);
    p.style_p = uniform_in(rng, config.style_p_min, config.style_p_max);
    out.push_back(p);
  }
  return out;
}

/// Fixed cohorts of group_size participants; when the population is not a
/// multiple of group_size the last cohort overlaps the previous one.
inline std::vector<std::vector<std::size_t>> form_cohorts(std::size_t n_participants, std::size_t group_size,
                                                          Rng& rng) {
  std::vector<std::size_t> ids(n_participants);
  std::iota(ids.begin(), ids.end(), 0);
  shuffle(ids, rng);
  std::vector<std::vector<std::size_t>> cohorts;
  for (std::size_t start = 0; start < n_participants; start += group_size) {
    const std::size_t begin = std::min(start, n_participants - group_size);
    cohorts.emplace_back(ids.begin() + static_cast<long>(begin), ids.begin() + static_cast<long>(begin + group_size));
  }
  return cohorts;
}

inline EpisodeRecord record_from_trajectory(const ConsensusGame& game, std::size_t question,
                                            const Trajectory& traj) {
  const auto& states = game.states();
  const auto& actions = game.actions();
  EpisodeRecord rec;
  rec.question = question;
  for (const auto& p : game.group()) rec.participants.push_back(p.id);
  rec.draft = states.position(traj.states[1]);
  rec.revised = states.position(traj.states[2]);
  const auto opinion_actions = game.spaces().decode(traj.joint_actions[0]);
  const auto critique_actions = game.spaces().decode(traj.joint_actions[1]);
  for (std::size_t i = 0; i < game.group().size(); ++i) {
    rec.opinions.push_back(actions.opinion(opinion_actions[i]));
    rec.critiques.push_back({actions.direction(critique_actions[i]), actions.style(critique_actions[i])});
  }
  return rec;
}

/// Samples a population, forms cohorts, assigns questions to cohorts round
/// robin and rolls out each episode under the ground-truth policies. Episode q
/// uses the stream derive_seed(seed, 1) / q.
inline ConsensusData generate_dataset(const ConsensusConfig& config, std::size_t threads = 1) {
  detail::throw_if_any(config.validate());
  if (config.group_size > config.n_participants)
    throw ArgumentError("group_size " + std::to_string(config.group_size) + " exceeds population " +
                        std::to_string(config.n_participants));
  Rng rng = make_rng(config.seed, 0);
  ConsensusData data;
  data.population = sample_population(config, rng);
  const auto cohorts = form_cohorts(config.n_participants, config.group_size, rng);
  if (config.n_questions < 3 * cohorts.size())
    throw ArgumentError("n_questions must be at least 3 per cohort (" + std::to_string(3 * cohorts.size()) + ")");
  data.dataset.resize(config.n_questions);
  const std::uint64_t episode_seed = derive_seed(config.seed, 1);
  parallel_for(config.n_questions, threads, [&](std::size_t q) {
    std::vector<Participant> group;
    for (std::size_t id : cohorts[q % cohorts.size()]) group.push_back(data.population[id]);
    const ConsensusGame game(config, std::move(group));
    const auto traj =
        rollout_seeded(ground_truth_profile(game), game.mediator(), game.states().question(), episode_seed, q);
    data.dataset[q] = record_from_trajectory(game, q, traj);
  });
  return data;
}

struct SplitResult {
  Dataset train;
  Dataset validation;
  double validation_participant_fraction = 0.0;
  double validation_episode_fraction = 0.0;
};

/// Groups participants into connected components of the co-participation
/// graph and assigns whole components to one side, so the split is disjoint by
/// episode and by participant.
inline SplitResult split_dataset(const Dataset& dataset, double val_fraction, Rng& rng) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ArgumentError("val_fraction must lie in (0, 1)");
  std::map<std::size_t, std::size_t> parent;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (const auto& rec : dataset)
    for (std::size_t id : rec.participants) parent.try_emplace(id, id);
  for (const auto& rec : dataset)
    for (std::size_t k = 1; k < rec.participants.size(); ++k) {
      const std::size_t a = find(rec.participants[0]);
      const std::size_t b = find(rec.participants[k]);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  std::vector<std::size_t> roots;
  for (const auto& [id, _] : parent)
    if (find(id) == id) roots.push_back(id);
  if (roots.size() < 2) throw ArgumentError("dataset has fewer than two independent participant groups");
  shuffle(roots, rng);
  const auto n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(roots.size()))), 1, roots.size() - 1);
  std::unordered_set<std::size_t> val_roots(roots.begin(), roots.begin() + static_cast<long>(n_val));

  SplitResult out;
  std::size_t val_participants = 0;
  for (const auto& [id, _] : parent)
    if (val_roots.count(find(id))) ++val_participants;
  for (auto rec : dataset) {
    const bool val = !rec.participants.empty() && val_roots.count(find(rec.participants[0]));
    rec.split = val ? "validation" : "train";
    (val ? out.validation : out.train).push_back(std::move(rec));
  }
  out.validation_participant_fraction = static_cast<double>(val_participants) / static_cast<double>(parent.size());
  out.validation_episode_fraction =
      static_cast<double>(out.validation.size()) / static_cast<double>(std::max<std::size_t>(dataset.size(), 1));
  return out;
}

// ---------------------------------------------------------------------------
// Tabular critique models
// ---------------------------------------------------------------------------

/// Direction distribution per distance bucket, and a style distribution.
struct CritiqueModel {
  std::array<std::array<double, kDirections>, kBuckets> direction{};
  std::vector<double> style;

  double prob(std::size_t bucket, const Critique& c) const {
    return direction.at(bucket)[direction_index(c.direction)] * style.at(c.style);
  }
  double logprob(std::size_t opinion, std::size_t draft, const Critique& c) const {
    return std::log(prob(distance_bucket(opinion, draft), c));
  }
};

struct CritiqueCounts {
  std::array<std::array<double, kDirections>, kBuckets> direction{};
  std::vector<double> style;
  std::size_t n_records = 0;

  explicit CritiqueCounts(std::size_t n_styles) : style(n_styles, 0.0) {}

  void add(std::size_t opinion, std::size_t draft, const Critique& c) {
    direction[distance_bucket(opinion, draft)][direction_index(c.direction)] += 1.0;
    style.at(c.style) += 1.0;
    ++n_records;
  }
};

/// normalize(counts + alpha) row by row.
inline CritiqueModel smoothed_model(const CritiqueCounts& counts, double alpha) {
  if (!(alpha > 0.0)) throw ArgumentError("alpha must be positive");
  CritiqueModel m;
  for (std::size_t b = 0; b < kBuckets; ++b) {
    double z = 0.0;
    for (std::size_t d = 0; d < kDirections; ++d) z += counts.direction[b][d] + alpha;
    for (std::size_t d = 0; d < kDirections; ++d) m.direction[b][d] = (counts.direction[b][d] + alpha) / z;
  }
  double z = 0.0;
  for (double c : counts.style) z += c + alpha;
  for (double c : counts.style) m.style.push_back((c + alpha) / z);
  return m;
}

/// lambda * personal + (1 - lambda) * population, entrywise.
inline CritiqueModel blend(const CritiqueModel& personal, const CritiqueModel& population, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ArgumentError("lambda must lie in [0, 1]");
  if (personal.style.size() != population.style.size()) throw DimensionError("style counts differ");
  if (lambda == 0.0) return population;
  CritiqueModel m;
  for (std::size_t b = 0; b < kBuckets; ++b)
    for (std::size_t d = 0; d < kDirections; ++d)
      m.direction[b][d] = lambda * personal.direction[b][d] + (1 - lambda) * population.direction[b][d];
  for (std::size_t s = 0; s < personal.style.size(); ++s)
    m.style.push_back(lambda * personal.style[s] + (1 - lambda) * population.style[s]);
  return m;
}

inline CritiqueModel uniform_model(std::size_t n_styles) {
  CritiqueModel m;
  for (auto& row : m.direction) row.fill(1.0 / kDirections);
  m.style.assign(n_styles, 1.0 / static_cast<double>(n_styles));
  return m;
}

/// Counts over every critique in `data`.
inline CritiqueCounts count_all(const Dataset& data, std::size_t n_styles) {
  CritiqueCounts c(n_styles);
  for (const auto& rec : data)
    for (std::size_t j = 0; j < rec.participants.size(); ++j) c.add(rec.opinions[j], rec.draft, rec.critiques[j]);
  return c;
}

/// Counts over one participant's critiques, optionally skipping one question.
inline CritiqueCounts count_participant(const Dataset& data, std::size_t participant_id, std::size_t n_styles,
                                        std::optional<std::size_t> exclude_question = std::nullopt) {
  CritiqueCounts c(n_styles);
  for (const auto& rec : data) {
    if (exclude_question && rec.question == *exclude_question) continue;
    for (std::size_t j = 0; j < rec.participants.size(); ++j)
      if (rec.participants[j] == participant_id) c.add(rec.opinions[j], rec.draft, rec.critiques[j]);
  }
  return c;
}

/// The population ("vanilla") model fitted on every participant in `train`.
inline CritiqueModel fit_population(const Dataset& train, std::size_t n_styles, double alpha) {
  return smoothed_model(count_all(train, n_styles), alpha);
}

/// Personal smoothed model of `participant_id` from `context`, blended with
/// `population`. Throws when the participant has no records in `context`.
inline CritiqueModel fit_representative(const Dataset& context, const CritiqueModel& population,
                                        std::size_t participant_id, double alpha, double lambda,
                                        std::optional<std::size_t> exclude_question = std::nullopt) {
  const auto counts = count_participant(context, participant_id, population.style.size(), exclude_question);
  if (counts.n_records == 0) throw ArgumentError("unknown participant id " + std::to_string(participant_id));
  return blend(smoothed_model(counts, alpha), population, lambda);
}

/// Personal model fitted on `train` with the population model of `train`.
inline CritiqueModel fit_representative(const Dataset& train, std::size_t participant_id, std::size_t n_styles,
                                        double alpha, double lambda) {
  return fit_representative(train, fit_population(train, n_styles, alpha), participant_id, alpha, lambda);
}

/// Model used for the participant in slot j of a record.
using ModelLookup = std::function<const CritiqueModel&(const EpisodeRecord&, std::size_t slot)>;

/// Mean per-critique log-probability; -inf when any critique has zero mass.
inline double heldout_loglik(const ModelLookup& model, const Dataset& validation) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& rec : validation)
    for (std::size_t j = 0; j < rec.participants.size(); ++j) {
      total += model(rec, j).logprob(rec.opinions[j], rec.draft, rec.critiques[j]);
      ++n;
    }
  if (n == 0) throw ArgumentError("validation set has no critiques");
  return total / static_cast<double>(n);
}

inline double heldout_loglik(const CritiqueModel& model, const Dataset& validation) {
  return heldout_loglik([&](const EpisodeRecord&, std::size_t) -> const CritiqueModel& { return model; }, validation);
}

// ---------------------------------------------------------------------------
// Win-rate against a baseline under a rater
// ---------------------------------------------------------------------------

struct CritiqueContext {
  const EpisodeRecord* record = nullptr;
  std::size_t slot = 0;
  std::size_t participant() const { return record->participants[slot]; }
  std::size_t opinion() const { return record->opinions[slot]; }
  std::size_t draft() const { return record->draft; }
};

using CritiqueSampler = std::function<Critique(const CritiqueContext&, Rng&)>;
/// Positive when the first critique is preferred, negative for the second,
/// zero for a tie.
using Rater = std::function<double(const CritiqueContext&, const Critique&, const Critique&)>;

inline Critique sample_critique(const CritiqueModel& model, std::size_t opinion, std::size_t draft, Rng& rng) {
  const auto& dirs = model.direction.at(distance_bucket(opinion, draft));
  const std::size_t d = sample_index(dirs, rng);
  const std::size_t s = sample_index(model.style, rng);
  return {direction_of(d), s};
}

inline CritiqueSampler model_sampler(ModelLookup lookup) {
  return [lookup = std::move(lookup)](const CritiqueContext& c, Rng& rng) {
    return sample_critique(lookup(*c.record, c.slot), c.opinion(), c.draft(), rng);
  };
}

/// Returns the recorded critique.
inline CritiqueSampler recorded_sampler() {
  return [](const CritiqueContext& c, Rng&) { return c.record->critiques[c.slot]; };
}

/// Prefers the critique with higher log-probability under the participant's
/// ground-truth policy.
inline Rater ground_truth_rater(const std::vector<Participant>& population, const ConsensusConfig& config) {
  return [&population, k = config.n_positions, s = config.n_styles()](const CritiqueContext& c, const Critique& a,
                                                                       const Critique& b) {
    const Participant& p = population.at(c.participant());
    return ground_truth_logprob(p, c.draft(), a, k, s) - ground_truth_logprob(p, c.draft(), b, k, s);
  };
}

/// Fraction of n sampled contexts where the rater prefers the candidate's
/// critique; ties count one half.
inline double rater_winrate(const CritiqueSampler& candidate, const CritiqueSampler& baseline, const Rater& rater,
                            const Dataset& validation, std::size_t n, Rng& rng) {
  if (n == 0) throw ArgumentError("win-rate needs at least one comparison");
  std::vector<CritiqueContext> contexts;
  for (const auto& rec : validation)
    for (std::size_t j = 0; j < rec.participants.size(); ++j) contexts.push_back({&rec, j});
  if (contexts.empty()) throw ArgumentError("validation set has no critiques");
  double wins = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& c = contexts[uniform_index(rng, contexts.size())];
    const Critique a = candidate(c, rng);
    const Critique b = baseline(c, rng);
    const double r = rater(c, a, b);
    wins += r > 0 ? 1.0 : r < 0 ? 0.0 : 0.5;
  }
  return wins / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Substitution
// ---------------------------------------------------------------------------

enum class Regime { single, all };

inline std::string to_string(Regime r) { return r == Regime::single ? "single" : "all"; }

/// Policy that acts like the participant at the opinion step and samples
/// critiques from `model`.
inline PolicyPtr representative_policy(const ConsensusGame& game, std::size_t slot, std::size_t opinion,
                                       const CritiqueModel& model) {
  return staged_policy(game, slot, opinion,
                       {[&](std::size_t draft) { return model.direction.at(distance_bucket(opinion, draft)); },
                        model.style});
}

struct EpisodeSubstitution {
  std::size_t question = 0;
  std::vector<std::size_t> substituted;
  double payoff_discrepancy = 0.0;
  double representativity = 0.0;
};

struct SubstitutionReport {
  Regime regime = Regime::all;
  double mean_discrepancy = 0.0;
  double mean_representativity = 0.0;
  std::vector<EpisodeSubstitution> episodes;
};

/// Exact expected payoffs under the ground-truth profile and the substituted
/// one for every episode. In the single regime episode q substitutes the slot
/// drawn from stream (seed, q), so every model sees the same choice.
inline SubstitutionReport evaluate_substitution(const ConsensusConfig& config,
                                                const std::vector<Participant>& population,
                                                const ModelLookup& models, Regime regime, const Dataset& episodes,
                                                std::uint64_t seed, std::size_t threads = 1) {
  SubstitutionReport report;
  report.regime = regime;
  report.episodes.resize(episodes.size());
  parallel_for(episodes.size(), threads, [&](std::size_t e) {
    const EpisodeRecord& rec = episodes[e];
    std::vector<Participant> group;
    for (std::size_t id : rec.participants) group.push_back(population.at(id));
    const ConsensusGame game(config, std::move(group));
    const PolicyProfile truth = ground_truth_profile(game);
    std::vector<std::size_t> slots;
    if (regime == Regime::single) {
      Rng rng = make_rng(seed, rec.question);
      slots.push_back(uniform_index(rng, rec.participants.size()));
    } else {
      slots.resize(rec.participants.size());
      std::iota(slots.begin(), slots.end(), 0);
    }
    auto policies = truth.policies();
    for (std::size_t j : slots) policies[j] = representative_policy(game, j, rec.opinions[j], models(rec, j));
    const PolicyProfile substituted(std::move(policies));
    const Discrepancy disc{DiscrepancyKind::mean_absolute, slots};
    const auto init = game.init();
    EpisodeSubstitution out;
    out.question = rec.question;
    out.substituted = slots;
    out.payoff_discrepancy = payoff_discrepancy(truth, substituted, game.mediator(), game.payoff(), init, disc);
    const std::vector<ConsensusMediator> family{game.mediator()};
    out.representativity =
        representativity(truth, substituted, family, {QFunction::terminal(game.payoff(), game.spaces().n_joint_actions())},
                         disc, init)
            .value;
    report.episodes[e] = std::move(out);
  });
  for (const auto& ep : report.episodes) {
    report.mean_discrepancy += ep.payoff_discrepancy;
    report.mean_representativity += ep.representativity;
  }
  if (!episodes.empty()) {
    report.mean_discrepancy /= static_cast<double>(episodes.size());
    report.mean_representativity /= static_cast<double>(episodes.size());
  }
  return report;
}

// ---------------------------------------------------------------------------
// Full experiment
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names{"population", "personal", "uniform"};
  return names;
}

struct ModelMetrics {
  double loglik = 0.0;
  double winrate = 0.0;
  double discrepancy_single = 0.0;
  double discrepancy_all = 0.0;
};

struct ConsensusResults {
  ConsensusData data;
  SplitResult split;
  /// Keyed by model_names().
  std::map<std::string, ModelMetrics> metrics;
};

/// Generates the dataset, splits it, fits the population model on train and
/// leave-one-episode-out personal models on validation, and evaluates every
/// model on the validation episodes.
inline ConsensusResults run_consensus_experiment(const ConsensusConfig& config, std::size_t threads = 1) {
  ConsensusResults res;
  res.data = generate_dataset(config, threads);
  Rng split_rng = make_rng(config.seed, 2);
  res.split = split_dataset(res.data.dataset, config.val_fraction, split_rng);
  const Dataset& val = res.split.validation;
  const std::size_t n_styles = config.n_styles();

  const CritiqueModel population = fit_population(res.split.train, n_styles, config.alpha);
  const CritiqueModel uniform = uniform_model(n_styles);
  std::map<std::pair<std::size_t, std::size_t>, CritiqueModel> personal;
  for (const auto& rec : val)
    for (std::size_t j = 0; j < rec.participants.size(); ++j)
      personal.emplace(std::pair{rec.question, j}, fit_representative(val, population, rec.participants[j],
                                                                      config.alpha, config.lambda, rec.question));

  std::map<std::string, ModelLookup> lookups{
      {"population", [&](const EpisodeRecord&, std::size_t) -> const CritiqueModel& { return population; }},
      {"personal",
       [&](const EpisodeRecord& r, std::size_t j) -> const CritiqueModel& { return personal.at({r.question, j}); }},
      {"uniform", [&](const EpisodeRecord&, std::size_t) -> const CritiqueModel& { return uniform; }},
  };
  const Rater rater = ground_truth_rater(res.data.population, config);
  for (std::size_t m = 0; m < model_names().size(); ++m) {
    const std::string& name = model_names()[m];
    ModelMetrics mm;
    mm.loglik = heldout_loglik(lookups.at(name), val);
    Rng rng = make_rng(config.seed, 3);
    mm.winrate = rater_winrate(model_sampler(lookups.at(name)), recorded_sampler(), rater, val,
                               config.winrate_samples, rng);
    const std::uint64_t sub_seed = derive_seed(config.seed, 4);
    mm.discrepancy_single =
        evaluate_substitution(config, res.data.population, lookups.at(name), Regime::single, val, sub_seed, threads)
            .mean_discrepancy;
    mm.discrepancy_all =
        evaluate_substitution(config, res.data.population, lookups.at(name), Regime::all, val, sub_seed, threads)
            .mean_discrepancy;
    res.metrics[name] = mm;
  }
  return res;
}

}  // namespace repsim::consensus
