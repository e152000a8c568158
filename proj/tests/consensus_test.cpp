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

#include <cmath>
#include <map>
#include <set>

#include "repsim/repsim.hpp"

namespace repsim::consensus {
namespace {

ConsensusConfig small_config(std::uint64_t seed = 7) {
  ConsensusConfig c;
  c.n_participants = 12;
  c.n_questions = 24;
  c.winrate_samples = 400;
  c.seed = seed;
  return c;
}

TEST(MediatorRules, DraftAndRevision) {
  const std::vector<std::size_t> ops{1, 1, 4};
  EXPECT_EQ(draft_position(ops), 2u);
  const std::vector<std::size_t> half{1, 2};
  EXPECT_EQ(draft_position(half), 1u);
  const std::vector<int> dirs{1, 1, -1};
  EXPECT_EQ(revised_position(2, dirs, 5), 3u);
  const std::vector<int> zero{0, 0, 0};
  EXPECT_EQ(revised_position(2, zero, 5), 2u);
  const std::vector<int> up{1, 1, 1};
  EXPECT_EQ(revised_position(4, up, 5), 4u);
  EXPECT_THROW(draft_position(std::vector<std::size_t>{}), ArgumentError);
}

TEST(MediatorRules, DraftIsNearestToMean) {
  Rng rng = make_rng(90, 0);
  for (int k = 0; k < 500; ++k) {
    std::vector<std::size_t> ops(3 + uniform_index(rng, 3));
    for (auto& o : ops) o = uniform_index(rng, 5);
    const double mean = std::accumulate(ops.begin(), ops.end(), 0.0) / static_cast<double>(ops.size());
    const double d = static_cast<double>(draft_position(ops));
    for (std::size_t c = 0; c < 5; ++c) EXPECT_LE(std::abs(d - mean), std::abs(static_cast<double>(c) - mean) + 1e-12);
  }
}

TEST(MediatorRules, PayoffsLieInUnitInterval) {
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t th = 0; th < 5; ++th) {
      const double g = payoff_value(r, th, 5);
      EXPECT_GE(g, 0.0);
      EXPECT_LE(g, 1.0);
      EXPECT_EQ(g == 1.0, r == th);
    }
}

TEST(GroundTruth, SoftmaxExample) {
  const Participant p{0, 4, 1.0, 0.5};
  const auto d = ground_truth_directions(p, 2, 5);
  EXPECT_NEAR(d[0], 0.0900, 1e-4);
  EXPECT_NEAR(d[1], 0.2447, 1e-4);
  EXPECT_NEAR(d[2], 0.6652, 1e-4);
}

TEST(GroundTruth, AtOpinionStayIsMostLikely) {
  for (std::size_t th = 0; th < 5; ++th) {
    const Participant p{0, th, 1.5, 0.5};
    const auto d = ground_truth_directions(p, th, 5);
    EXPECT_GE(d[1], d[0]);
    EXPECT_GE(d[1], d[2]);
  }
}

TEST(GroundTruth, SharpLimitIsDeterministic) {
  const Participant p{0, 4, 50.0, 0.5};
  const auto d = ground_truth_directions(p, 2, 5);
  EXPECT_NEAR(d[2], 1.0, 1e-6);
}

TEST(GroundTruth, MediatorIsStyleInvariant) {
  ConsensusConfig c = small_config();
  const auto data = generate_dataset(c);
  std::vector<Participant> group(data.population.begin(), data.population.begin() + 3);
  const ConsensusGame game(c, group);
  ASSERT_TRUE(game.spaces().factorization().has_value());
  EXPECT_TRUE(is_bot_invariant(game.mediator(), *game.spaces().factorization()));
  EXPECT_EQ(game.mediator().horizon(), 3u);
  EXPECT_EQ(game.spaces().n_states(), 11u);
  for (StateIndex x = 0; x < game.spaces().n_states(); ++x)
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_GE(game.payoff()(x, i), 0.0);
      EXPECT_LE(game.payoff()(x, i), 1.0);
      if (!game.states().is_revised(x)) {
        EXPECT_EQ(game.payoff()(x, i), 0.0);
      }
    }
}

TEST(Dataset, StructureAndDeterminism) {
  const auto c = small_config();
  const auto a = generate_dataset(c);
  const auto b = generate_dataset(c, 4);
  EXPECT_EQ(a.dataset, b.dataset);
  ASSERT_EQ(a.dataset.size(), c.n_questions);
  std::map<std::size_t, int> episodes;
  for (const auto& rec : a.dataset) {
    ASSERT_EQ(rec.participants.size(), c.group_size);
    ASSERT_EQ(rec.opinions.size(), c.group_size);
    ASSERT_EQ(rec.critiques.size(), c.group_size);
    EXPECT_LT(rec.draft, c.n_positions);
    EXPECT_LT(rec.revised, c.n_positions);
    EXPECT_EQ(rec.draft, draft_position(rec.opinions));
    std::vector<int> dirs;
    for (std::size_t j = 0; j < c.group_size; ++j) {
      EXPECT_EQ(rec.opinions[j], a.population[rec.participants[j]].theta);
      EXPECT_LT(rec.critiques[j].style, c.n_styles());
      dirs.push_back(rec.critiques[j].direction);
      ++episodes[rec.participants[j]];
    }
    EXPECT_EQ(rec.revised, revised_position(rec.draft, dirs, c.n_positions));
  }
  EXPECT_EQ(episodes.size(), c.n_participants);
  for (const auto& [id, n] : episodes) EXPECT_GE(n, 3) << id;
  EXPECT_NE(generate_dataset(small_config(8)).dataset, a.dataset);
}

TEST(Dataset, RejectsTooFewQuestions) {
  auto c = small_config();
  c.n_questions = 5;
  EXPECT_THROW(generate_dataset(c), ArgumentError);
  c = small_config();
  c.group_size = 7;
  EXPECT_THROW(generate_dataset(c), ValidationError);
}

TEST(Split, DisjointByEpisodeAndParticipant) {
  for (double frac : {0.2, 0.5}) {
    auto c = small_config();
    c.n_participants = 100;
    c.n_questions = 102;
    const auto data = generate_dataset(c);
    Rng rng = make_rng(91, 0);
    const auto s = split_dataset(data.dataset, frac, rng);
    EXPECT_EQ(s.train.size() + s.validation.size(), data.dataset.size());
    std::set<std::size_t> tq, vq, tp, vp;
    for (const auto& r : s.train) {
      tq.insert(r.question);
      tp.insert(r.participants.begin(), r.participants.end());
      EXPECT_EQ(r.split, "train");
    }
    for (const auto& r : s.validation) {
      vq.insert(r.question);
      vp.insert(r.participants.begin(), r.participants.end());
      EXPECT_EQ(r.split, "validation");
    }
    for (auto q : vq) EXPECT_FALSE(tq.count(q));
    for (auto p : vp) EXPECT_FALSE(tp.count(p));
    EXPECT_NEAR(s.validation_participant_fraction, frac, 0.1);
  }
}

TEST(Split, SingleComponentIsRejected) {
  EpisodeRecord r;
  r.participants = {0, 1, 2};
  r.opinions = {0, 0, 0};
  r.critiques = {{0, 0}, {0, 0}, {0, 0}};
  Rng rng = make_rng(92, 0);
  EXPECT_THROW(split_dataset({r, r}, 0.5, rng), ArgumentError);
  EXPECT_THROW(split_dataset({r}, 1.0, rng), ArgumentError);
}

TEST(Models, SmoothingExample) {
  CritiqueCounts counts(2);
  for (int k = 0; k < 3; ++k) counts.add(2, 2, {-1, 0});
  counts.add(2, 2, {0, 1});
  const auto m = smoothed_model(counts, 1.0);
  const auto& row = m.direction[distance_bucket(2, 2)];
  EXPECT_NEAR(row[0], 4.0 / 7, 1e-15);
  EXPECT_NEAR(row[1], 2.0 / 7, 1e-15);
  EXPECT_NEAR(row[2], 1.0 / 7, 1e-15);
  for (double v : m.direction[0]) EXPECT_NEAR(v, 1.0 / 3, 1e-15);
  EXPECT_NEAR(m.style[0], 4.0 / 6, 1e-15);
  EXPECT_THROW(smoothed_model(counts, 0.0), ArgumentError);
}

TEST(Models, BlendEndpoints) {
  CritiqueCounts a(2), b(2);
  a.add(0, 2, {1, 0});
  b.add(4, 2, {-1, 1});
  const auto pa = smoothed_model(a, 1.0), pb = smoothed_model(b, 1.0);
  const auto zero = blend(pa, pb, 0.0);
  EXPECT_EQ(zero.direction, pb.direction);
  EXPECT_EQ(zero.style, pb.style);
  const auto one = blend(pa, pb, 1.0);
  EXPECT_EQ(one.direction, pa.direction);
  EXPECT_THROW(blend(pa, pb, 1.5), ArgumentError);
}

TEST(Models, UnknownParticipantIsRejected) {
  const auto data = generate_dataset(small_config());
  const auto pop = fit_population(data.dataset, 2, 1.0);
  EXPECT_THROW(fit_representative(data.dataset, pop, 999, 1.0, 0.8), ArgumentError);
  EXPECT_NO_THROW(fit_representative(data.dataset, data.dataset[0].participants[0], 2, 1.0, 0.8));
}

TEST(Models, LoglikExamples) {
  EpisodeRecord r;
  r.participants = {0};
  r.opinions = {2};
  r.draft = 2;
  r.critiques = {{1, 0}};
  CritiqueModel point = uniform_model(2);
  point.direction[distance_bucket(2, 2)] = {0.0, 0.0, 1.0};
  point.style = {1.0, 0.0};
  EXPECT_EQ(heldout_loglik(point, {r}), 0.0);
  EXPECT_NEAR(heldout_loglik(uniform_model(2), {r}), std::log(1.0 / 6), 1e-15);
  EXPECT_THROW(heldout_loglik(point, {}), ArgumentError);
}

TEST(Models, MaximumLikelihoodDominatesPerturbations) {
  auto c = small_config();
  c.n_participants = 30;
  c.n_questions = 90;
  const auto data = generate_dataset(c);
  const auto fitted = fit_population(data.dataset, 2, 1e-6);
  const double base = heldout_loglik(fitted, data.dataset);
  Rng rng = make_rng(93, 0);
  for (int k = 0; k < 200; ++k) {
    auto m = fitted;
    const std::size_t b = uniform_index(rng, kBuckets);
    const std::size_t from = uniform_index(rng, kDirections);
    const std::size_t to = (from + 1 + uniform_index(rng, kDirections - 1)) % kDirections;
    const double eps = std::min(0.05, m.direction[b][from]);
    m.direction[b][from] -= eps;
    m.direction[b][to] += eps;
    EXPECT_LE(heldout_loglik(m, data.dataset), base + 1e-12);
  }
}

TEST(WinRate, IdenticalSamplersGiveOneHalf) {
  const auto c = small_config();
  const auto data = generate_dataset(c);
  const auto u = uniform_model(2);
  const ModelLookup lookup = [&](const EpisodeRecord&, std::size_t) -> const CritiqueModel& { return u; };
  const std::size_t n = 20000;
  Rng rng = make_rng(94, 0);
  const double w = rater_winrate(model_sampler(lookup), model_sampler(lookup),
                                 ground_truth_rater(data.population, c), data.dataset, n, rng);
  EXPECT_NEAR(w, 0.5, 3 * 0.5 / std::sqrt(static_cast<double>(n)));
}

TEST(WinRate, GroundTruthBeatsUniform) {
  const auto c = small_config();
  const auto data = generate_dataset(c);
  const auto u = uniform_model(2);
  const ModelLookup uniform = [&](const EpisodeRecord&, std::size_t) -> const CritiqueModel& { return u; };
  Rng rng = make_rng(95, 0);
  const auto rater = ground_truth_rater(data.population, c);
  const double w = rater_winrate(recorded_sampler(), model_sampler(uniform), rater, data.dataset, 4000, rng);
  EXPECT_GT(w, 0.5);
  EXPECT_THROW(rater_winrate(recorded_sampler(), recorded_sampler(), rater, data.dataset, 0, rng), ArgumentError);
}

TEST(Substitution, GroundTruthModelsGiveZero) {
  const auto c = small_config();
  const auto data = generate_dataset(c);
  std::map<std::pair<std::size_t, std::size_t>, CritiqueModel> exact;
  for (const auto& rec : data.dataset)
    for (std::size_t j = 0; j < rec.participants.size(); ++j) {
      const Participant& p = data.population[rec.participants[j]];
      CritiqueModel m = uniform_model(c.n_styles());
      m.direction[distance_bucket(p.theta, rec.draft)] = ground_truth_directions(p, rec.draft, c.n_positions);
      m.style = ground_truth_styles(p, c.n_styles());
      exact.emplace(std::pair{rec.question, j}, m);
    }
  const ModelLookup lookup = [&](const EpisodeRecord& r, std::size_t j) -> const CritiqueModel& {
    return exact.at({r.question, j});
  };
  for (Regime regime : {Regime::single, Regime::all}) {
    const auto rep = evaluate_substitution(c, data.population, lookup, regime, data.dataset, 5);
    EXPECT_LE(rep.mean_discrepancy, 1e-12);
    EXPECT_LE(rep.mean_representativity, 1e-12);
  }
}

TEST(Substitution, SingleUsesOneSlotAndMatchesRepresentativity) {
  const auto c = small_config();
  const auto data = generate_dataset(c);
  const auto u = uniform_model(2);
  const ModelLookup lookup = [&](const EpisodeRecord&, std::size_t) -> const CritiqueModel& { return u; };
  const auto single = evaluate_substitution(c, data.population, lookup, Regime::single, data.dataset, 5);
  const auto all = evaluate_substitution(c, data.population, lookup, Regime::all, data.dataset, 5, 3);
  for (std::size_t e = 0; e < data.dataset.size(); ++e) {
    EXPECT_EQ(single.episodes[e].substituted.size(), 1u);
    EXPECT_EQ(all.episodes[e].substituted.size(), c.group_size);
    EXPECT_NEAR(single.episodes[e].payoff_discrepancy, single.episodes[e].representativity, 1e-12);
    EXPECT_NEAR(all.episodes[e].payoff_discrepancy, all.episodes[e].representativity, 1e-12);
  }
  EXPECT_GT(all.mean_discrepancy, 0.0);
}

TEST(Experiment, FittedModelsBeatUniform) {
  auto c = small_config(3);
  c.n_participants = 30;
  c.n_questions = 120;
  const auto res = run_consensus_experiment(c, 4);
  const auto& m = res.metrics;
  ASSERT_EQ(m.size(), 3u);
  EXPECT_GT(m.at("personal").loglik, m.at("uniform").loglik);
  EXPECT_GT(m.at("population").loglik, m.at("uniform").loglik);
  EXPECT_LT(m.at("personal").discrepancy_all, m.at("uniform").discrepancy_all);
  EXPECT_LT(m.at("population").discrepancy_all, m.at("uniform").discrepancy_all);
  const auto again = run_consensus_experiment(c, 1);
  for (const auto& name : model_names()) {
    EXPECT_EQ(again.metrics.at(name).loglik, m.at(name).loglik);
    EXPECT_EQ(again.metrics.at(name).winrate, m.at(name).winrate);
    EXPECT_EQ(again.metrics.at(name).discrepancy_all, m.at(name).discrepancy_all);
  }
}

}  // namespace
}  // namespace repsim::consensus
