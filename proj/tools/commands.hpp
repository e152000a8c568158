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

// Subcommands of the repsim command-line tool. Each returns an exit code:
// 0 success, 1 property violation, 2 usage or configuration error (thrown as
// repsim::Error and mapped by the caller).

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "repsim/repsim.hpp"
#include "svg.hpp"

namespace repsim::tools {

namespace fs = std::filesystem;
using io::json;

struct RunOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::size_t threads = 0;
  std::optional<std::uint64_t> seed;
};

inline std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline const char* flag(bool b) { return b ? "true" : "false"; }

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("cannot write '" + path.string() + "'");
  out << content;
}

inline fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigurationError("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

inline fs::path resolve_relative(const std::string& config_path, const std::string& ref) {
  fs::path p(ref);
  if (p.is_absolute()) return p;
  return fs::path(config_path).parent_path() / p;
}

inline std::uint64_t config_seed(const json& cfg, const RunOptions& opt, std::uint64_t fallback) {
  if (opt.seed) return *opt.seed;
  return cfg.contains("seed") ? io::get_field<std::uint64_t>(cfg, "seed", "config") : fallback;
}

// ---------------------------------------------------------------------------
// verify-prop1
// ---------------------------------------------------------------------------

inline constexpr const char* kChainSummaryColumns =
    "instance,candidate,conditional_equal,transition_equal,trajectory_equal,conditional_deviation,"
    "transition_deviation,trajectory_deviation,chain_violation";
inline constexpr const char* kChainStrictnessColumns =
    "instance,checked,has_factorization,bot_invariant,bot_nontrivial,trajectory_equal,transition_equal,"
    "trajectory_deviation,witness_deviation,min_off_bot_mass,value_function_deviation,passed";

struct ChainConfig {
  std::uint64_t seed = 1;
  std::size_t n_random_instances = 100;
  std::size_t n_bot_invariant_instances = 20;
  bool include_g2 = true;
  std::vector<std::string> instance_files;
  double tolerance = kEquivalenceTolerance;
  std::size_t n_extra_terminal = 1;
  std::size_t closure_depth = 0;
  RandomInstanceOptions generator;
  CandidateOptions candidates;
};

inline ChainConfig parse_chain_config(const json& cfg, const RunOptions& opt) {
  io::reject_unknown_keys(cfg,
                          {"seed", "n_random_instances", "n_bot_invariant_instances", "include_g2", "instance_files",
                           "tolerance", "n_extra_terminal", "closure_depth", "generator", "candidates"},
                          "verify-prop1 config");
  ChainConfig c;
  c.seed = config_seed(cfg, opt, c.seed);
  c.n_random_instances = cfg.value("n_random_instances", c.n_random_instances);
  c.n_bot_invariant_instances = cfg.value("n_bot_invariant_instances", c.n_bot_invariant_instances);
  c.include_g2 = cfg.value("include_g2", c.include_g2);
  c.tolerance = cfg.value("tolerance", c.tolerance);
  c.n_extra_terminal = cfg.value("n_extra_terminal", c.n_extra_terminal);
  c.closure_depth = cfg.value("closure_depth", c.closure_depth);
  if (!(c.tolerance >= 0.0)) throw ConfigurationError("tolerance must be non-negative");
  for (const auto& f : cfg.value("instance_files", std::vector<std::string>{})) {
    const fs::path p = resolve_relative(opt.config_path, f);
    if (!fs::exists(p)) throw ConfigurationError("instance file '" + p.string() + "' does not exist");
    c.instance_files.push_back(p.string());
  }
  if (cfg.contains("generator")) {
    const auto& g = cfg["generator"];
    io::reject_unknown_keys(g,
                            {"max_states", "max_joint_actions", "max_horizon", "max_participants", "n_mechanisms",
                             "deterministic_row_prob", "policy_concentration", "payoff_scale"},
                            "generator");
    auto& o = c.generator;
    o.max_states = g.value("max_states", o.max_states);
    o.max_joint_actions = g.value("max_joint_actions", o.max_joint_actions);
    o.max_horizon = g.value("max_horizon", o.max_horizon);
    o.max_participants = g.value("max_participants", o.max_participants);
    o.n_mechanisms = g.value("n_mechanisms", o.n_mechanisms);
    o.deterministic_row_prob = g.value("deterministic_row_prob", o.deterministic_row_prob);
    o.policy_concentration = g.value("policy_concentration", o.policy_concentration);
    o.payoff_scale = g.value("payoff_scale", o.payoff_scale);
    if (o.max_states < 1 || o.max_joint_actions < 2 || o.max_horizon < 2 || o.max_participants < 1 ||
        o.n_mechanisms < 1)
      throw ConfigurationError("generator bounds out of range");
  }
  if (cfg.contains("candidates")) {
    const auto& k = cfg["candidates"];
    io::reject_unknown_keys(k,
                            {"n_jitter", "jitter_scales", "n_redistribution", "first_step_variant", "bot_pinned",
                             "n_mc_derived", "fixed_bot"},
                            "candidates");
    auto& o = c.candidates;
    o.n_jitter = k.value("n_jitter", o.n_jitter);
    o.jitter_scales = k.value("jitter_scales", o.jitter_scales);
    o.n_redistribution = k.value("n_redistribution", o.n_redistribution);
    o.include_first_step_variant = k.value("first_step_variant", o.include_first_step_variant);
    o.include_bot_pinned = k.value("bot_pinned", o.include_bot_pinned);
    o.n_mc_copies = k.value("n_mc_derived", o.n_mc_copies);
    o.fixed_bot = k.value("fixed_bot", o.fixed_bot);
    if (o.jitter_scales.empty()) throw ConfigurationError("jitter_scales is empty");
  }
  return c;
}

struct ChainJob {
  std::string id;
  std::optional<Instance> instance;
  std::uint64_t stream = 0;
  // Filled by the run.
  ChainReport report;
};

inline json witness_json(const CandidateVerdict& v) {
  json j = json::object();
  if (v.transition_witness) {
    const auto& w = *v.transition_witness;
    j["transition"] = {{"step", w.entry ? "entry" : "bellman"},
                       {"mechanism_index", w.mechanism_index},
                       {"q_index", w.q_index},
                       {"timestep", w.timestep},
                       {"state", w.state},
                       {"joint_action", w.action},
                       {"deviation", w.deviation}};
  }
  if (v.trajectory_witness) {
    const auto& w = *v.trajectory_witness;
    j["trajectory"] = {{"mechanism_index", w.mechanism_index}, {"q_index", w.q_index}, {"deviation", w.deviation}};
  }
  return j;
}

inline int cmd_verify_chain(const RunOptions& opt, std::ostream& log) {
  const json cfg = io::read_json_file(opt.config_path);
  const ChainConfig c = parse_chain_config(cfg, opt);
  const fs::path out = prepare_out_dir(opt.out_dir);

  std::vector<ChainJob> jobs;
  std::uint64_t stream = 0;
  if (c.include_g2) jobs.push_back({"G2", make_g2(), stream++, {}});
  for (const auto& f : c.instance_files) jobs.push_back({fs::path(f).stem().string(), io::load_instance(f), stream++, {}});
  for (std::size_t k = 0; k < c.n_random_instances; ++k) {
    char id[32];
    std::snprintf(id, sizeof id, "random-%04zu", k);
    jobs.push_back({id, std::nullopt, stream++, {}});
  }
  for (std::size_t k = 0; k < c.n_bot_invariant_instances; ++k) {
    char id[32];
    std::snprintf(id, sizeof id, "bot-invariant-%04zu", k);
    jobs.push_back({id, std::nullopt, stream++, {}});
  }

  parallel_for(jobs.size(), opt.threads, [&](std::size_t j) {
    ChainJob& job = jobs[j];
    Rng rng = make_rng(c.seed, job.stream);
    if (!job.instance) {
      RandomInstanceOptions o = c.generator;
      o.bot_invariant = job.id.rfind("bot-invariant", 0) == 0;
      job.instance = random_instance(rng, o);
    }
    const Instance& inst = *job.instance;
    if (inst.mechanisms.empty()) throw ConfigurationError(job.id + ": mechanism family is empty");
    QFamily seed = inst.payoff_family();
    for (std::size_t k = 0; k < c.n_extra_terminal; ++k) seed.push_back(random_terminal_q(rng, inst.spaces));
    const auto candidates = generate_candidates(inst, rng, c.candidates);
    ChainOptions po;
    po.tol = c.tolerance;
    po.closure_depth = c.closure_depth;
    po.fixed_bot = c.candidates.fixed_bot;
    job.report = verify_equivalence_chain(inst.spaces, inst.pi_star, candidates, inst.mechanisms, seed, po);
  });

  std::string summary = std::string(kChainSummaryColumns) + "\n";
  std::string strict = std::string(kChainStrictnessColumns) + "\n";
  json report = json::object();
  report["tolerance"] = c.tolerance;
  report["seed"] = c.seed;
  json instances = json::array();
  std::size_t violations = 0, strict_checked = 0, strict_failed = 0, n_candidates = 0;
  for (const auto& job : jobs) {
    const Instance& inst = *job.instance;
    json ji;
    ji["id"] = job.id;
    ji["n_states"] = inst.spaces.n_states();
    ji["n_joint_actions"] = inst.spaces.n_joint_actions();
    ji["n_participants"] = inst.spaces.n_participants();
    ji["horizon"] = inst.spaces.horizon();
    ji["n_mechanisms"] = inst.mechanisms.size();
    json jc = json::array();
    for (const auto& v : job.report.candidates) {
      ++n_candidates;
      summary += job.id + "," + v.name + "," + flag(v.conditional_equal) + "," + flag(v.transition_equal) + "," +
                 flag(v.trajectory_equal) + "," + num(v.conditional_deviation) + "," + num(v.transition_deviation) +
                 "," + num(v.trajectory_deviation) + "," + flag(v.chain_violation) + "\n";
      jc.push_back({{"name", v.name},
                    {"conditional_equal", v.conditional_equal},
                    {"transition_equal", v.transition_equal},
                    {"trajectory_equal", v.trajectory_equal},
                    {"conditional_deviation", v.conditional_deviation},
                    {"transition_deviation", v.transition_deviation},
                    {"trajectory_deviation", v.trajectory_deviation},
                    {"closure_size", v.closure_size},
                    {"chain_violation", v.chain_violation},
                    {"witness", witness_json(v)}});
    }
    violations += job.report.chain_violations;
    ji["candidates"] = jc;
    const auto& s = job.report.strictness;
    if (s.checked) {
      ++strict_checked;
      if (!s.passed) ++strict_failed;
    }
    strict += job.id + "," + flag(s.checked) + "," + flag(s.has_factorization) + "," + flag(s.bot_invariant) + "," +
              flag(s.bot_nontrivial) + "," + flag(s.trajectory_equal) + "," + flag(s.transition_equal) + "," +
              num(s.trajectory_deviation) + "," + num(s.witness_deviation) + "," + num(s.min_off_bot_mass) + "," +
              num(s.value_function_deviation) + "," + flag(s.passed) + "\n";
    ji["strictness"] = {{"checked", s.checked},
                        {"premises",
                         {{"has_factorization", s.has_factorization},
                          {"bot_invariant", s.bot_invariant},
                          {"bot_nontrivial", s.bot_nontrivial}}},
                        {"conditional_equal", s.conditional_equal},
                        {"trajectory_equal", s.trajectory_equal},
                        {"transition_equal", s.transition_equal},
                        {"trajectory_deviation", s.trajectory_deviation},
                        {"witness_deviation", s.witness_deviation},
                        {"min_off_bot_mass", s.min_off_bot_mass},
                        {"value_function_deviation", s.value_function_deviation},
                        {"passed", s.passed}};
    instances.push_back(ji);
  }
  report["instances"] = instances;
  report["totals"] = {{"instances", jobs.size()},
                      {"candidates", n_candidates},
                      {"chain_violations", violations},
                      {"strictness_checked", strict_checked},
                      {"strictness_failed", strict_failed}};
  write_file(out / "chain_summary.csv", summary);
  write_file(out / "chain_strictness.csv", strict);
  write_file(out / "chain_report.json", report.dump(2) + "\n");
  log << "verify-prop1: " << jobs.size() << " instances, " << n_candidates << " candidates, " << violations
      << " chain violations, strictness " << (strict_checked - strict_failed) << "/" << strict_checked << " passed\n";
  return (violations == 0 && strict_failed == 0) ? 0 : 1;
}

// ---------------------------------------------------------------------------
// consensus
// ---------------------------------------------------------------------------

inline constexpr const char* kConsensusColumns = "model,metric,value";

inline consensus::ConsensusConfig parse_consensus_config(const json& cfg, const RunOptions& opt, bool& write_dataset) {
  io::reject_unknown_keys(cfg,
                          {"n_positions", "group_size", "n_questions", "n_participants", "style_labels", "beta_range",
                           "style_p_range", "alpha", "lambda", "val_fraction", "winrate_samples", "seed",
                           "write_dataset"},
                          "consensus config");
  consensus::ConsensusConfig c;
  c.n_positions = cfg.value("n_positions", c.n_positions);
  c.group_size = cfg.value("group_size", c.group_size);
  c.n_questions = cfg.value("n_questions", c.n_questions);
  c.n_participants = cfg.value("n_participants", c.n_participants);
  c.style_labels = cfg.value("style_labels", c.style_labels);
  if (cfg.contains("beta_range")) {
    const auto r = io::get_field<std::vector<double>>(cfg, "beta_range", "consensus config");
    if (r.size() != 2) throw ConfigurationError("beta_range must have two entries");
    c.beta_min = r[0];
    c.beta_max = r[1];
  }
  if (cfg.contains("style_p_range")) {
    const auto r = io::get_field<std::vector<double>>(cfg, "style_p_range", "consensus config");
    if (r.size() != 2) throw ConfigurationError("style_p_range must have two entries");
    c.style_p_min = r[0];
    c.style_p_max = r[1];
  }
  c.alpha = cfg.value("alpha", c.alpha);
  c.lambda = cfg.value("lambda", c.lambda);
  c.val_fraction = cfg.value("val_fraction", c.val_fraction);
  c.winrate_samples = cfg.value("winrate_samples", c.winrate_samples);
  c.seed = config_seed(cfg, opt, c.seed);
  write_dataset = cfg.value("write_dataset", true);
  const auto v = c.validate();
  if (!v.empty()) throw ConfigurationError("consensus config: " + join_messages(v));
  if (c.winrate_samples == 0) throw ConfigurationError("winrate_samples must be positive");
  return c;
}

inline int cmd_consensus(const RunOptions& opt, std::ostream& log) {
  const json cfg = io::read_json_file(opt.config_path);
  bool write_dataset = true;
  const auto c = parse_consensus_config(cfg, opt, write_dataset);
  const fs::path out = prepare_out_dir(opt.out_dir);
  const auto res = consensus::run_consensus_experiment(c, opt.threads);

  std::string csv = std::string(kConsensusColumns) + "\n";
  const std::vector<std::string> metrics{"loglik", "winrate", "discrepancy-single", "discrepancy-all"};
  for (const auto& name : consensus::model_names()) {
    const auto& m = res.metrics.at(name);
    const double values[] = {m.loglik, m.winrate, m.discrepancy_single, m.discrepancy_all};
    for (std::size_t k = 0; k < metrics.size(); ++k) csv += name + "," + metrics[k] + "," + num(values[k]) + "\n";
  }
  write_file(out / "consensus.csv", csv);

  const auto& pop = res.metrics.at("population");
  const auto& per = res.metrics.at("personal");
  const auto& uni = res.metrics.at("uniform");
  json report;
  report["seed"] = c.seed;
  report["episodes"] = {{"total", res.data.dataset.size()},
                        {"train", res.split.train.size()},
                        {"validation", res.split.validation.size()}};
  report["validation_participant_fraction"] = res.split.validation_participant_fraction;
  report["validation_episode_fraction"] = res.split.validation_episode_fraction;
  report["checks"] = {
      {"loglik_personal_gt_population_gt_uniform", per.loglik > pop.loglik && pop.loglik > uni.loglik},
      {"loglik_personal_minus_population", per.loglik - pop.loglik},
      {"discrepancy_all_uniform_gt_population_gt_personal",
       uni.discrepancy_all > pop.discrepancy_all && pop.discrepancy_all > per.discrepancy_all},
      {"discrepancy_all_personal_over_uniform", per.discrepancy_all / uni.discrepancy_all},
      {"single_le_all_every_model", pop.discrepancy_single <= pop.discrepancy_all &&
                                        per.discrepancy_single <= per.discrepancy_all &&
                                        uni.discrepancy_single <= uni.discrepancy_all}};
  write_file(out / "consensus_report.json", report.dump(2) + "\n");
  if (write_dataset) {
    std::ostringstream ds;
    io::write_jsonl(ds, res.split.train, c.style_labels);
    io::write_jsonl(ds, res.split.validation, c.style_labels);
    write_file(out / "dataset.jsonl", ds.str());
  }

  const std::vector<std::string> models = consensus::model_names();
  auto series_of = [&](const std::string& label, auto getter) {
    BarSeries s{label, {}};
    for (const auto& name : models) s.values.push_back(getter(res.metrics.at(name)));
    return s;
  };
  write_file(out / "loglik.svg",
             grouped_bar_chart("Held-out critique log-likelihood", "mean log-probability (nats)", models,
                               {series_of("log-likelihood", [](const auto& m) { return m.loglik; })}));
  write_file(out / "winrate.svg",
             grouped_bar_chart("Rater win-rate against recorded critiques", "win-rate", models,
                               {series_of("win-rate", [](const auto& m) { return m.winrate; })}));
  write_file(out / "discrepancy.svg",
             grouped_bar_chart("Mean payoff discrepancy of the revised consensus", "mean |payoff difference|", models,
                               {series_of("single substitution", [](const auto& m) { return m.discrepancy_single; }),
                                series_of("all substituted", [](const auto& m) { return m.discrepancy_all; })}));
  log << "consensus: " << res.split.validation.size() << " validation episodes; loglik personal " << num(per.loglik)
      << ", population " << num(pop.loglik) << ", uniform " << num(uni.loglik) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// representativity
// ---------------------------------------------------------------------------

inline constexpr const char* kRepresentativityColumns =
    "candidate,mode,discrepancy,value,mechanism_index,q_index,std_error";

inline PolicyProfile candidate_from_json(const json& j, const Instance& inst) {
  const std::string where = "candidate";
  io::reject_unknown_keys(j, {"name", "builtin", "fixed_bot", "policies", "substitute"}, where);
  const int n_sources = j.contains("builtin") + j.contains("policies") + j.contains("substitute");
  if (n_sources != 1) throw ConfigurationError(where + ": give exactly one of 'builtin', 'policies', 'substitute'");
  if (j.contains("builtin")) {
    const auto b = io::get_field<std::string>(j, "builtin", where);
    if (b == "pi_star") return inst.pi_star;
    if (b == "bot-pinned") return build_bot_pinned_policy(inst.pi_star, inst.spaces, j.value("fixed_bot", std::size_t{0}));
    throw ConfigurationError(where + ": unknown builtin '" + b + "'");
  }
  if (j.contains("policies")) {
    const auto tables = io::get_field<std::vector<PolicyTables>>(j, "policies", where);
    if (tables.size() != inst.spaces.n_participants())
      throw ConfigurationError(where + ": expected one policy per participant");
    std::vector<Policy> ps;
    for (std::size_t i = 0; i < tables.size(); ++i) ps.emplace_back(inst.spaces, i, tables[i]);
    return PolicyProfile(std::move(ps));
  }
  const auto& s = j["substitute"];
  io::reject_unknown_keys(s, {"participant", "policy"}, where + ".substitute");
  const auto i = io::get_field<std::size_t>(s, "participant", where);
  if (i >= inst.spaces.n_participants()) throw ConfigurationError(where + ": participant out of range");
  auto rep = std::make_shared<const Policy>(inst.spaces, i, io::get_field<PolicyTables>(s, "policy", where));
  return substitute_single(inst.pi_star, i, rep);
}

inline int cmd_representativity(const RunOptions& opt, std::ostream& log) {
  const json cfg = io::read_json_file(opt.config_path);
  io::reject_unknown_keys(cfg,
                          {"instance", "candidates", "q_family", "discrepancy", "mask", "mode", "mechanism_index",
                           "mc_samples", "seed"},
                          "representativity config");
  const std::uint64_t seed = config_seed(cfg, opt, 1);
  if (!cfg.contains("instance")) throw ConfigurationError("representativity config: missing 'instance'");
  Instance inst = [&] {
    const auto& ref = cfg["instance"];
    if (ref.is_string()) {
      const fs::path p = resolve_relative(opt.config_path, ref.get<std::string>());
      if (!fs::exists(p)) throw ConfigurationError("instance file '" + p.string() + "' does not exist");
      return io::load_instance(p.string());
    }
    return io::instance_from_json(ref);
  }();
  if (inst.mechanisms.empty()) throw ConfigurationError("mechanism family is empty");

  QFamily q_family;
  const json qf = cfg.value("q_family", json("payoff"));
  if (qf.is_string()) {
    if (qf.get<std::string>() != "payoff") throw ConfigurationError("q_family must be \"payoff\" or a list of tables");
    q_family = inst.payoff_family();
  } else {
    for (const auto& table : qf)
      q_family.push_back(QFunction::terminal(PayoffTable(inst.spaces, table.get<PayoffValues>()),
                                             inst.spaces.n_joint_actions()));
  }
  if (q_family.empty()) throw ConfigurationError("Q family is empty");

  Discrepancy disc;
  disc.kind = parse_discrepancy_kind(cfg.value("discrepancy", std::string("mean-absolute")));
  if (cfg.contains("mask")) {
    disc.mask = io::get_field<std::vector<std::size_t>>(cfg, "mask", "representativity config");
    if (disc.mask->empty()) throw ConfigurationError("mask is empty");
    for (std::size_t i : *disc.mask)
      if (i >= inst.spaces.n_participants()) throw ConfigurationError("mask index out of range");
  }
  const std::string mode = cfg.value("mode", std::string("family-max"));
  if (mode != "family-max" && mode != "fixed") throw ConfigurationError("mode must be family-max or fixed");
  std::vector<Mechanism> family = inst.mechanisms;
  std::size_t offset = 0;
  if (mode == "fixed") {
    offset = cfg.value("mechanism_index", std::size_t{0});
    if (offset >= family.size()) throw ConfigurationError("mechanism_index out of range");
    family = {inst.mechanisms[offset]};
  }
  const std::size_t mc_samples = cfg.value("mc_samples", std::size_t{0});
  StateIndex init_state = 0;
  if (mc_samples > 0) {
    const auto it = std::find(inst.init.begin(), inst.init.end(), 1.0);
    if (it == inst.init.end()) throw ConfigurationError("Monte Carlo mode needs a point-mass initial state");
    init_state = static_cast<StateIndex>(it - inst.init.begin());
  }

  if (!cfg.contains("candidates") || !cfg["candidates"].is_array() || cfg["candidates"].empty())
    throw ConfigurationError("representativity config: 'candidates' must be a non-empty list");
  std::vector<std::pair<std::string, PolicyProfile>> candidates;
  for (std::size_t k = 0; k < cfg["candidates"].size(); ++k) {
    const auto& cj = cfg["candidates"][k];
    candidates.emplace_back(cj.value("name", "candidate-" + std::to_string(k)), candidate_from_json(cj, inst));
  }

  const fs::path out = prepare_out_dir(opt.out_dir);
  std::vector<RepresentativityResult> results(candidates.size());
  parallel_for(candidates.size(), opt.threads, [&](std::size_t k) {
    results[k] = mc_samples > 0 ? representativity_mc(inst.pi_star, candidates[k].second, family, q_family, disc,
                                                      init_state, mc_samples, seed, 1)
                                : representativity(inst.pi_star, candidates[k].second, family, q_family, disc, inst.init);
    results[k].mode = mode;
  });

  std::string csv = std::string(kRepresentativityColumns) + "\n";
  json report = json::array();
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto& r = results[k];
    csv += candidates[k].first + "," + r.mode + "," + to_string(disc.kind) + "," + num(r.value) + "," +
           std::to_string(r.mechanism_index + offset) + "," + std::to_string(r.q_index) + "," + num(r.std_error) + "\n";
    report.push_back({{"candidate", candidates[k].first},
                      {"mode", r.mode},
                      {"outcomes", r.outcome_kind == OutcomeKind::exact ? "exact" : "monte-carlo"},
                      {"value", r.value},
                      {"mechanism_index", r.mechanism_index + offset},
                      {"q_index", r.q_index},
                      {"std_error", r.std_error}});
    log << "representativity: " << candidates[k].first << " = " << num(r.value) << "\n";
  }
  write_file(out / "representativity.csv", csv);
  write_file(out / "representativity_report.json", json{{"instance", inst.name}, {"results", report}}.dump(2) + "\n");
  return 0;
}

}  // namespace repsim::tools
