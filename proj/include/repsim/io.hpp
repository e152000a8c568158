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

// JSON instance files and JSON-lines episode datasets.
//
// Instance schema (field names exact, unknown keys rejected):
//   "states":        [label, ...]
//   "actions":       [[label, ...] per participant]
//   "horizon":       integer >= 2
//   "factorization": {"star": [...], "bot": [...]} for the joint action space
//                    (row-major bijection), or a list of such objects, one
//                    per participant (optional)
//   "policies":      [participant][t][state][action], 1 or T tables each
//   "kernels":       [t][state][joint_action][next_state], 1 or T-1 kernels
//   "mechanisms":    list of "kernels" arrays (alternative to "kernels")
//   "payoffs":       [state][participant]
//   "init":          [state] distribution, or a state label (optional;
//                    default: the first state)
//   "name":          string (optional)

#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "repsim/consensus.hpp"
#include "repsim/instances.hpp"

namespace repsim::io {

using json = nlohmann::json;

/// Throws ConfigurationError naming every key of `j` outside `allowed`.
inline void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigurationError(where + " must be a JSON object");
  std::vector<std::string> unknown;
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) unknown.push_back(it.key());
  if (!unknown.empty()) {
    std::string msg = "unknown key(s) in " + where + ":";
    for (const auto& k : unknown) msg += " '" + k + "'";
    throw ConfigurationError(msg);
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigurationError("malformed JSON in '" + path + "': " + e.what());
  }
}

template <class T>
T get_field(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigurationError(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigurationError(where + ": bad '" + key + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

inline Factorization factorization_from_json(const json& j, const std::string& where) {
  reject_unknown_keys(j, {"star", "bot"}, where);
  return Factorization(get_field<std::vector<std::string>>(j, "star", where),
                       get_field<std::vector<std::string>>(j, "bot", where));
}

inline Instance instance_from_json(const json& j) {
  const std::string where = "instance";
  reject_unknown_keys(j, {"name", "states", "actions", "horizon", "factorization", "policies", "kernels", "mechanisms",
                          "payoffs", "init"},
                      where);
  auto states = get_field<std::vector<std::string>>(j, "states", where);
  auto actions = get_field<std::vector<std::vector<std::string>>>(j, "actions", where);
  const auto horizon = get_field<std::size_t>(j, "horizon", where);

  std::optional<FiniteSpaces> spaces;
  if (j.contains("factorization") && j["factorization"].is_array()) {
    std::vector<Factorization> fs;
    for (const auto& f : j["factorization"]) fs.push_back(factorization_from_json(f, where + ".factorization"));
    spaces.emplace(states, actions, horizon, std::move(fs));
  } else if (j.contains("factorization")) {
    spaces.emplace(states, actions, horizon, factorization_from_json(j["factorization"], where + ".factorization"));
  } else {
    spaces.emplace(states, actions, horizon);
  }

  const auto tables = get_field<std::vector<PolicyTables>>(j, "policies", where);
  if (tables.size() != spaces->n_participants())
    throw ConfigurationError(where + ": expected one policy per participant");
  std::vector<Policy> policies;
  for (std::size_t i = 0; i < tables.size(); ++i) policies.emplace_back(*spaces, i, tables[i]);

  std::vector<Mechanism> mechanisms;
  if (j.contains("kernels") && j.contains("mechanisms"))
    throw ConfigurationError(where + ": give either 'kernels' or 'mechanisms', not both");
  if (j.contains("kernels")) mechanisms.emplace_back(*spaces, get_field<KernelTables>(j, "kernels", where));
  if (j.contains("mechanisms"))
    for (const auto& k : get_field<std::vector<KernelTables>>(j, "mechanisms", where)) mechanisms.emplace_back(*spaces, k);

  PayoffTable payoff(*spaces, get_field<PayoffValues>(j, "payoffs", where));

  std::vector<double> init = point_mass(spaces->n_states(), 0);
  if (j.contains("init")) {
    if (j["init"].is_string()) {
      init = point_mass(spaces->n_states(), spaces->state_index(j["init"].get<std::string>()));
    } else {
      init = get_field<std::vector<double>>(j, "init", where);
      std::vector<Violation> v;
      if (init.size() != spaces->n_states()) throw ConfigurationError(where + ": 'init' has wrong length");
      detail::check_row(init, "(init)", v);
      detail::throw_if_any(std::move(v));
    }
  }
  return Instance{j.value("name", std::string("instance")), *spaces, PolicyProfile(std::move(policies)),
                  std::move(mechanisms), std::move(payoff), std::move(init)};
}

inline Instance load_instance(const std::string& path) { return instance_from_json(read_json_file(path)); }

inline json instance_to_json(const Instance& inst) {
  json j;
  j["name"] = inst.name;
  j["states"] = inst.spaces.state_labels();
  j["actions"] = inst.spaces.action_labels();
  j["horizon"] = inst.spaces.horizon();
  if (!inst.spaces.participant_factorizations().empty() &&
      inst.spaces.participant_factorizations().size() == inst.spaces.n_participants()) {
    json fs = json::array();
    for (const auto& f : inst.spaces.participant_factorizations())
      fs.push_back({{"star", f.star_labels()}, {"bot", f.bot_labels()}});
    j["factorization"] = fs;
  } else if (inst.spaces.factorization()) {
    j["factorization"] = {{"star", inst.spaces.factorization()->star_labels()},
                          {"bot", inst.spaces.factorization()->bot_labels()}};
  }
  json pols = json::array();
  for (std::size_t i = 0; i < inst.pi_star.size(); ++i) pols.push_back(inst.pi_star[i].tables());
  j["policies"] = pols;
  json mechs = json::array();
  for (const auto& m : inst.mechanisms) mechs.push_back(m.tables());
  j["mechanisms"] = mechs;
  j["payoffs"] = inst.payoff.values();
  j["init"] = inst.init;
  return j;
}

// ---------------------------------------------------------------------------
// Episode datasets
// ---------------------------------------------------------------------------

inline json record_to_json(const consensus::EpisodeRecord& rec, const std::vector<std::string>& style_labels) {
  json critiques = json::array();
  for (const auto& c : rec.critiques) critiques.push_back(json::array({c.direction, style_labels.at(c.style)}));
  json j;
  j["question"] = rec.question;
  j["participants"] = rec.participants;
  j["opinions"] = rec.opinions;
  j["draft"] = rec.draft;
  j["critiques"] = critiques;
  j["revised"] = rec.revised;
  j["split"] = rec.split;
  return j;
}

inline consensus::EpisodeRecord record_from_json(const json& j, const std::vector<std::string>& style_labels) {
  const std::string where = "episode record";
  reject_unknown_keys(j, {"question", "participants", "opinions", "draft", "critiques", "revised", "split"}, where);
  consensus::EpisodeRecord rec;
  rec.question = get_field<std::size_t>(j, "question", where);
  rec.participants = get_field<std::vector<std::size_t>>(j, "participants", where);
  rec.opinions = get_field<std::vector<std::size_t>>(j, "opinions", where);
  rec.draft = get_field<std::size_t>(j, "draft", where);
  rec.revised = get_field<std::size_t>(j, "revised", where);
  rec.split = get_field<std::string>(j, "split", where);
  for (const auto& c : get_field<json>(j, "critiques", where)) {
    if (!c.is_array() || c.size() != 2) throw ConfigurationError(where + ": critique must be [direction, style]");
    const auto label = c[1].get<std::string>();
    const auto it = std::find(style_labels.begin(), style_labels.end(), label);
    if (it == style_labels.end()) throw ConfigurationError(where + ": unknown style '" + label + "'");
    rec.critiques.push_back({c[0].get<int>(), static_cast<std::size_t>(it - style_labels.begin())});
  }
  if (rec.opinions.size() != rec.participants.size() || rec.critiques.size() != rec.participants.size())
    throw ConfigurationError(where + ": field lengths differ");
  return rec;
}

inline void write_jsonl(std::ostream& out, const consensus::Dataset& data,
                        const std::vector<std::string>& style_labels) {
  for (const auto& rec : data) out << record_to_json(rec, style_labels).dump() << '\n';
}

inline consensus::Dataset read_jsonl(std::istream& in, const std::vector<std::string>& style_labels) {
  consensus::Dataset out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(json::parse(line), style_labels));
    } catch (const json::exception& e) {
      throw ConfigurationError(std::string("malformed dataset line: ") + e.what());
    }
  }
  return out;
}

}  // namespace repsim::io
