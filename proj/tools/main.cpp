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

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

constexpr const char* kFooter = R"(Output files (CSV columns are fixed):
  verify-prop1     chain_summary.csv     instance,candidate,conditional_equal,transition_equal,
                                         trajectory_equal,conditional_deviation,
                                         transition_deviation,trajectory_deviation,chain_violation
                   chain_strictness.csv  instance,checked,has_factorization,bot_invariant,
                                         bot_nontrivial,trajectory_equal,transition_equal,
                                         trajectory_deviation,witness_deviation,min_off_bot_mass,
                                         value_function_deviation,passed
                   chain_report.json
  consensus        consensus.csv         model,metric,value
                   consensus_report.json, dataset.jsonl, loglik.svg, winrate.svg, discrepancy.svg
  representativity representativity.csv  candidate,mode,discrepancy,value,mechanism_index,
                                         q_index,std_error
                   representativity_report.json

Exit codes: 0 success, 1 property violation, 2 usage or configuration error.
Unknown configuration keys are rejected.)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"repsim: finite-horizon collective decision simulations and equivalence checks"};
  app.footer(kFooter);
  app.require_subcommand(1);

  repsim::tools::RunOptions opt;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON configuration file")->required();
    sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    sub->add_option("--threads", opt.threads, "worker threads (0: all hardware threads)")->capture_default_str();
    sub->add_option("--seed", seed, "overrides the configuration seed");
  };
  auto* chain = app.add_subcommand("verify-prop1", "check the nesting of the three equivalence classes");
  auto* cons = app.add_subcommand("consensus", "run the consensus-finding experiment");
  auto* rep = app.add_subcommand("representativity", "evaluate representativity of candidate profiles");
  for (auto* sub : {chain, cons, rep}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  for (auto* sub : {chain, cons, rep})
    if (sub->count("--seed")) opt.seed = seed;

  try {
    if (chain->parsed()) return repsim::tools::cmd_verify_chain(opt, std::cout);
    if (cons->parsed()) return repsim::tools::cmd_consensus(opt, std::cout);
    return repsim::tools::cmd_representativity(opt, std::cout);
  } catch (const repsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
