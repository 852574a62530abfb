/*
 * Copyright 2026 The truthfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <CLI11.hpp>

#include <iostream>

#include "truthfl/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"truthfl: robust aggregation experiments for federated learning"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "Run one experiment from a YAML config");
  run->add_option("config", config_path, "Experiment config file")->required();
  run->add_option("--set", overrides, "Override a config value, e.g. --set fl.rounds=3")->take_all();

  std::string sweep_path;
  auto* sweep = app.add_subcommand("sweep", "Run a grid of experiments from a sweep spec");
  sweep->add_option("spec", sweep_path, "Sweep spec file")->required();

  std::vector<int> clients{10, 100, 1000};
  int dim = 10000;
  int repetitions = 1;
  std::vector<std::string> aggregator_names;
  auto* bench = app.add_subcommand("bench", "Time each aggregator on random updates");
  bench->add_option("--clients", clients, "Client counts")->delimiter(',');
  bench->add_option("--dim", dim, "Update dimension");
  bench->add_option("--repetitions", repetitions, "Calls per (aggregator, n)");
  bench->add_option("--aggregators", aggregator_names, "Subset of aggregators")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return truthfl::run_command(config_path, overrides, std::cout, std::cerr);
  if (sweep->parsed()) return truthfl::sweep_command(sweep_path, std::cout, std::cerr);

  std::vector<truthfl::AggregatorKind> kinds;
  try {
    for (const auto& name : aggregator_names) kinds.push_back(truthfl::parse_aggregator_kind(name));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  if (kinds.empty()) kinds = truthfl::all_aggregators();
  return truthfl::bench_command(clients, dim, repetitions, kinds, std::cout, std::cerr);
}
