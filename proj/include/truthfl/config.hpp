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
#ifndef TRUTHFL_CONFIG_HPP_
#define TRUTHFL_CONFIG_HPP_

#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "truthfl/simulator.hpp"

namespace truthfl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sets `path` (dot separated, e.g. "fl.rounds") in `root` to the YAML value
/// parsed from `value`. Missing intermediate maps are created.
void set_dotted(YAML::Node& root, const std::string& path, const std::string& value);

/// Applies a "key=value" override.
void apply_override(YAML::Node& root, const std::string& assignment);

/// Builds a config from a YAML tree. Every field has a default, so an empty
/// document is a valid config. Unknown keys are rejected.
ExperimentConfig config_from_yaml(const YAML::Node& root);

struct LoadedConfig {
  ExperimentConfig experiment;
  std::string name;  // output file stem
  YAML::Node tree;   // after overrides
};

LoadedConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

struct SweepSpec {
  std::filesystem::path base_config;
  std::string name = "sweep";
  std::vector<std::string> overrides;
  std::vector<AggregatorKind> aggregators;
  std::vector<int> adversaries;
  std::vector<double> biases;
  std::vector<DistanceKind> distances;
  std::vector<std::uint64_t> seeds;
  int max_cells = 256;
  bool gnuplot = true;

  std::size_t cell_count() const {
    return aggregators.size() * adversaries.size() * biases.size() * distances.size() * seeds.size();
  }
  void validate() const;
};

/// Lists left out of the file fall back to the base config's single value.
SweepSpec load_sweep(const std::filesystem::path& path);

}  // namespace truthfl

#endif  // TRUTHFL_CONFIG_HPP_
