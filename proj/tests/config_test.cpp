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
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "truthfl/config.hpp"

namespace truthfl {
namespace {

namespace fs = std::filesystem;

fs::path write_file(const std::string& name, const std::string& text) {
  const auto dir = fs::temp_directory_path() / "truthfl_config_test";
  fs::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p) << text;
  return p;
}

const fs::path kConfigs = fs::path(TRUTHFL_SOURCE_DIR) / "configs";

TEST(Override, SetsNestedValues) {
  YAML::Node root = YAML::Load("fl: {rounds: 10}");
  apply_override(root, "fl.rounds=3");
  apply_override(root, "aggregator.kind=krum");
  apply_override(root, "attack.backdoor.trigger_features=[1, 2]");
  EXPECT_EQ(root["fl"]["rounds"].as<int>(), 3);
  EXPECT_EQ(root["aggregator"]["kind"].as<std::string>(), "krum");
  EXPECT_EQ(root["attack"]["backdoor"]["trigger_features"].as<std::vector<int>>(), (std::vector<int>{1, 2}));
  EXPECT_THROW(apply_override(root, "no_equals_sign"), ConfigError);
  EXPECT_THROW(apply_override(root, "=3"), ConfigError);
}

TEST(LoadConfig, ShippedScenariosParse) {
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    if (entry.path().filename() == "sweep_example.yaml") continue;
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
  }
  EXPECT_NO_THROW(load_sweep(kConfigs / "sweep_example.yaml"));
}

TEST(LoadConfig, OverridesAndName) {
  const auto loaded = load_config(kConfigs / "byzantine_boost.yaml", {"fl.rounds=3", "output.name=quick"});
  EXPECT_EQ(loaded.experiment.fl.rounds, 3);
  EXPECT_EQ(loaded.name, "quick");
  EXPECT_EQ(loaded.experiment.n_adversaries, 3);
  EXPECT_EQ(loaded.experiment.aggregator.kind, AggregatorKind::FedTruth);
  EXPECT_EQ(load_config(kConfigs / "byzantine_boost.yaml").name, "byzantine_boost");
}

TEST(LoadConfig, Errors) {
  EXPECT_THROW(load_config("/nonexistent/config.yaml"), ConfigError);
  EXPECT_THROW(load_config(write_file("typo.yaml", "fl: {roundz: 3}\n")), ConfigError);
  EXPECT_THROW(load_config(write_file("badval.yaml", "fl: {rounds: many}\n")), ConfigError);
  EXPECT_THROW(load_config(write_file("badkind.yaml", "aggregator: {kind: bogus}\n")), ConfigError);
  EXPECT_THROW(load_config(kConfigs / "byzantine_boost.yaml", {"attack.n_adversaries=5"}), ConfigError);
  EXPECT_NO_THROW(
      load_config(kConfigs / "byzantine_boost.yaml", {"attack.n_adversaries=5", "attack.allow_majority=true"}));
}

TEST(Sweep, CardinalityAndDefaults) {
  const auto base = kConfigs / "byzantine_boost.yaml";
  const auto p = write_file("sweep.yaml", "base: " + base.string() +
                                              "\naggregators: [fedtruth, fedavg, krum]\nadversaries: [0, 3]\n"
                                              "seeds: [1, 2]\n");
  const auto spec = load_sweep(p);
  EXPECT_EQ(spec.cell_count(), 12u);
  EXPECT_EQ(spec.biases, (std::vector<double>{0.8}));
  EXPECT_EQ(spec.distances, (std::vector<DistanceKind>{DistanceKind::Euclidean}));
}

TEST(Sweep, RejectsEmptyListsAndOversizedGrids) {
  const auto base = kConfigs / "byzantine_boost.yaml";
  EXPECT_THROW(load_sweep(write_file("empty.yaml", "base: " + base.string() + "\naggregators: []\n")), ConfigError);
  EXPECT_THROW(load_sweep(write_file("noagg.yaml", "base: " + base.string() + "\n")), ConfigError);
  EXPECT_THROW(load_sweep(write_file("emptyseeds.yaml", "base: " + base.string() +
                                                            "\naggregators: [fedavg]\nseeds: []\n")),
               ConfigError);
  EXPECT_THROW(load_sweep(write_file("big.yaml", "base: " + base.string() +
                                                     "\naggregators: [fedavg, krum]\nseeds: [1, 2, 3]\n"
                                                     "max_cells: 5\n")),
               ConfigError);
}

}  // namespace
}  // namespace truthfl
