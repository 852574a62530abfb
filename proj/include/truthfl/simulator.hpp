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
#ifndef TRUTHFL_SIMULATOR_HPP_
#define TRUTHFL_SIMULATOR_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "truthfl/aggregators.hpp"
#include "truthfl/attacks.hpp"
#include "truthfl/data.hpp"
#include "truthfl/training.hpp"

namespace truthfl {

enum class DataSource { Synth, Idx };

std::string_view to_string(DataSource source);
DataSource parse_data_source(std::string_view text);

struct DatasetConfig {
  DataSource source = DataSource::Synth;
  SynthSpec synth;           // training pool when source is synth
  int synth_test_samples = 1000;
  std::string train_images;  // IDX paths when source is idx
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  double noniid_bias = 0.8;
  int samples_per_client = 100;
};

struct FlConfig {
  int total_clients = 20;
  int clients_per_round = 10;
  int rounds = 100;
  double server_lr = 1.0;
  TrainConfig train;  // seed is ignored; each client gets a derived stream
};

struct ExperimentConfig {
  std::uint64_t master_seed = 1;
  DatasetConfig dataset;
  ModelSpec model;
  FlConfig fl;
  AttackSpec attack;
  int n_adversaries = 0;  // per round
  bool allow_adversary_majority = false;
  AggregatorSpec aggregator;
  double fltrust_root_fraction = 0.01;

  void validate() const;
};

struct RoundReport {
  int round = 0;  // 1-based
  double main_accuracy = 0.0;
  std::optional<double> backdoor_accuracy;
  double aggregation_time_s = 0.0;
  std::optional<int> iterations;
  std::vector<double> weights;  // roster order; empty for rules without weights
  std::vector<int> roster;      // ascending client ids
  std::vector<int> adversaries; // ascending client ids, subset of roster
};

/// Thrown when the global model stops being finite.
class NonFiniteModelError : public std::runtime_error {
 public:
  NonFiniteModelError(int round, const std::string& detail)
      : std::runtime_error("non-finite global model after round " + std::to_string(round) + ": " +
                           detail),
        round_(round) {}
  int round() const noexcept { return round_; }

 private:
  int round_;
};

struct Roster {
  std::vector<int> clients;
  std::vector<int> adversaries;
};

Roster select_round_roster(int total_clients, int clients_per_round, int n_adversaries,
                           int round_index, std::uint64_t master_seed);

/// w - eta * delta, layer by layer.
ModelParams apply_global_update(const ModelParams& w, const LayeredUpdate& delta, double eta);

/// One local_train pass on the root split, returned as an update.
LayeredUpdate fltrust_server_step(const Dataset& root_ds, const ModelParams& w, const TrainConfig& cfg);

/// What the server saw in one round, handed to an optional observer before
/// the global model is updated.
struct RoundTrace {
  int round = 0;
  std::span<const LayeredUpdate> updates;  // roster order
  std::span<const double> sample_counts;
  const LayeredUpdate* aggregate = nullptr;
  const ModelParams* global_before = nullptr;
};

using RoundObserver = std::function<void(const RoundTrace&)>;

std::vector<RoundReport> run_experiment(const ExperimentConfig& cfg, const RoundObserver& observer = {});

}  // namespace truthfl

#endif  // TRUTHFL_SIMULATOR_HPP_
