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
#ifndef TRUTHFL_REPORT_HPP_
#define TRUTHFL_REPORT_HPP_

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

#include "truthfl/simulator.hpp"

namespace truthfl {

/// Shortest round-trip decimal form (%.17g).
std::string format_double(double x);

/// round, aggregator, distance, coefficient, n_adversaries, attack, main_acc,
/// backdoor_acc, agg_time_s, iters, weight_c0 .. weight_c{k-1}. Missing
/// values are written as empty cells.
std::vector<std::string> round_csv_header(int clients_per_round);

void write_round_csv(std::ostream& out, const ExperimentConfig& cfg, const std::vector<RoundReport>& reports);

/// Final accuracies, mean aggregation time and mean iteration count.
nlohmann::json summary_json(const ExperimentConfig& cfg, const std::vector<RoundReport>& reports);

}  // namespace truthfl

#endif  // TRUTHFL_REPORT_HPP_
