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
#ifndef TRUTHFL_CLI_HPP_
#define TRUTHFL_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "truthfl/aggregators.hpp"

namespace truthfl {

inline constexpr const char* kOutputRootEnv = "TRUTHFL_OUTPUT_ROOT";

/// $TRUTHFL_OUTPUT_ROOT, or "results" when unset.
std::filesystem::path output_root();

/// Runs one experiment and writes <root>/<name>.csv and <root>/<name>.json.
int run_command(const std::filesystem::path& config_path, const std::vector<std::string>& overrides,
                std::ostream& out, std::ostream& err);

/// Runs every cell of a sweep into <root>/<name>/, then writes the merged
/// long CSV, a per-cell status JSON and optionally a gnuplot script.
int sweep_command(const std::filesystem::path& sweep_path, std::ostream& out, std::ostream& err);

struct BenchRow {
  AggregatorKind aggregator;
  int n_clients;
  int dim;
  double mean_seconds;
};

/// Times each aggregator on seeded N(0, 1) updates of length `dim`.
std::vector<BenchRow> bench_aggregation(const std::vector<int>& n_clients, int dim, int repetitions,
                                        const std::vector<AggregatorKind>& kinds, std::uint64_t seed = 1);

int bench_command(const std::vector<int>& n_clients, int dim, int repetitions,
                  const std::vector<AggregatorKind>& kinds, std::ostream& out, std::ostream& err);

std::vector<AggregatorKind> all_aggregators();

}  // namespace truthfl

#endif  // TRUTHFL_CLI_HPP_
